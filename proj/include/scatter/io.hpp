#ifndef SCATTER_IO_HPP
#define SCATTER_IO_HPP

#include <iosfwd>
#include <map>
#include <string>

#include "scatter/inverse.hpp"
#include "scatter/spectral_zeros.hpp"

namespace scatter {

/// One experiment description: potential, grid, workflow, output directory
/// and tolerance overrides.
struct RunConfig {
  std::string workflow = "forward";  // forward | invert | roundtrip | boundstates | verify
  double lambda_max = 50.0;
  int grid_points = 4000;  // total sample count (even); the grid inserts 0
  std::string out_dir = "out";
  std::string data_file;   // invert workflow: phase CSV
  std::string side_file;   // invert workflow: zeros/kappas listing
  SeparablePotential potential;
  std::map<std::string, double> tol;
  std::vector<std::string> notes;  // renormalization and parse warnings

  double tol_or(const std::string& key, double fallback) const;
  SpectralGrid make_grid() const;
};

/// Parses the key/value experiment format; throws Errc::parse with a line
/// reference on malformed input.
RunConfig load_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

std::string format_g17(double v);

/// Deterministic CSV writer (%.17g, LF endings).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// Static line-plot SVG; one polyline per series.
void write_svg(const std::string& path, const std::string& title,
               const std::vector<double>& x,
               const std::vector<std::pair<std::string, std::vector<double>>>& series);

void write_scattering_data(const std::string& csv_path, const std::string& side_path,
                           const ScatteringData& data);
ScatteringData load_scattering_data(const std::string& csv_path,
                                    const std::string& side_path);

int run_forward(const RunConfig& cfg, std::ostream& log);
int run_boundstates(const RunConfig& cfg, std::ostream& log);
int run_roundtrip(const RunConfig& cfg, std::ostream& log);
int run_invert(const RunConfig& cfg, std::ostream& log);
int run_verify(const RunConfig& cfg, std::ostream& log);
int run_workflow(const RunConfig& cfg, std::ostream& log);

}  // namespace scatter

#endif
