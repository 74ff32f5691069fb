#ifndef SCATTER_CAUCHY_HPP
#define SCATTER_CAUCHY_HPP

#include <Eigen/Core>
#include <vector>

#include "scatter/grid.hpp"

namespace scatter {

enum class Parity { none, even, odd };

/// Sampled density rho(t) on a symmetric grid with a power-law tail model
/// |rho| ~ C |t|^{-p} beyond the span.  Parity-tagged densities use the
/// folded half-line kernels, which also admit slower tails (p > 0); the
/// unfolded path requires p > 1.
struct DensitySamples {
  SpectralGrid grid;
  std::vector<cd> values;
  double tail_exponent = 2.0;
  Parity parity = Parity::none;

  DensitySamples() = default;
  DensitySamples(SpectralGrid g, std::vector<cd> v, double p, Parity par = Parity::none);

  cd at(int i) const { return values[static_cast<std::size_t>(i)]; }
  /// Cubic interpolation at t inside the span.
  cd interp(double t) const;
};

/// PV int rho(t)/(t - lambda) dt over the real line: singularity
/// subtraction on the sampled span, exact logarithmic term, fitted
/// power-law tail beyond it.
cd pv_integral(const DensitySamples& rho, double lambda);

/// (1/2 pi i) int rho(t)/(t - z) dt for Im z != 0; switches to an exact
/// piecewise-cubic treatment near the axis where plain quadrature degrades.
cd cauchy_offaxis(const DensitySamples& rho, cd z);

struct SokhotskiPair {
  cd plus;
  cd minus;
};

/// Boundary values of the Cauchy transform from above/below:
/// plus - minus == rho(lambda) exactly (shared PV term).
SokhotskiPair sokhotski_pair(const DensitySamples& rho, double lambda);

/// Matrix-valued density samples (entrywise machinery).
struct MatrixDensity {
  SpectralGrid grid;
  std::vector<Eigen::MatrixXcd> values;
  double tail_exponent = 2.0;
  Parity parity = Parity::none;
};

struct MatrixSokhotskiPair {
  Eigen::MatrixXcd plus;
  Eigen::MatrixXcd minus;
};

MatrixSokhotskiPair matrix_sokhotski(const MatrixDensity& rho, double lambda);

/// Debug aid: writes the subtracted PV integrand at the sample nodes as CSV
/// (t, re, im) to the stream.
void pv_debug_dump(const DensitySamples& rho, double lambda, std::ostream& out);

}  // namespace scatter

#endif
