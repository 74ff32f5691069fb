#include <CLI11.hpp>
#include <iostream>

#include "scatter/io.hpp"

namespace {

void apply_overrides(scatter::RunConfig* cfg, const std::string& out_dir,
                     const std::vector<std::string>& tols, int grid_points,
                     double lambda_max) {
  if (!out_dir.empty()) cfg->out_dir = out_dir;
  if (grid_points > 0) cfg->grid_points = grid_points;
  if (lambda_max > 0.0) cfg->lambda_max = lambda_max;
  for (const std::string& kv : tols) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw scatter::Error(scatter::Errc::parse, "--tol expects KEY=VAL, got '" + kv + "'");
    cfg->tol[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
}

int run(const std::string& workflow, const std::string& config_path,
        const std::string& out_dir, const std::vector<std::string>& tols,
        int grid_points, double lambda_max) {
  scatter::RunConfig cfg = scatter::load_config_file(config_path);
  cfg.workflow = workflow;
  apply_overrides(&cfg, out_dir, tols, grid_points, lambda_max);
  for (const auto& note : cfg.notes) std::cerr << "warning: " << note << "\n";
  return scatter::run_workflow(cfg, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forward and inverse scattering for finite-rank non-local potentials"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> tols;
  int grid_points = 0;
  double lambda_max = 0.0;

  const char* names[] = {"forward", "invert", "roundtrip", "boundstates", "verify"};
  const char* descs[] = {
      "scattering function, multipliers and identity report",
      "reconstruct the perturbation from phase data (data_file/side_file)",
      "forward then inverse; reports recovery errors",
      "bound-state table",
      "full identity and recovery check suite",
  };
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--tol", tols, "tolerance override KEY=VAL (repeatable)");
    sub->add_option("--grid-points", grid_points, "grid sample count override");
    sub->add_option("--lambda-max", lambda_max, "grid span override");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (int i = 0; i < 5; ++i)
      if (app.get_subcommand(names[i])->parsed())
        return run(names[i], config_path, out_dir, tols, grid_points, lambda_max);
  } catch (const scatter::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
