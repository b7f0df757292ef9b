#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "incscat/error.hpp"

using namespace incscat::cli;

namespace {

// Common flags. grid_default overrides the 64 x 64 default for commands that
// materialize dense operators.
void add_common(CLI::App* app, RunConfig& cfg, std::size_t grid_default = 64, double tol_default = 1e-10) {
  cfg.nx = cfg.ny = grid_default;
  cfg.tol = tol_default;
  app->add_option_function<std::vector<std::size_t>>(
         "--grid", [&cfg](const std::vector<std::size_t>& v) { cfg.nx = v[0]; cfg.ny = v[1]; },
         "Cells along x and y")
      ->expected(2)
      ->type_name("NX NY")
      ->default_str(std::to_string(grid_default) + " " + std::to_string(grid_default));
  app->add_option("--cell", cfg.cell, "Square cell side in m")->capture_default_str();
  app->add_option("--freq", cfg.freq, "Frequency in Hz")->capture_default_str();
  app->add_option("--ring-radius", cfg.ring_radius, "Receiver ring radius in m")->capture_default_str();
  app->add_option("--ring-count", cfg.ring_count, "Number of receivers")->capture_default_str();
  app->add_option("--angle", cfg.angle, "Incidence angle in degrees")->capture_default_str();
  app->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app->add_option("--tol", cfg.tol, "Relative Krylov tolerance")->capture_default_str();
  app->add_option("--solver", cfg.method, "Krylov method")
      ->check(CLI::IsMember({"gmres", "bicgstab"}))
      ->capture_default_str();
  app->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  app->add_option("--jobs", cfg.jobs, "Parallel samples or trials")->capture_default_str();
}

void add_scenario(CLI::App* app, ScenarioArgs& s) {
  app->add_option("--preset", s.preset, "Built-in scenario (m1 forces a 1 x 1 grid)")
      ->check(CLI::IsMember({"single-cell", "block5", "random-split", "m1"}))
      ->capture_default_str();
  app->add_option("--dataset", s.dataset, "Read the scenario from a dataset directory");
  app->add_option("--sample", s.sample, "Sample id within --dataset (default: first)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incscat: 2-D TM volume-integral scattering with split contrast profiles"};
  app.require_subcommand(1);

  RunConfig cfg_forward, cfg_mie, cfg_split, cfg_est, cfg_inv, cfg_gen, cfg_metrics, cfg_export;
  ForwardArgs forward;
  MieArgs mie;
  SplitCheckArgs split;
  EstimateArgs est;
  InvertArgs inv;
  GenArgs gen;
  MetricsArgs metrics;
  ExportArgs exp;

  auto* c_forward = app.add_subcommand("forward", "Solve the state equation and write E_tot and E_sca");
  add_common(c_forward, cfg_forward);
  c_forward->add_option("--chi", forward.chi_file, "Full contrast as a grid .vsf file");
  c_forward->add_option("--preset", forward.preset, "Built-in contrast when --chi is absent")
      ->check(CLI::IsMember({"zero", "mie-cylinder", "random-split", "digits"}))
      ->capture_default_str();
  c_forward->add_flag("--heatmap", forward.heatmap, "Also write |E_tot| as etot.pgm");

  auto* c_mie = app.add_subcommand("mie-check", "Compare the solver with the analytic cylinder series");
  add_common(c_mie, cfg_mie);
  c_mie->add_option("--radius", mie.radius, "Cylinder radius in m")->capture_default_str();
  c_mie->add_option("--eps-r", mie.eps_r, "Relative permittivity")->capture_default_str();
  c_mie->add_option("--subsamples", mie.subsamples, "Sub-cell samples per axis for area weighting")
      ->capture_default_str();
  c_mie->add_option("--threshold", mie.threshold, "Pass threshold on the relative L2 error")->capture_default_str();

  auto* c_split = app.add_subcommand("split-check", "Verify the split-profile identities on random trials");
  add_common(c_split, cfg_split, 16);
  c_split->add_option("--trials", split.trials, "Number of random trials")->capture_default_str();
  c_split->add_option("--field-tol", split.field_tol, "Threshold on the field deviation")->capture_default_str();
  c_split->add_option("--data-tol", split.data_tol, "Threshold on the data deviation")->capture_default_str();
  c_split->add_flag("--corrupt", split.corrupt, "Perturb the unknown contrast on the split path only");

  auto* c_est = app.add_subcommand("estimate-chi2", "Closed-form estimate of the unknown contrast");
  add_common(c_est, cfg_est, 16);
  add_scenario(c_est, est.scenario);
  c_est->add_option("--pinv-threshold", est.pinv_threshold, "Relative singular-value cutoff")->capture_default_str();

  auto* c_inv = app.add_subcommand("invert", "Gradient-based retrieval of the unknown contrast");
  add_common(c_inv, cfg_inv, 16);
  add_scenario(c_inv, inv.scenario);
  c_inv->add_option("--init", inv.init, "Initial guess")
      ->check(CLI::IsMember({"zero", "estimate"}))
      ->capture_default_str();
  c_inv->add_option("--max-iters", inv.max_iters, "Outer iterations")->capture_default_str();
  c_inv->add_option("--grad-tol", inv.grad_tol, "Stop when ||g|| / ||g0|| falls below this")->capture_default_str();
  c_inv->add_option("--lambda", inv.lambda, "Tikhonov weight")->capture_default_str();
  c_inv->add_option("--bounds", inv.bounds, "Box on the contrast")->expected(4)->type_name("RE_MIN RE_MAX IM_MIN IM_MAX");
  c_inv->add_option("--noise", inv.noise, "Relative complex Gaussian noise added to the data")->capture_default_str();

  auto* c_gen = app.add_subcommand("gen-dataset", "Generate digit-scatterer samples");
  add_common(c_gen, cfg_gen, 64, 1e-11);
  c_gen->add_option("--count", gen.count, "Number of samples")->capture_default_str();
  c_gen->add_option("--shapes", gen.shapes_dir, "Directory of .pgm rasters (default: procedural digits)");
  c_gen->add_option("--threshold", gen.threshold, "Raster occupancy threshold")->capture_default_str();
  c_gen->add_option("--max-attempts", gen.max_attempts, "Attempts per sample before giving up")->capture_default_str();
  c_gen->add_option("--spot-check", gen.spot_check, "Fraction of samples re-simulated")->capture_default_str();

  auto* c_metrics = app.add_subcommand("eval-metrics", "Relative errors of predictions against a labelled dataset");
  add_common(c_metrics, cfg_metrics);
  c_metrics->add_option("--pred", metrics.pred, "Prediction directory (samples/<id>/*.vsf)")->required();
  c_metrics->add_option("--labels", metrics.labels, "Labelled dataset directory")->required();

  auto* c_export = app.add_subcommand("export-operators", "Write G_S as operators/gs.vsf");
  add_common(c_export, cfg_export);
  c_export->add_option("--dataset", exp.dataset, "Take the geometry from a dataset manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*c_forward) return cmd_forward(cfg_forward, forward);
    if (*c_mie) return cmd_mie_check(cfg_mie, mie);
    if (*c_split) return cmd_split_check(cfg_split, split);
    if (*c_est) return cmd_estimate(cfg_est, est);
    if (*c_inv) return cmd_invert(cfg_inv, inv);
    if (*c_gen) return cmd_gen_dataset(cfg_gen, gen);
    if (*c_metrics) return cmd_eval_metrics(cfg_metrics, metrics);
    if (*c_export) return cmd_export_operators(cfg_export, exp);
  } catch (const incscat::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
