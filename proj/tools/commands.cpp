#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "incscat/error.hpp"
#include "incscat/metrics.hpp"
#include "incscat/mie.hpp"
#include "incscat/retrieval.hpp"
#include "incscat/vsf.hpp"

namespace incscat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

json header(const std::string& command) {
  return {{"schema", "incscat." + command}, {"schema_version", kSchemaVersion}};
}

json geometry_json(const RunConfig& cfg) {
  return {{"grid", {cfg.nx, cfg.ny}},  {"cell", cfg.cell},       {"frequency_hz", cfg.freq},
          {"ring_radius", cfg.ring_radius}, {"ring_count", cfg.ring_count}, {"seed", cfg.seed},
          {"tol", cfg.tol},             {"method", cfg.method}};
}

void emit(const RunConfig& cfg, const std::string& file, const json& j) {
  fs::create_directories(cfg.out);
  const fs::path p = fs::path(cfg.out) / file;
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw FormatError("cannot create " + p.string());
  out << j.dump(2) << "\n";
  if (!out) throw FormatError("write failed: " + p.string());
  std::cout << j.dump(2) << "\n";
}

double relative_or_abs(const CVector& a, const CVector& b) {
  const double nb = norm2(b);
  return nb == 0.0 ? norm2(a - b) : norm2(a - b) / nb;
}

struct LoadedScenario {
  RunConfig cfg;
  Scenario scenario;
  std::optional<FieldVector> esca0;  // measured data when read from a dataset
};

LoadedScenario load_scenario(const RunConfig& cfg, const ScenarioArgs& a) {
  if (a.dataset.empty()) {
    if (!a.sample.empty()) throw InvalidArgument("--sample requires --dataset");
    RunConfig c = cfg;
    if (a.preset == "m1") c.nx = c.ny = 1;
    return {c, make_scenario(a.preset, c), std::nullopt};
  }
  const DatasetManifest m = read_manifest(a.dataset);
  if (m.samples.empty()) throw InvalidArgument("dataset " + a.dataset + " has no samples");
  const std::string id = a.sample.empty() ? m.samples.front().id : a.sample;
  const auto it = std::find_if(m.samples.begin(), m.samples.end(), [&](const auto& e) { return e.id == id; });
  if (it == m.samples.end()) throw InvalidArgument("sample '" + id + "' not in " + a.dataset);
  const SampleRecord s = read_sample(a.dataset, m, *it);
  return {with_dataset_geometry(cfg, m.config), scenario_from_sample(s), s.esca0};
}

FieldVector simulate_data(const GreensVolumeOperator& gd, const GreensSurfaceMatrix& gs, const Scenario& sc,
                          const FieldVector& einc, const SolverOptions& opts) {
  const ContrastMap full = compose_full_contrast(sc.split, sc.chi_p2);
  return scattered_field(gs, full, solve_total_field_or_throw(gd, full, einc, opts));
}

// Relative error of the masked estimate against the truth, or the absolute
// error norm when the truth is zero.
double masked_error(const ContrastMap& est, const Scenario& sc) {
  const ContrastMap e = restrict_to_mask(est, sc.split.mask_p2());
  return relative_or_abs(e.values(), sc.chi_p2.values());
}

}  // namespace

int cmd_forward(const RunConfig& cfg, const ForwardArgs& args) {
  cfg.validate();
  const Grid2D grid = cfg.grid();
  const ContrastMap chi = args.chi_file.empty()
                              ? make_contrast_preset(args.preset, cfg)
                              : ContrastMap(grid, expect_grid(read_vsf(args.chi_file), grid, args.chi_file));
  const auto t0 = Clock::now();
  const GreensVolumeOperator gd(grid, cfg.phys());
  const GreensSurfaceMatrix gs(grid, cfg.ring(), cfg.phys());
  const double t_assembly = seconds_since(t0);
  const FieldVector einc = incident_field(grid, cfg.phys(), cfg.wave());
  const auto t1 = Clock::now();
  const TotalField sol = solve_total_field(gd, chi, einc, cfg.solver());
  const double t_solve = seconds_since(t1);
  const FieldVector esca = scattered_field(gs, chi, sol.field);

  fs::create_directories(cfg.out);
  write_vsf(fs::path(cfg.out) / "etot.vsf", VsfArray::on_grid(grid, sol.field.values));
  write_vsf(fs::path(cfg.out) / "esca.vsf", VsfArray::vector(esca.values));
  if (args.heatmap) write_heatmap_pgm(fs::path(cfg.out) / "etot.pgm", grid, sol.field.values);

  json j = header("forward");
  j["geometry"] = geometry_json(cfg);
  j["angle_deg"] = cfg.angle;
  j["contrast"] = args.chi_file.empty() ? "preset:" + args.preset : args.chi_file;
  j["converged"] = sol.report.converged;
  j["iterations"] = sol.report.iterations;
  j["final_rel_residual"] = sol.report.final_rel_residual;
  j["state_residual"] = state_residual(gd, chi, sol.field, einc);
  j["esca_norm"] = norm2(esca.values);
  if (args.chi_file.empty() && args.preset == "mie-cylinder") {
    std::vector<Point2> pts(cfg.ring_count);
    for (std::size_t s = 0; s < pts.size(); ++s) pts[s] = cfg.ring().position(s);
    const CVector ref = mie_scattered_field(MieCylinder{}, cfg.phys(), cfg.wave(), pts);
    j["mie_relative_error"] = relative_error(esca.values, ref);
  }
  j["timings_s"] = {{"assembly", t_assembly}, {"solve", t_solve}};
  emit(cfg, "forward.json", j);
  return sol.report.converged ? kExitOk : kExitNumerical;
}

int cmd_mie_check(const RunConfig& cfg, const MieArgs& args) {
  cfg.validate();
  if (!(args.radius > 0.0) || !(args.eps_r > 0.0) || args.subsamples < 1 || !(args.threshold > 0.0))
    throw InvalidArgument("mie-check: radius, eps-r, subsamples and threshold must be positive");
  const auto t0 = Clock::now();
  const Grid2D grid = cfg.grid();
  const MieCylinder cyl{args.radius, args.eps_r, {}};
  if (args.radius > 0.5 * std::min(grid.xmax() - grid.xmin(), grid.ymax() - grid.ymin()))
    throw InvalidArgument("mie-check: cylinder does not fit the grid");
  const GreensVolumeOperator gd(grid, cfg.phys());
  const GreensSurfaceMatrix gs(grid, cfg.ring(), cfg.phys());
  const ContrastMap chi = cylinder_contrast(grid, cyl, args.subsamples);
  const TotalField sol = solve_total_field(gd, chi, incident_field(grid, cfg.phys(), cfg.wave()), cfg.solver());
  const CVector esca = scattered_field(gs, chi, sol.field).values;
  std::vector<Point2> pts(cfg.ring_count);
  for (std::size_t s = 0; s < pts.size(); ++s) pts[s] = cfg.ring().position(s);
  const CVector ref = mie_scattered_field(cyl, cfg.phys(), cfg.wave(), pts);
  const double err = relative_error(esca, ref);
  const double elapsed = seconds_since(t0);

  json j = header("mie_check");
  j["geometry"] = geometry_json(cfg);
  j["cylinder"] = {{"radius", cyl.radius}, {"eps_r", cyl.eps_r}, {"subsamples", args.subsamples}};
  j["truncation_order"] = mie_truncation_order(cfg.phys().k0() * std::sqrt(cyl.eps_r) * cyl.radius);
  j["converged"] = sol.report.converged;
  j["iterations"] = sol.report.iterations;
  j["relative_error"] = err;
  j["threshold"] = args.threshold;
  j["pass"] = sol.report.converged && err <= args.threshold;
  j["timings_s"] = {{"total", elapsed}};
  emit(cfg, "mie_check.json", j);
  return j["pass"].get<bool>() ? kExitOk : kExitNumerical;
}

int cmd_split_check(const RunConfig& cfg, const SplitCheckArgs& args) {
  cfg.validate();
  if (args.trials == 0) throw InvalidArgument("--trials must be at least 1");
  if (!(args.field_tol > 0.0) || !(args.data_tol > 0.0)) throw InvalidArgument("tolerances must be positive");
  const auto t0 = Clock::now();
  const Grid2D grid = cfg.grid();
  const GreensVolumeOperator gd(grid, cfg.phys());
  const GreensSurfaceMatrix gs(grid, cfg.ring(), cfg.phys());
  const SolverOptions opts = cfg.solver();

  std::vector<SplitIdentityCheck> res(args.trials);
  std::vector<std::string> failure(args.trials);
  std::atomic<bool> diverged{false};
#pragma omp parallel for num_threads(static_cast<int>(cfg.jobs)) schedule(dynamic)
  for (std::size_t t = 0; t < args.trials; ++t) {
    try {
      const auto trial = make_random_split_trial(grid, cfg.seed + t, 1.0);
      const FieldVector einc = incident_field(grid, cfg.phys(), trial.wave);
      if (!args.corrupt) {
        res[t] = check_split_identities(trial.split, trial.chi_p2, gd, gs, einc, opts);
      } else {
        // The split path sees a perturbed unknown contrast; the direct path does not.
        const ContrastMap full = compose_full_contrast(trial.split, trial.chi_p2);
        const ContrastMap bad(grid, trial.chi_p2.values() * 1.001);
        const FieldVector e_full = solve_total_field_or_throw(gd, full, einc, opts);
        const FieldVector e_split{known_part_field(trial.split, gd, einc, opts).values +
                                      delta_total_field_nested(trial.split, bad, gd, einc, opts).values,
                                  FieldDomain::grid};
        res[t].field_deviation = relative_or_abs(e_split.values, e_full.values);
        res[t].data_deviation = relative_or_abs(scattered_field(gs, full, e_split).values,
                                                scattered_field(gs, full, e_full).values);
      }
    } catch (const ConvergenceError& e) {
      diverged = true;
      failure[t] = e.what();
    }
  }
  if (diverged) {
    for (const auto& f : failure)
      if (!f.empty()) throw ConvergenceError(f);
  }

  double max_field = 0.0;
  double max_data = 0.0;
  json trials = json::array();
  for (std::size_t t = 0; t < args.trials; ++t) {
    max_field = std::max(max_field, res[t].field_deviation);
    max_data = std::max(max_data, res[t].data_deviation);
    trials.push_back({{"seed", cfg.seed + t}, {"field", res[t].field_deviation}, {"data", res[t].data_deviation}});
  }
  const bool pass = max_field <= args.field_tol && max_data <= args.data_tol;
  json j = header("split_check");
  j["geometry"] = geometry_json(cfg);
  j["trials"] = args.trials;
  j["corrupted"] = args.corrupt;
  j["max_field_deviation"] = max_field;
  j["max_data_deviation"] = max_data;
  j["thresholds"] = {{"field", args.field_tol}, {"data", args.data_tol}};
  j["pass"] = pass;
  j["per_trial"] = trials;
  j["timings_s"] = {{"total", seconds_since(t0)}};
  emit(cfg, "split_check.json", j);
  return pass ? kExitOk : kExitNumerical;
}

int cmd_estimate(const RunConfig& cfg_in, const EstimateArgs& args) {
  cfg_in.validate();
  const LoadedScenario ls = load_scenario(cfg_in, args.scenario);
  const RunConfig& cfg = ls.cfg;
  const Scenario& sc = ls.scenario;
  const auto t0 = Clock::now();
  const Grid2D grid = cfg.grid();
  const GreensVolumeOperator gd(grid, cfg.phys());
  const GreensSurfaceMatrix gs(grid, cfg.ring(), cfg.phys());
  const SolverOptions opts = cfg.solver();
  const FieldVector einc = incident_field(grid, cfg.phys(), sc.wave);
  const FieldVector esca0 = ls.esca0 ? *ls.esca0 : simulate_data(gd, gs, sc, einc, opts);
  const FieldVector e_p1 = known_part_field(sc.split, gd, einc, opts);
  const MaterializePath path = grid.size() <= kDenseLuMaxCells ? MaterializePath::dense_lu : MaterializePath::columns;
  const CMatrix a = materialize_A(sc.split, gd, opts, path);
  const Chi2Estimate est = estimate_chi_p2(sc.split, esca0, e_p1, gs, a, gd, einc, args.pinv_threshold, opts);

  fs::create_directories(cfg.out);
  write_vsf(fs::path(cfg.out) / "chi_p2_hat.vsf", VsfArray::on_grid(grid, est.chi_p2.values()));
  json j = header("estimate");
  j["geometry"] = geometry_json(cfg);
  j["scenario"] = sc.source;
  j["unknown_cells"] = sc.split.unknown_count();
  j["relative_error"] = masked_error(est.chi_p2, sc);
  j["offdiag_energy_ratio"] = est.diagnostics.offdiag_energy_ratio;
  j["data_residual"] = est.diagnostics.data_residual;
  j["regularized"] = est.diagnostics.regularized;
  j["timings_s"] = {{"total", seconds_since(t0)}};
  emit(cfg, "estimate.json", j);
  return kExitOk;
}

int cmd_invert(const RunConfig& cfg_in, const InvertArgs& args) {
  cfg_in.validate();
  if (args.init != "zero" && args.init != "estimate") throw InvalidArgument("--init must be 'zero' or 'estimate'");
  if (!args.bounds.empty() && args.bounds.size() != 4) throw InvalidArgument("--bounds takes RE_MIN RE_MAX IM_MIN IM_MAX");
  if (!(args.noise >= 0.0)) throw InvalidArgument("--noise must be non-negative");
  const LoadedScenario ls = load_scenario(cfg_in, args.scenario);
  const RunConfig& cfg = ls.cfg;
  const Scenario& sc = ls.scenario;
  const auto t0 = Clock::now();
  const Grid2D grid = cfg.grid();
  const GreensVolumeOperator gd(grid, cfg.phys());
  const GreensSurfaceMatrix gs(grid, cfg.ring(), cfg.phys());
  const SolverOptions opts = cfg.solver();
  const FieldVector einc = incident_field(grid, cfg.phys(), sc.wave);
  FieldVector esca0 = ls.esca0 ? *ls.esca0 : simulate_data(gd, gs, sc, einc, opts);
  if (args.noise > 0.0) {
    Rng rng(splitmix64(cfg.seed ^ 0x4e4f495345ull));
    const double sigma = args.noise * norm2(esca0.values) / std::sqrt(2.0 * static_cast<double>(esca0.size()));
    for (auto& v : esca0.values) v += sigma * cplx{standard_normal(rng), standard_normal(rng)};
  }

  InversionOptions io;
  io.max_outer_iters = args.max_iters;
  io.grad_tol = args.grad_tol;
  io.tikhonov_lambda = args.lambda;
  io.solver = opts;
  if (!args.bounds.empty()) io.bounds = ContrastBox{args.bounds[0], args.bounds[1], args.bounds[2], args.bounds[3]};
  io.validate();
  const MisfitProblem problem(sc.split, gs, gd, einc, esca0, args.lambda, opts);
  const InversionResult r =
      invert_chi_p2(problem, io, args.init == "zero" ? InversionInit::zero : InversionInit::closed_form_estimate);

  fs::create_directories(cfg.out);
  write_vsf(fs::path(cfg.out) / "chi_p2.vsf", VsfArray::on_grid(grid, r.chi_p2.values()));
  const auto& obj = r.trace.objective;
  json j = header("invert");
  j["geometry"] = geometry_json(cfg);
  j["scenario"] = sc.source;
  j["init"] = args.init;
  j["noise"] = args.noise;
  j["unknown_cells"] = sc.split.unknown_count();
  j["iterations"] = r.trace.iterations;
  j["converged"] = r.trace.converged;
  j["stop_reason"] = r.trace.stop_reason;
  j["initial_objective"] = obj.front();
  j["final_objective"] = obj.back();
  j["misfit_reduction"] = obj.back() > 0.0 ? obj.front() / obj.back() : INFINITY;
  j["relative_error"] = masked_error(r.chi_p2, sc);
  j["objective_trace"] = obj;
  j["timings_s"] = {{"total", seconds_since(t0)}};
  emit(cfg, "invert.json", j);
  return kExitOk;
}

int cmd_gen_dataset(const RunConfig& cfg, const GenArgs& args) {
  cfg.validate();
  if (args.count == 0) throw InvalidArgument("--count must be at least 1");
  DatasetConfig d = dataset_config(cfg);
  d.threshold = args.threshold;
  d.validate();

  std::string label = "procedural";
  ShapeSource source = ShapeSource::procedural();
  if (!args.shapes_dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(args.shapes_dir))
      if (e.is_regular_file() && (e.path().extension() == ".pgm" || e.path().extension() == ".PGM"))
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<RasterShape> rasters;
    for (const auto& f : files) {
      try {
        rasters.push_back(read_pgm(f));
      } catch (const FormatError& e) {
        std::cerr << "warning: skipping unreadable raster " << f.string() << ": " << e.what() << "\n";
      }
    }
    if (rasters.size() < 4)
      throw InvalidArgument("need at least four readable rasters in " + args.shapes_dir + ", found " +
                            std::to_string(rasters.size()));
    source = ShapeSource::from_rasters(std::move(rasters));
    label = "pgm:" + std::to_string(source.pool_size());
  }

  GenerationOptions go;
  go.count = args.count;
  go.max_attempts = args.max_attempts;
  go.spot_check_fraction = args.spot_check;
  go.jobs = cfg.jobs;
  go.log = [](const std::string& msg) { std::cerr << msg << "\n"; };
  const auto t0 = Clock::now();
  const GenerationReport rep = generate_dataset(d, source, cfg.out, go, label);

  json j = header("gen_dataset");
  j["geometry"] = geometry_json(cfg);
  j["shape_source"] = label;
  j["requested"] = args.count;
  j["generated"] = rep.generated;
  j["skipped_existing"] = rep.skipped_existing;
  j["rejected_attempts"] = rep.rejected;
  j["failed"] = rep.failed;
  j["spot_checked"] = rep.spot_checked;
  j["worst_resimulation_error"] = rep.worst_resimulation;
  // Kept out of the report so the dataset directory stays reproducible.
  std::cerr << "elapsed " << seconds_since(t0) << " s\n";
  emit(cfg, "gen_dataset.json", j);
  return rep.failed == 0 ? kExitOk : kExitNumerical;
}

int cmd_eval_metrics(const RunConfig& cfg, const MetricsArgs& args) {
  if (args.pred.empty() || args.labels.empty()) throw InvalidArgument("eval-metrics needs --pred and --labels");
  const Dataset labels = read_dataset(args.labels);
  if (labels.samples.empty()) throw InvalidArgument("label dataset has no samples");
  const DatasetConfig& dc = labels.manifest.config;
  const Grid2D grid = dc.grid();
  std::optional<GreensSurfaceMatrix> gs;

  std::vector<double> re_chi, re_etot, re_esca;
  json per = json::array();
  for (const auto& s : labels.samples) {
    const fs::path pd = fs::path(args.pred) / "samples" / s.id;
    const SplitProfile split(s.chi_p1, s.mask_p2);
    const ContrastMap chi2_pred(grid, expect_grid(read_vsf(pd / "chi_p2.vsf"), grid, s.id + " chi_p2"));
    const ContrastMap chi_pred = compose_full_contrast(split, chi2_pred);
    const ContrastMap chi_label = compose_full_contrast(split, s.chi_p2);
    const CVector etot_pred = expect_grid(read_vsf(pd / "etot.vsf"), grid, s.id + " etot");
    CVector esca_pred;
    if (fs::exists(pd / "esca0.vsf")) {
      esca_pred = expect_vector(read_vsf(pd / "esca0.vsf"), dc.ring_count, s.id + " esca0");
    } else {
      if (!gs) gs.emplace(grid, dc.ring(), dc.phys());
      esca_pred = scattered_field(*gs, chi_pred, {etot_pred, FieldDomain::grid}).values;
    }
    re_chi.push_back(relative_error(chi_pred.values(), chi_label.values()));
    re_etot.push_back(relative_error(etot_pred, s.etot.values));
    re_esca.push_back(relative_error(esca_pred, s.esca0.values));
    per.push_back({{"id", s.id}, {"chi", re_chi.back()}, {"etot", re_etot.back()}, {"esca", re_esca.back()}});
  }
  auto summary = [](const std::vector<double>& v) {
    const ErrorSummary e = summarize_relative_errors(v);
    return json{{"mean", e.mean}, {"sum", e.sum}, {"mean_percent", 100.0 * e.mean}};
  };
  json j = header("metrics");
  j["labels"] = args.labels;
  j["pred"] = args.pred;
  j["count"] = labels.samples.size();
  j["mre"] = {{"chi", summary(re_chi)}, {"etot", summary(re_etot)}, {"esca", summary(re_esca)}};
  j["per_sample"] = per;
  emit(cfg, "metrics.json", j);
  return kExitOk;
}

int cmd_export_operators(const RunConfig& cfg_in, const ExportArgs& args) {
  cfg_in.validate();
  const RunConfig cfg = args.dataset.empty() ? cfg_in : with_dataset_geometry(cfg_in, read_manifest(args.dataset).config);
  const GreensSurfaceMatrix gs(cfg.grid(), cfg.ring(), cfg.phys());
  const fs::path p = export_surface_operator(gs, cfg.out);
  const auto bytes = read_file_bytes(p);
  json j = header("operators");
  j["geometry"] = geometry_json(cfg);
  j["file"] = "operators/gs.vsf";
  j["dims"] = {gs.entries().rows(), gs.entries().cols()};
  j["bytes"] = bytes.size();
  j["crc32"] = crc32_of(bytes);
  j["column_order"] = "cell m = j * nx + i";
  emit(cfg, "operators/gs.json", j);
  return kExitOk;
}

}  // namespace incscat::cli
