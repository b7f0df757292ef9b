// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include "incscat/dataset.hpp"
#include "incscat/greens.hpp"
#include "incscat/metrics.hpp"
#include "incscat/mie.hpp"
#include "incscat/random.hpp"
#include "incscat/retrieval.hpp"
#include "incscat/split.hpp"
#include "incscat/vsf.hpp"

using namespace incscat;
namespace fs = std::filesystem;

namespace {

const PhysicsConfig kPhys(1e9);

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SolverOptions tight(double tol) {
  SolverOptions o;
  o.rel_tol = tol;
  return o;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome mie_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid2D g(64, 64, 0.01, 0.01);
  const ReceiverRing ring(5.0, 32);
  const MieCylinder cyl{0.15, 1.5, {}};
  const GreensVolumeOperator gd(g, kPhys);
  const GreensSurfaceMatrix gs(g, ring, kPhys);
  const ContrastMap chi = cylinder_contrast(g, cyl);
  const FieldVector e = solve_total_field_or_throw(gd, chi, incident_field(g, kPhys, {}), tight(1e-10));
  std::vector<Point2> pts;
  for (std::size_t s = 0; s < ring.count(); ++s) pts.push_back(ring.position(s));
  const double err = relative_error(scattered_field(gs, chi, e).values, mie_scattered_field(cyl, kPhys, {}, pts));
  const double t = seconds_since(t0);
  return {err <= 0.03 && t <= 10.0, fmt("relative L2 error %.3e (limit 3e-2), %.2f s (limit 10 s)", err, t)};
}

Outcome split_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid2D g(16, 16, 0.01, 0.01);
  const GreensVolumeOperator gd(g, kPhys);
  const GreensSurfaceMatrix gs(g, ReceiverRing(5.0, 32), kPhys);
  double field = 0.0, data = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const RandomSplitTrial t = make_random_split_trial(g, seed);
    const auto c =
        check_split_identities(t.split, t.chi_p2, gd, gs, incident_field(g, kPhys, t.wave), tight(1e-13));
    field = std::max(field, c.field_deviation);
    data = std::max(data, c.data_deviation);
  }
  const double t = seconds_since(t0);
  return {field <= 1e-8 && data <= 1e-9 && t <= 60.0,
          fmt("50 trials, worst field %.2e (limit 1e-8), worst data %.2e (limit 1e-9), %.1f s", field, data, t)};
}

Outcome single_cell_estimator() {
  const Grid2D g(1, 1, 0.01, 0.01);
  const GreensVolumeOperator gd(g, kPhys);
  const GreensSurfaceMatrix gs(g, ReceiverRing(5.0, 8), kPhys);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const RandomSplitTrial t = make_block_split_trial(g, seed, 1, 1, 2.0, true);
    const FieldVector einc = incident_field(g, kPhys, t.wave);
    const ContrastMap full = compose_full_contrast(t.split, t.chi_p2);
    const FieldVector esca = scattered_field(gs, full, solve_total_field_or_throw(gd, full, einc, tight(1e-14)));
    const FieldVector e_p1 = known_part_field(t.split, gd, einc);
    const CMatrix a = materialize_A(t.split, gd, {}, MaterializePath::dense_lu);
    const Chi2Estimate est = estimate_chi_p2(t.split, esca, e_p1, gs, a, gd, einc);
    worst = std::max(worst, relative_error(est.chi_p2.values(), t.chi_p2.values()));
  }
  return {worst <= 1e-6, fmt("100 cases, worst RE %.2e (limit 1e-6)", worst)};
}

Outcome fft_vs_dense() {
  double worst = 0.0;
  Rng rng(2024);
  for (std::size_t ny = 1; ny <= 16; ++ny) {
    for (std::size_t nx = 1; nx <= 16; ++nx) {
      const Grid2D g(nx, ny, 0.01, 0.01);
      const GreensVolumeOperator gd(g, kPhys);
      const CMatrix dense = assemble_dense_volume(g, kPhys);
      for (int v = 0; v < 100; ++v) {
        CVector x(static_cast<Eigen::Index>(g.size()));
        for (auto& c : x) c = {uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
        worst = std::max(worst, relative_error(gd.apply(x), dense * x));
      }
    }
  }
  return {worst <= 1e-10, fmt("256 grids x 100 vectors, worst %.2e (limit 1e-10)", worst)};
}

Outcome adjoint_gradient() {
  const Grid2D g(8, 8, 0.01, 0.01);
  const GreensVolumeOperator gd(g, kPhys);
  const GreensSurfaceMatrix gs(g, ReceiverRing(5.0, 32), kPhys);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t b = 1 + seed % 3;
    const RandomSplitTrial t = make_block_split_trial(g, seed, b, b, 1.0, true);
    const FieldVector einc = incident_field(g, kPhys, t.wave);
    const ContrastMap full = compose_full_contrast(t.split, t.chi_p2);
    const FieldVector esca = scattered_field(gs, full, solve_total_field_or_throw(gd, full, einc, tight(1e-14)));
    const MisfitProblem f(t.split, gs, gd, einc, esca, 0.01, tight(1e-14));
    const ContrastMap x(g, t.chi_p2.values() * 0.6);
    const CVector grad = f.gradient(x);
    const double h = 1e-6;
    CVector fd = CVector::Zero(grad.size());
    for (std::size_t m = 0; m < g.size(); ++m) {
      if (!t.split.mask_p2()[m]) continue;
      for (const cplx dir : {cplx{1.0, 0.0}, cplx{0.0, 1.0}}) {
        ContrastMap xp = x, xm = x;
        xp.values()[static_cast<Eigen::Index>(m)] += h * dir;
        xm.values()[static_cast<Eigen::Index>(m)] -= h * dir;
        fd[static_cast<Eigen::Index>(m)] += 0.5 * dir * (f.value(xp) - f.value(xm)) / (2.0 * h);
      }
    }
    worst = std::max(worst, relative_error(fd, grad));
  }
  return {worst <= 1e-6, fmt("20 instances, worst relative deviation %.2e (limit 1e-6)", worst)};
}

Outcome inversion() {
  const Grid2D g(16, 16, 0.01, 0.01);
  const GreensVolumeOperator gd(g, kPhys);
  const GreensSurfaceMatrix gs(g, ReceiverRing(5.0, 32), kPhys);
  auto run = [&](std::size_t block, std::uint64_t seed) {
    const RandomSplitTrial t = make_block_split_trial(g, seed, block, block, 0.5, false);
    const FieldVector einc = incident_field(g, kPhys, t.wave);
    const ContrastMap full = compose_full_contrast(t.split, t.chi_p2);
    const FieldVector esca = scattered_field(gs, full, solve_total_field_or_throw(gd, full, einc, tight(1e-13)));
    const MisfitProblem f(t.split, gs, gd, einc, esca, 0.0, tight(1e-12));
    InversionOptions o;
    o.solver = tight(1e-12);
    const InversionResult r = invert_chi_p2(f, o);
    return std::pair{r, t};
  };
  const auto [block, tb] = run(5, 11);
  const double reduction = block.trace.objective.front() / block.trace.objective.back();
  const auto [cell, tc] = run(1, 12);
  const double re = relative_error(cell.chi_p2.values(), tc.chi_p2.values());
  return {reduction >= 1e3 && re <= 1e-3,
          fmt("5x5 block misfit reduced %.2e x (limit 1e3), single-cell RE %.2e (limit 1e-3)", reduction, re)};
}

Outcome dataset_reproducibility() {
  const fs::path root = fs::temp_directory_path() / ("incscat_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  DatasetConfig cfg;
  cfg.global_seed = 7;
  GenerationOptions o;
  o.count = 4;
  o.spot_check_fraction = 1.0;
  generate_dataset(cfg, ShapeSource::procedural(), root / "a", o);
  o.jobs = 2;
  generate_dataset(cfg, ShapeSource::procedural(), root / "b", o);
  bool identical = true;
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path other = root / "b" / fs::relative(e.path(), root / "a");
    identical = identical && fs::exists(other) && read_file_bytes(e.path()) == read_file_bytes(other);
  }
  const Dataset d = read_dataset(root / "a");
  const SampleGenerator gen(d.manifest.config);
  double worst = 0.0;
  for (const auto& s : d.samples) worst = std::max(worst, resimulation_error(gen, s));
  fs::remove_all(root);
  return {identical && files > 0 && worst <= 1e-9,
          std::string(identical ? "bitwise identical" : "DIFFERENT") + fmt(" over %.0f files, worst re-simulation %.2e (limit 1e-9)", static_cast<double>(files), worst)};
}

Outcome born_consistency() {
  const Grid2D g(64, 64, 0.01, 0.01);
  const GreensVolumeOperator gd(g, kPhys);
  const ContrastMap chi = cylinder_contrast(g, MieCylinder{0.15, 1.005, {}});
  const FieldVector einc = incident_field(g, kPhys, {});
  const FieldVector e = solve_total_field_or_throw(gd, chi, einc, tight(1e-13));
  const CVector born = einc.values + gd.apply(CVector(chi.values().cwiseProduct(einc.values)));
  const double res = (e.values - born).norm() / e.values.norm();
  return {res <= 5e-4, fmt("first-order residual %.2e (limit 5e-4)", res)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"mie-oracle", mie_oracle},
      {"split-identities", split_identities},
      {"single-cell-estimator", single_cell_estimator},
      {"fft-vs-dense", fft_vs_dense},
      {"adjoint-gradient", adjoint_gradient},
      {"inversion", inversion},
      {"dataset-reproducibility", dataset_reproducibility},
      {"born-consistency", born_consistency},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    std::printf("%s %-24s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
