#include "presets.hpp"

#include <cmath>

#include "incscat/error.hpp"
#include "incscat/mie.hpp"

namespace incscat::cli {

SolverOptions RunConfig::solver() const {
  SolverOptions s;
  s.rel_tol = tol;
  s.method = method;
  return s;
}

void RunConfig::validate() const {
  if (nx == 0 || ny == 0) throw InvalidArgument("--grid: dimensions must be positive");
  if (!(cell > 0.0) || !std::isfinite(cell)) throw InvalidArgument("--cell must be positive");
  if (!(freq > 0.0) || !std::isfinite(freq)) throw InvalidArgument("--freq must be positive");
  if (!(ring_radius > 0.0) || !std::isfinite(ring_radius)) throw InvalidArgument("--ring-radius must be positive");
  if (ring_count == 0) throw InvalidArgument("--ring-count must be positive");
  if (!std::isfinite(angle)) throw InvalidArgument("--angle must be finite");
  if (!(tol > 0.0 && tol < 1.0)) throw InvalidArgument("--tol must lie in (0, 1)");
  if (jobs == 0) throw InvalidArgument("--jobs must be positive");
  solver().validate();
}

Scenario make_scenario(const std::string& name, const RunConfig& cfg) {
  const Grid2D grid = cfg.grid();
  RandomSplitTrial t = [&] {
    if (name == "single-cell") return make_block_split_trial(grid, cfg.seed, 1, 1, 0.5, false);
    if (name == "block5") return make_block_split_trial(grid, cfg.seed, 5, 5, 0.5, false);
    if (name == "random-split") return make_random_split_trial(grid, cfg.seed, 1.0);
    if (name == "m1") {
      if (grid.size() != 1) throw InvalidArgument("preset m1 needs a 1 x 1 grid");
      return make_block_split_trial(grid, cfg.seed, 1, 1, 2.0, false);
    }
    throw InvalidArgument("unknown preset '" + name + "'");
  }();
  if (name != "random-split") t.wave = cfg.wave();
  return {std::move(t.split), std::move(t.chi_p2), t.wave, "preset:" + name};
}

Scenario scenario_from_sample(const SampleRecord& s) {
  return {SplitProfile(s.chi_p1, s.mask_p2), s.chi_p2, s.incidence, "sample:" + s.id};
}

ContrastMap make_contrast_preset(const std::string& name, const RunConfig& cfg) {
  const Grid2D grid = cfg.grid();
  if (name == "zero") return ContrastMap(grid);
  if (name == "mie-cylinder") return cylinder_contrast(grid, MieCylinder{});
  if (name == "random-split") {
    const auto t = make_random_split_trial(grid, cfg.seed, 1.0);
    return compose_full_contrast(t.split, t.chi_p2);
  }
  if (name == "digits") {
    DatasetConfig d = dataset_config(cfg);
    const ShapeSource src = ShapeSource::procedural();
    Rng rng(splitmix64(cfg.seed));
    const auto shapes = src.draw(rng);
    Rng crng(cfg.seed);
    CVector chi = CVector::Zero(static_cast<Eigen::Index>(grid.size()));
    for (int k = 0; k < 4; ++k) {
      const Mask occ = rasterize_shape(shapes[k], grid, grid_quadrant(grid, k), d.threshold);
      const cplx c{uniform(crng, d.re_range.lo, d.re_range.hi), uniform(crng, d.im_range.lo, d.im_range.hi)};
      for (std::size_t m = 0; m < grid.size(); ++m)
        if (occ[m]) chi[static_cast<Eigen::Index>(m)] = c;
    }
    return ContrastMap(grid, std::move(chi));
  }
  throw InvalidArgument("unknown contrast preset '" + name + "'");
}

DatasetConfig dataset_config(const RunConfig& cfg) {
  DatasetConfig d;
  d.nx = cfg.nx;
  d.ny = cfg.ny;
  d.cell = cfg.cell;
  d.frequency_hz = cfg.freq;
  d.ring_radius = cfg.ring_radius;
  d.ring_count = cfg.ring_count;
  d.incidence_deg = cfg.angle;
  d.solver = cfg.solver();
  d.global_seed = cfg.seed;
  return d;
}

RunConfig with_dataset_geometry(RunConfig cfg, const DatasetConfig& d) {
  if (d.center.x != 0.0 || d.center.y != 0.0) throw InvalidArgument("datasets with an off-origin grid are not supported here");
  cfg.nx = d.nx;
  cfg.ny = d.ny;
  cfg.cell = d.cell;
  cfg.freq = d.frequency_hz;
  cfg.ring_radius = d.ring_radius;
  cfg.ring_count = d.ring_count;
  cfg.angle = d.incidence_deg;
  return cfg;
}

}  // namespace incscat::cli
