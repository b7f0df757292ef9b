#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "incscat/dataset.hpp"
#include "incscat/split.hpp"

namespace incscat::cli {

// Flags shared by every subcommand, with the default experiment's values.
struct RunConfig {
  std::size_t nx = 64;
  std::size_t ny = 64;
  double cell = 0.01;
  double freq = 1e9;
  double ring_radius = 5.0;
  std::size_t ring_count = 32;
  double angle = 0.0;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  std::string method = "gmres";
  std::string out = ".";
  std::size_t jobs = 1;

  Grid2D grid() const { return {nx, ny, cell, cell}; }
  PhysicsConfig phys() const { return PhysicsConfig(freq); }
  ReceiverRing ring() const { return {ring_radius, ring_count}; }
  IncidentWave wave() const { return {angle, {1.0, 0.0}}; }
  SolverOptions solver() const;
  void validate() const;
};

// Known/unknown scenario with its ground truth and simulated data.
struct Scenario {
  SplitProfile split;
  ContrastMap chi_p2;  // truth
  IncidentWave wave;
  std::string source;
};

// "single-cell": one unknown cell, |chi| <= 0.5, known cells around it.
// "block5": a 5 x 5 unknown block, |chi| <= 0.5.
// "random-split": random block up to a third of each side, |chi| <= 1.
// "m1": single-cell domain whose one cell is unknown, |chi| <= 2.
Scenario make_scenario(const std::string& name, const RunConfig& cfg);
Scenario scenario_from_sample(const SampleRecord& s);

// Full-contrast presets for the forward command: "zero", "mie-cylinder",
// "random-split", "digits".
ContrastMap make_contrast_preset(const std::string& name, const RunConfig& cfg);

DatasetConfig dataset_config(const RunConfig& cfg);
// Grid, physics and ring taken from a dataset manifest.
RunConfig with_dataset_geometry(RunConfig cfg, const DatasetConfig& d);

}  // namespace incscat::cli
