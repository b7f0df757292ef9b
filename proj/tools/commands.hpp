#pragma once

#include <optional>
#include <string>
#include <vector>

#include "presets.hpp"

namespace incscat::cli {

// Exit codes: 0 ok, 1 usage or I/O error, 2 numerical failure (a solve did
// not converge or a checked tolerance was exceeded).
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

inline constexpr int kSchemaVersion = 1;

struct ForwardArgs {
  std::string chi_file;
  std::string preset = "mie-cylinder";
  bool heatmap = false;
};

struct MieArgs {
  double radius = 0.15;
  double eps_r = 1.5;
  int subsamples = 16;
  double threshold = 0.03;
};

struct SplitCheckArgs {
  std::size_t trials = 50;
  double field_tol = 1e-8;
  double data_tol = 1e-9;
  bool corrupt = false;
};

// Scenario source shared by estimate-chi2 and invert.
struct ScenarioArgs {
  std::string preset = "single-cell";
  std::string dataset;
  std::string sample;
};

struct EstimateArgs {
  ScenarioArgs scenario;
  double pinv_threshold = 1e-12;
};

struct InvertArgs {
  ScenarioArgs scenario;
  std::string init = "zero";
  std::size_t max_iters = 500;
  double grad_tol = 1e-8;
  double lambda = 0.0;
  std::vector<double> bounds;  // re_min re_max im_min im_max
  double noise = 0.0;          // relative complex Gaussian noise on the data
};

struct GenArgs {
  std::size_t count = 1;
  std::string shapes_dir;
  double threshold = 0.5;
  std::size_t max_attempts = 8;
  double spot_check = 0.05;
};

struct MetricsArgs {
  std::string pred;
  std::string labels;
};

struct ExportArgs {
  std::string dataset;
};

int cmd_forward(const RunConfig& cfg, const ForwardArgs& args);
int cmd_mie_check(const RunConfig& cfg, const MieArgs& args);
int cmd_split_check(const RunConfig& cfg, const SplitCheckArgs& args);
int cmd_estimate(const RunConfig& cfg, const EstimateArgs& args);
int cmd_invert(const RunConfig& cfg, const InvertArgs& args);
int cmd_gen_dataset(const RunConfig& cfg, const GenArgs& args);
int cmd_eval_metrics(const RunConfig& cfg, const MetricsArgs& args);
int cmd_export_operators(const RunConfig& cfg, const ExportArgs& args);

}  // namespace incscat::cli
