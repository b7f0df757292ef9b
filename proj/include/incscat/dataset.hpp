#pragma once

// Synthetic training samples: four digit-like scatterers, one per quadrant,
// each with a constant random contrast. Three form the known profile and
// one, picked by the sample's rng, is the unknown part.
//
// On disk:
//   manifest.json
//   samples/<id>/{chi_p1, mask_p2, chi_p2, esca0, ep1, etot}.vsf
//   operators/gs.vsf                 (optional)
// The manifest records byte count and CRC-32 of every sample file.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "incscat/forward.hpp"
#include "incscat/raster.hpp"

namespace incscat {

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr const char* kSampleArrays[] = {"chi_p1", "mask_p2", "chi_p2", "esca0", "ep1", "etot"};

struct ValueRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct DatasetConfig {
  std::size_t nx = 64;
  std::size_t ny = 64;
  double cell = 0.01;  // m, square cells
  Point2 center{};
  double frequency_hz = 1e9;
  double ring_radius = 5.0;
  std::size_t ring_count = 32;
  double incidence_deg = 0.0;
  ValueRange re_range{0.10, 1.00};
  ValueRange im_range{0.00, 1.00};
  double threshold = 0.5;
  SolverOptions solver{1e-11, 2000, "gmres", 80};
  std::uint64_t global_seed = 1;

  Grid2D grid() const { return {nx, ny, cell, cell, center}; }
  PhysicsConfig phys() const { return PhysicsConfig(frequency_hz); }
  ReceiverRing ring() const { return {ring_radius, ring_count, center}; }
  IncidentWave wave() const { return {incidence_deg, {1.0, 0.0}}; }
  void validate() const;
};

struct SampleRecord {
  std::string id;
  std::uint64_t seed = 0;
  int p2_index = 0;
  IncidentWave incidence;
  ContrastMap chi_p1;
  Mask mask_p2;
  ContrastMap chi_p2;
  FieldVector esca0;
  FieldVector e_p1;
  FieldVector etot;
};

bool bitwise_equal(const SampleRecord& a, const SampleRecord& b);

// Operators and incident field built once, shared by every sample.
class SampleGenerator {
 public:
  explicit SampleGenerator(DatasetConfig cfg);

  const DatasetConfig& config() const { return cfg_; }
  const Grid2D& grid() const { return grid_; }
  const GreensVolumeOperator& gd() const { return gd_; }
  const GreensSurfaceMatrix& gs() const { return gs_; }
  const FieldVector& einc() const { return einc_; }

  // Throws ConvergenceError when either forward solve fails.
  SampleRecord generate(const std::array<RasterShape, 4>& shapes, std::uint64_t seed, std::string id) const;

 private:
  DatasetConfig cfg_;
  Grid2D grid_;
  PhysicsConfig phys_;
  GreensVolumeOperator gd_;
  GreensSurfaceMatrix gs_;
  FieldVector einc_;
};

SampleRecord generate_sample(const std::array<RasterShape, 4>& shapes, std::uint64_t seed, const DatasetConfig& cfg);

// ||G_S chi E - esca0|| / ||esca0|| after re-solving the state equation from
// the stored full contrast with an independent Krylov method.
double resimulation_error(const SampleGenerator& gen, const SampleRecord& s);

// Where the four shapes of a sample come from.
class ShapeSource {
 public:
  static ShapeSource procedural(std::size_t canvas = 28);
  static ShapeSource from_rasters(std::vector<RasterShape> rasters);

  std::array<RasterShape, 4> draw(Rng& rng) const;
  std::size_t pool_size() const { return rasters_.size(); }

 private:
  std::size_t canvas_ = 28;
  std::vector<RasterShape> rasters_;
};

struct FileEntry {
  std::uint64_t bytes = 0;
  std::uint32_t crc32 = 0;
};

struct ManifestSample {
  std::string id;
  std::uint64_t seed = 0;
  int p2_index = 0;
  double incidence_deg = 0.0;
  std::size_t unknown_cells = 0;
  std::vector<std::pair<std::string, FileEntry>> files;  // in kSampleArrays order
};

struct DatasetManifest {
  int format_version = kDatasetFormatVersion;
  DatasetConfig config;
  std::string shape_source = "procedural";
  std::vector<ManifestSample> samples;
};

std::string sample_id(std::size_t index);
// Seed of attempt `attempt` for sample `index`; attempts > 0 follow rejections.
std::uint64_t sample_seed(std::uint64_t global_seed, std::size_t index, std::size_t attempt = 0);

std::uint32_t crc32_of(const std::vector<unsigned char>& bytes);

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);

// Writes every sample and the manifest. Existing sample files are replaced.
DatasetManifest write_dataset(const std::vector<SampleRecord>& samples, const DatasetConfig& cfg,
                              const std::filesystem::path& dir, const std::string& shape_source = "procedural");

struct Dataset {
  DatasetManifest manifest;
  std::vector<SampleRecord> samples;
};

// Verifies format version, byte counts and checksums before decoding.
Dataset read_dataset(const std::filesystem::path& dir);
DatasetManifest read_manifest(const std::filesystem::path& dir);
SampleRecord read_sample(const std::filesystem::path& dir, const DatasetManifest& m, const ManifestSample& entry);

struct GenerationOptions {
  std::size_t count = 1;
  std::size_t max_attempts = 8;  // per sample, counting the first
  double spot_check_fraction = 0.05;
  double spot_check_tol = 1e-9;
  std::size_t jobs = 1;
  std::function<void(const std::string&)> log;
};

struct GenerationReport {
  std::size_t generated = 0;
  std::size_t skipped_existing = 0;
  std::size_t rejected = 0;
  std::size_t failed = 0;
  std::size_t spot_checked = 0;
  double worst_resimulation = 0.0;
};

// Generates samples 0..count-1 into dir. Samples already listed in an
// existing manifest with intact files are kept; the manifest is rewritten
// after every sample so an interrupted run can resume.
GenerationReport generate_dataset(const DatasetConfig& cfg, const ShapeSource& shapes,
                                  const std::filesystem::path& dir, const GenerationOptions& opts,
                                  const std::string& shape_source_label = "procedural");

// Writes operators/gs.vsf (N_s x M) into dir.
std::filesystem::path export_surface_operator(const GreensSurfaceMatrix& gs, const std::filesystem::path& dir);

}  // namespace incscat
