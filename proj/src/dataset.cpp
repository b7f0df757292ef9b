#include "incscat/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <algorithm>

#include <zlib.h>

#include <json.hpp>
#include "incscat/error.hpp"
#include "incscat/vsf.hpp"

namespace incscat {

namespace fs = std::filesystem;
using nlohmann::json;

void DatasetConfig::validate() const {
  if (nx < 2 || ny < 2) throw InvalidArgument("dataset grid must be at least 2x2");
  if (!(cell > 0.0) || !std::isfinite(cell)) throw InvalidArgument("cell size must be positive");
  if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz)) throw InvalidArgument("frequency must be positive");
  if (!(ring_radius > 0.0) || ring_count == 0) throw InvalidArgument("receiver ring needs a positive radius and count");
  if (!std::isfinite(incidence_deg)) throw InvalidArgument("incidence angle must be finite");
  if (!(re_range.lo <= re_range.hi) || !(im_range.lo <= im_range.hi)) throw InvalidArgument("empty contrast range");
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("raster threshold must lie in (0, 1)");
  solver.validate();
}

namespace {

bool same_bits(const CVector& a, const CVector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(cplx) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

bool bitwise_equal(const SampleRecord& a, const SampleRecord& b) {
  return a.id == b.id && a.seed == b.seed && a.p2_index == b.p2_index &&
         std::memcmp(&a.incidence, &b.incidence, sizeof(IncidentWave)) == 0 && a.mask_p2 == b.mask_p2 &&
         a.chi_p1.grid() == b.chi_p1.grid() && same_bits(a.chi_p1.values(), b.chi_p1.values()) &&
         same_bits(a.chi_p2.values(), b.chi_p2.values()) && a.esca0.domain == b.esca0.domain &&
         same_bits(a.esca0.values, b.esca0.values) && same_bits(a.e_p1.values, b.e_p1.values) &&
         same_bits(a.etot.values, b.etot.values);
}

SampleGenerator::SampleGenerator(DatasetConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      grid_(cfg_.grid()),
      phys_(cfg_.phys()),
      gd_(grid_, phys_),
      gs_(grid_, cfg_.ring(), phys_),
      einc_(incident_field(grid_, phys_, cfg_.wave())) {}

SampleRecord SampleGenerator::generate(const std::array<RasterShape, 4>& shapes, std::uint64_t seed,
                                       std::string id) const {
  Rng rng(seed);
  std::array<Mask, 4> occ;
  std::array<cplx, 4> contrast;
  for (int k = 0; k < 4; ++k) {
    occ[k] = rasterize_shape(shapes[k], grid_, grid_quadrant(grid_, k), cfg_.threshold);
    if (std::find(occ[k].begin(), occ[k].end(), true) == occ[k].end())
      throw InvalidArgument("shape " + std::to_string(k) + " occupies no cells at this grid size");
    contrast[k] = {uniform(rng, cfg_.re_range.lo, cfg_.re_range.hi), uniform(rng, cfg_.im_range.lo, cfg_.im_range.hi)};
  }
  const int p2 = static_cast<int>(uniform_index(rng, 4));

  CVector x1 = CVector::Zero(static_cast<Eigen::Index>(grid_.size()));
  CVector x2 = x1;
  for (int k = 0; k < 4; ++k)
    for (std::size_t m = 0; m < grid_.size(); ++m)
      if (occ[k][m]) (k == p2 ? x2 : x1)[static_cast<Eigen::Index>(m)] = contrast[k];

  SampleRecord s{std::move(id), seed, p2, cfg_.wave(), ContrastMap(grid_, std::move(x1)), occ[p2],
                 ContrastMap(grid_, std::move(x2)), {}, {}, {}};
  const SplitProfile split(s.chi_p1, s.mask_p2);
  const ContrastMap full = compose_full_contrast(split, s.chi_p2);
  s.e_p1 = solve_total_field_or_throw(gd_, s.chi_p1, einc_, cfg_.solver);
  s.etot = solve_total_field_or_throw(gd_, full, einc_, cfg_.solver);
  s.esca0 = scattered_field(gs_, full, s.etot);
  return s;
}

SampleRecord generate_sample(const std::array<RasterShape, 4>& shapes, std::uint64_t seed, const DatasetConfig& cfg) {
  return SampleGenerator(cfg).generate(shapes, seed, sample_id(0));
}

double resimulation_error(const SampleGenerator& gen, const SampleRecord& s) {
  const SplitProfile split(s.chi_p1, s.mask_p2);
  const ContrastMap full = compose_full_contrast(split, s.chi_p2);
  SolverOptions opts = gen.config().solver;
  opts.method = "bicgstab";
  opts.rel_tol = std::min(opts.rel_tol, 1e-12);
  const FieldVector e = solve_total_field_or_throw(gen.gd(), full, gen.einc(), opts);
  const CVector pred = scattered_field(gen.gs(), full, e).values;
  const double n = norm2(s.esca0.values);
  return n == 0.0 ? norm2(pred) : norm2(pred - s.esca0.values) / n;
}

ShapeSource ShapeSource::procedural(std::size_t canvas) {
  ShapeSource s;
  s.canvas_ = canvas;
  return s;
}

ShapeSource ShapeSource::from_rasters(std::vector<RasterShape> rasters) {
  if (rasters.size() < 4) throw InvalidArgument("need at least four rasters to draw distinct shapes");
  for (const auto& r : rasters) r.validate();
  ShapeSource s;
  s.rasters_ = std::move(rasters);
  return s;
}

std::array<RasterShape, 4> ShapeSource::draw(Rng& rng) const {
  std::array<RasterShape, 4> out;
  if (rasters_.empty()) {
    for (auto& r : out) r = procedural_digit(rng, canvas_);
    return out;
  }
  // Four distinct pool entries (partial Fisher-Yates).
  std::vector<std::size_t> idx(rasters_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t k = 0; k < 4; ++k) {
    std::swap(idx[k], idx[k + uniform_index(rng, idx.size() - k)]);
    out[k] = rasters_[idx[k]];
  }
  return out;
}

std::string sample_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", index);
  return buf;
}

std::uint64_t sample_seed(std::uint64_t global_seed, std::size_t index, std::size_t attempt) {
  std::uint64_t s = splitmix64(global_seed ^ splitmix64(static_cast<std::uint64_t>(index)));
  for (std::size_t a = 0; a < attempt; ++a) s = splitmix64(s);
  return s;
}

std::uint32_t crc32_of(const std::vector<unsigned char>& bytes) {
  uLong c = crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    c = crc32(c, bytes.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(c);
}

namespace {

json config_to_json(const DatasetConfig& c) {
  return {
      {"grid", {{"nx", c.nx}, {"ny", c.ny}, {"cell", c.cell}, {"center", {c.center.x, c.center.y}}}},
      {"physics", {{"frequency_hz", c.frequency_hz}}},
      {"ring", {{"radius", c.ring_radius}, {"count", c.ring_count}, {"start_angle_deg", 0.0}}},
      {"incidences_deg", {c.incidence_deg}},
      {"contrast_ranges", {{"re", {c.re_range.lo, c.re_range.hi}}, {"im", {c.im_range.lo, c.im_range.hi}}}},
      {"raster_threshold", c.threshold},
      {"solver", {{"method", c.solver.method}, {"rel_tol", c.solver.rel_tol}, {"max_iters", c.solver.max_iters},
                  {"restart", c.solver.restart}}},
      {"global_seed", c.global_seed},
  };
}

DatasetConfig config_from_json(const json& j) {
  DatasetConfig c;
  c.nx = j.at("grid").at("nx").get<std::size_t>();
  c.ny = j.at("grid").at("ny").get<std::size_t>();
  c.cell = j.at("grid").at("cell").get<double>();
  c.center = {j.at("grid").at("center").at(0).get<double>(), j.at("grid").at("center").at(1).get<double>()};
  c.frequency_hz = j.at("physics").at("frequency_hz").get<double>();
  c.ring_radius = j.at("ring").at("radius").get<double>();
  c.ring_count = j.at("ring").at("count").get<std::size_t>();
  const auto& inc = j.at("incidences_deg");
  if (inc.size() != 1) throw FormatError("manifest: exactly one incidence angle is supported");
  c.incidence_deg = inc.at(0).get<double>();
  c.re_range = {j.at("contrast_ranges").at("re").at(0).get<double>(), j.at("contrast_ranges").at("re").at(1).get<double>()};
  c.im_range = {j.at("contrast_ranges").at("im").at(0).get<double>(), j.at("contrast_ranges").at("im").at(1).get<double>()};
  c.threshold = j.at("raster_threshold").get<double>();
  c.solver.method = j.at("solver").at("method").get<std::string>();
  c.solver.rel_tol = j.at("solver").at("rel_tol").get<double>();
  c.solver.max_iters = j.at("solver").at("max_iters").get<std::size_t>();
  c.solver.restart = j.at("solver").at("restart").get<std::size_t>();
  c.global_seed = j.at("global_seed").get<std::uint64_t>();
  return c;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot create " + tmp.string());
    out << text;
    if (!out) throw FormatError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

const fs::path kManifestName = "manifest.json";

fs::path sample_dir(const fs::path& dir, const std::string& id) { return dir / "samples" / id; }

std::vector<VsfArray> sample_arrays(const SampleRecord& s) {
  const Grid2D& g = s.chi_p1.grid();
  return {VsfArray::on_grid(g, s.chi_p1.values()), VsfArray::mask(g, s.mask_p2), VsfArray::on_grid(g, s.chi_p2.values()),
          VsfArray::vector(s.esca0.values),        VsfArray::on_grid(g, s.e_p1.values), VsfArray::on_grid(g, s.etot.values)};
}

ManifestSample write_sample(const fs::path& dir, const SampleRecord& s) {
  const fs::path sd = sample_dir(dir, s.id);
  fs::create_directories(sd);
  ManifestSample e{s.id, s.seed, s.p2_index, s.incidence.angle_deg,
                   SplitProfile(s.chi_p1, s.mask_p2).unknown_count(), {}};
  const auto arrays = sample_arrays(s);
  for (std::size_t k = 0; k < arrays.size(); ++k) {
    const auto bytes = encode_vsf(arrays[k]);
    const fs::path p = sd / (std::string(kSampleArrays[k]) + ".vsf");
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot create " + p.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed: " + p.string());
    e.files.emplace_back(kSampleArrays[k], FileEntry{bytes.size(), crc32_of(bytes)});
  }
  return e;
}

std::vector<unsigned char> checked_bytes(const fs::path& p, const FileEntry& f) {
  if (!fs::exists(p)) throw FormatError("missing file " + p.string());
  auto bytes = read_file_bytes(p);
  if (bytes.size() != f.bytes)
    throw FormatError(p.string() + ": expected " + std::to_string(f.bytes) + " bytes, found " +
                      std::to_string(bytes.size()));
  if (crc32_of(bytes) != f.crc32) throw ChecksumError(p.string() + ": checksum mismatch");
  return bytes;
}

bool sample_intact(const fs::path& dir, const ManifestSample& e) {
  try {
    for (const auto& [name, f] : e.files) checked_bytes(sample_dir(dir, e.id) / (name + ".vsf"), f);
    return e.files.size() == std::size(kSampleArrays);
  } catch (const FormatError&) {
    return false;
  }
}

}  // namespace

std::string manifest_to_json(const DatasetManifest& m) {
  json samples = json::array();
  for (const auto& s : m.samples) {
    json files = json::object();
    for (const auto& [name, f] : s.files) files[name] = {{"bytes", f.bytes}, {"crc32", f.crc32}};
    samples.push_back({{"id", s.id},
                       {"seed", s.seed},
                       {"p2_index", s.p2_index},
                       {"incidence_deg", s.incidence_deg},
                       {"unknown_cells", s.unknown_cells},
                       {"files", files}});
  }
  const json j = {{"format", "incscat-dataset"},
                  {"format_version", m.format_version},
                  {"config", config_to_json(m.config)},
                  {"shape_source", m.shape_source},
                  {"array_layout", {{"grid", "dims {ny, nx}, x fastest"}, {"receivers", "dims {n_s, 1}"}}},
                  {"samples", samples}};
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  try {
    DatasetManifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kDatasetFormatVersion)
      throw FormatError("manifest: unsupported format version " + std::to_string(m.format_version));
    m.config = config_from_json(j.at("config"));
    m.shape_source = j.value("shape_source", "procedural");
    for (const auto& s : j.at("samples")) {
      ManifestSample e;
      e.id = s.at("id").get<std::string>();
      e.seed = s.at("seed").get<std::uint64_t>();
      e.p2_index = s.at("p2_index").get<int>();
      e.incidence_deg = s.at("incidence_deg").get<double>();
      e.unknown_cells = s.at("unknown_cells").get<std::size_t>();
      for (const char* name : kSampleArrays) {
        const auto& f = s.at("files").at(name);
        e.files.emplace_back(name, FileEntry{f.at("bytes").get<std::uint64_t>(), f.at("crc32").get<std::uint32_t>()});
      }
      m.samples.push_back(std::move(e));
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

DatasetManifest write_dataset(const std::vector<SampleRecord>& samples, const DatasetConfig& cfg, const fs::path& dir,
                              const std::string& shape_source) {
  cfg.validate();
  fs::create_directories(dir / "samples");
  DatasetManifest m{kDatasetFormatVersion, cfg, shape_source, {}};
  for (const auto& s : samples) {
    if (!(s.chi_p1.grid() == cfg.grid())) throw InvalidArgument("write_dataset: sample grid differs from config");
    m.samples.push_back(write_sample(dir, s));
  }
  write_text_atomic(dir / kManifestName, manifest_to_json(m));
  return m;
}

DatasetManifest read_manifest(const fs::path& dir) {
  const auto bytes = read_file_bytes(dir / kManifestName);
  return manifest_from_json(std::string(bytes.begin(), bytes.end()));
}

SampleRecord read_sample(const fs::path& dir, const DatasetManifest& m, const ManifestSample& e) {
  const Grid2D grid = m.config.grid();
  std::map<std::string, VsfArray> arrays;
  for (const auto& [name, f] : e.files) {
    const fs::path p = sample_dir(dir, e.id) / (name + ".vsf");
    arrays.emplace(name, decode_vsf(checked_bytes(p, f), p.string()));
  }
  const std::string at = "sample " + e.id;
  SampleRecord s{e.id,
                 e.seed,
                 e.p2_index,
                 IncidentWave{e.incidence_deg, {1.0, 0.0}},
                 ContrastMap(grid, expect_grid(arrays.at("chi_p1"), grid, at + " chi_p1")),
                 expect_mask(arrays.at("mask_p2"), grid, at + " mask_p2"),
                 ContrastMap(grid, expect_grid(arrays.at("chi_p2"), grid, at + " chi_p2")),
                 {expect_vector(arrays.at("esca0"), m.config.ring_count, at + " esca0"), FieldDomain::receivers},
                 {expect_grid(arrays.at("ep1"), grid, at + " ep1"), FieldDomain::grid},
                 {expect_grid(arrays.at("etot"), grid, at + " etot"), FieldDomain::grid}};
  return s;
}

Dataset read_dataset(const fs::path& dir) {
  Dataset d{read_manifest(dir), {}};
  for (const auto& e : d.manifest.samples) d.samples.push_back(read_sample(dir, d.manifest, e));
  return d;
}

GenerationReport generate_dataset(const DatasetConfig& cfg, const ShapeSource& shapes, const fs::path& dir,
                                  const GenerationOptions& opts, const std::string& shape_source_label) {
  cfg.validate();
  if (opts.max_attempts == 0) throw InvalidArgument("max_attempts must be at least 1");
  if (opts.jobs == 0) throw InvalidArgument("jobs must be at least 1");
  auto log = [&](const std::string& msg) {
    if (opts.log) opts.log(msg);
  };
  fs::create_directories(dir / "samples");

  DatasetManifest m{kDatasetFormatVersion, cfg, shape_source_label, {}};
  std::map<std::string, ManifestSample> kept;
  if (fs::exists(dir / kManifestName)) {
    const DatasetManifest old = read_manifest(dir);
    if (config_to_json(old.config) != config_to_json(cfg) || old.shape_source != shape_source_label)
      throw InvalidArgument("existing dataset in " + dir.string() + " was generated with a different configuration");
    for (const auto& e : old.samples)
      if (sample_intact(dir, e)) kept.emplace(e.id, e);
  }

  const SampleGenerator gen(cfg);
  const std::size_t stride = opts.spot_check_fraction > 0.0
                                 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(1.0 / opts.spot_check_fraction)))
                                 : 0;
  GenerationReport rep;
  auto flush = [&] {
    DatasetManifest out = m;
    for (const auto& [id, e] : kept) out.samples.push_back(e);
    std::sort(out.samples.begin(), out.samples.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    write_text_atomic(dir / kManifestName, manifest_to_json(out));
  };

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < opts.count; ++i) {
    if (kept.count(sample_id(i))) {
      ++rep.skipped_existing;
    } else {
      todo.push_back(i);
    }
  }
  if (rep.skipped_existing) log("resuming: " + std::to_string(rep.skipped_existing) + " samples already present");

  struct Outcome {
    std::optional<SampleRecord> sample;
    std::vector<std::string> messages;
    std::size_t rejected = 0;
  };
  for (std::size_t b = 0; b < todo.size(); b += opts.jobs) {
    const std::size_t n = std::min(opts.jobs, todo.size() - b);
    std::vector<Outcome> out(n);
#pragma omp parallel for num_threads(static_cast<int>(n)) schedule(dynamic)
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t index = todo[b + t];
      for (std::size_t a = 0; a < opts.max_attempts && !out[t].sample; ++a) {
        const std::uint64_t seed = sample_seed(cfg.global_seed, index, a);
        Rng shape_rng(splitmix64(seed ^ 0x5348415045ull));
        try {
          out[t].sample = gen.generate(shapes.draw(shape_rng), seed, sample_id(index));
        } catch (const ConvergenceError& e) {
          ++out[t].rejected;
          out[t].messages.push_back("sample " + sample_id(index) + " rejected (seed " + std::to_string(seed) +
                                    "): " + e.what());
        } catch (const InvalidArgument& e) {
          ++out[t].rejected;
          out[t].messages.push_back("sample " + sample_id(index) + " rejected (seed " + std::to_string(seed) +
                                    "): " + e.what());
        }
      }
    }
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t index = todo[b + t];
      for (const auto& msg : out[t].messages) log(msg);
      rep.rejected += out[t].rejected;
      if (!out[t].sample) {
        ++rep.failed;
        log("sample " + sample_id(index) + " failed after " + std::to_string(opts.max_attempts) + " attempts");
        continue;
      }
      const SampleRecord& s = *out[t].sample;
      if (stride && index % stride == 0) {
        const double err = resimulation_error(gen, s);
        ++rep.spot_checked;
        rep.worst_resimulation = std::max(rep.worst_resimulation, err);
        if (!(err <= opts.spot_check_tol)) {
          ++rep.failed;
          log("sample " + s.id + " failed the label consistency check: " + std::to_string(err));
          continue;
        }
      }
      kept.emplace(s.id, write_sample(dir, s));
      ++rep.generated;
      flush();
      log("sample " + s.id + " written (" + std::to_string(kept.size()) + "/" + std::to_string(opts.count) + ")");
    }
  }
  flush();
  return rep;
}

fs::path export_surface_operator(const GreensSurfaceMatrix& gs, const fs::path& dir) {
  fs::create_directories(dir / "operators");
  const fs::path p = dir / "operators" / "gs.vsf";
  write_vsf(p, VsfArray::matrix(gs.entries()));
  return p;
}

}  // namespace incscat
