#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include <unistd.h>
#include <set>

#include "incscat/dataset.hpp"
#include "incscat/error.hpp"
#include "incscat/vsf.hpp"

using namespace incscat;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("incscat_ds_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

DatasetConfig small_config() {
  DatasetConfig c;
  c.nx = c.ny = 16;
  c.global_seed = 42;
  return c;
}

std::vector<SampleRecord> make_samples(const DatasetConfig& c, std::size_t n) {
  const SampleGenerator gen(c);
  const ShapeSource src = ShapeSource::procedural();
  std::vector<SampleRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t seed = sample_seed(c.global_seed, i);
    Rng rng(seed);
    out.push_back(gen.generate(src.draw(rng), seed, sample_id(i)));
  }
  return out;
}

void flip_byte(const fs::path& p, std::size_t offset) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char c;
  f.get(c);
  f.seekp(static_cast<std::streamoff>(offset));
  f.put(static_cast<char>(c ^ 0x5a));
}

// Asymptotic Kolmogorov distribution with Stephens' small-sample correction.
double ks_uniform_pvalue(std::vector<double> x, double lo, double hi) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = (x[i] - lo) / (hi - lo);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST_CASE("default configuration shapes") {
  const DatasetConfig c;
  CHECK(c.nx * c.cell == doctest::Approx(0.64));
  const SampleGenerator gen(c);
  const SampleRecord s = gen.generate(
      [] {
        Rng r(1);
        return ShapeSource::procedural().draw(r);
      }(),
      1, "x");
  CHECK(s.esca0.size() == 32);
  CHECK(s.etot.size() == 4096);
}

TEST_CASE("sample generation is deterministic and self-consistent") {
  const DatasetConfig c = small_config();
  const auto a = make_samples(c, 3);
  const auto b = make_samples(c, 3);
  const SampleGenerator gen(c);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(bitwise_equal(a[i], b[i]));
    CHECK(resimulation_error(gen, a[i]) <= 1e-9);
    // Supports of the four shapes are disjoint and chi_p1 vanishes on the mask.
    for (std::size_t m = 0; m < gen.grid().size(); ++m)
      if (a[i].mask_p2[m]) CHECK(a[i].chi_p1[m] == cplx{});
    const SplitProfile split(a[i].chi_p1, a[i].mask_p2);
    CHECK(split.unknown_count() > 0);
  }
}

TEST_CASE("contrast draws cover the configured ranges") {
  DatasetConfig c = small_config();
  const SampleGenerator gen(c);
  const ShapeSource src = ShapeSource::procedural();
  std::vector<double> re, im;
  for (std::size_t i = 0; re.size() < 1000; ++i) {
    const std::uint64_t seed = sample_seed(7, i);
    Rng rng(seed);
    std::optional<SampleRecord> s;
    try {
      s.emplace(gen.generate(src.draw(rng), seed, sample_id(i)));
    } catch (const InvalidArgument&) {
      continue;  // a shape vanished at this resolution; generation rejects it too
    }
    std::set<std::pair<double, double>> vals;
    for (std::size_t m = 0; m < gen.grid().size(); ++m) {
      const cplx v = s->chi_p1[m] + s->chi_p2[m];
      if (v != cplx{}) vals.insert({v.real(), v.imag()});
    }
    CHECK(vals.size() == 4);
    for (const auto& [r, j] : vals) {
      re.push_back(r);
      im.push_back(j);
    }
  }
  CHECK(*std::min_element(re.begin(), re.end()) >= 0.1);
  CHECK(*std::max_element(re.begin(), re.end()) <= 1.0);
  CHECK(ks_uniform_pvalue(re, 0.1, 1.0) > 0.01);
  CHECK(ks_uniform_pvalue(im, 0.0, 1.0) > 0.01);
}

TEST_CASE("dataset round trips bitwise") {
  const DatasetConfig c = small_config();
  const fs::path dir = scratch("rt");
  const auto samples = make_samples(c, 3);
  write_dataset(samples, c, dir);
  const Dataset d = read_dataset(dir);
  REQUIRE(d.samples.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(bitwise_equal(d.samples[i], samples[i]));
  CHECK(d.manifest.config.global_seed == 42);
  for (const auto& e : d.manifest.samples)
    for (const auto& [name, f] : e.files) CHECK(fs::file_size(dir / "samples" / e.id / (name + ".vsf")) == f.bytes);
  fs::remove_all(dir);

  const fs::path empty = scratch("empty");
  write_dataset({}, c, empty);
  CHECK(read_dataset(empty).samples.empty());
  fs::remove_all(empty);
}

TEST_CASE("corruption, truncation and version mismatch are detected") {
  const DatasetConfig c = small_config();
  const fs::path dir = scratch("bad");
  write_dataset(make_samples(c, 1), c, dir);
  const fs::path etot = dir / "samples" / sample_id(0) / "etot.vsf";

  flip_byte(etot, 100);
  CHECK_THROWS_AS(read_dataset(dir), ChecksumError);
  flip_byte(etot, 100);
  CHECK_NOTHROW(read_dataset(dir));

  fs::resize_file(etot, fs::file_size(etot) - 8);
  CHECK_THROWS_AS(read_dataset(dir), FormatError);

  std::string text;
  {
    std::ifstream f(dir / "manifest.json");
    text.assign(std::istreambuf_iterator<char>(f), {});
  }
  const auto pos = text.find("\"format_version\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 19, "\"format_version\": 9");
  CHECK_THROWS_AS(manifest_from_json(text), FormatError);
  CHECK_THROWS_AS(manifest_from_json("{not json"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("generation resumes and is independent of the job count") {
  const DatasetConfig c = small_config();
  const fs::path a = scratch("gen_a");
  const fs::path b = scratch("gen_b");
  GenerationOptions o;
  o.count = 2;
  o.spot_check_fraction = 1.0;
  GenerationReport r = generate_dataset(c, ShapeSource::procedural(), a, o);
  CHECK(r.generated == 2);
  CHECK(r.spot_checked == 2);
  CHECK(r.worst_resimulation <= 1e-9);
  o.count = 4;
  r = generate_dataset(c, ShapeSource::procedural(), a, o);
  CHECK(r.skipped_existing == 2);
  CHECK(r.generated == 2);

  o.jobs = 3;
  generate_dataset(c, ShapeSource::procedural(), b, o);
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    CHECK(read_file_bytes(e.path()) == read_file_bytes(b / rel));
  }

  // A damaged sample is regenerated on the next run.
  flip_byte(a / "samples" / sample_id(1) / "chi_p2.vsf", 20);
  r = generate_dataset(c, ShapeSource::procedural(), a, o);
  CHECK(r.generated == 1);
  CHECK_NOTHROW(read_dataset(a));

  DatasetConfig other = c;
  other.frequency_hz = 2e9;
  CHECK_THROWS_AS(generate_dataset(other, ShapeSource::procedural(), a, o), InvalidArgument);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("raster pools draw four distinct shapes") {
  std::vector<RasterShape> pool;
  for (int k = 0; k < 6; ++k) pool.push_back({2, 2, {k / 10.0, 1.0, 1.0, 1.0}});
  const ShapeSource src = ShapeSource::from_rasters(pool);
  Rng rng(3);
  const auto shapes = src.draw(rng);
  std::set<double> first;
  for (const auto& s : shapes) first.insert(s.gray[0]);
  CHECK(first.size() == 4);
  CHECK_THROWS_AS(ShapeSource::from_rasters({pool[0], pool[1], pool[2]}), InvalidArgument);
}

TEST_CASE("exported surface operator reads back") {
  const DatasetConfig c = small_config();
  const fs::path dir = scratch("ops");
  const SampleGenerator gen(c);
  const fs::path p = export_surface_operator(gen.gs(), dir);
  const VsfArray a = read_vsf(p);
  CHECK(a.dims[0] == 32);
  CHECK(a.dims[1] == 256);
  CHECK(to_matrix(a) == gen.gs().entries());
  fs::remove_all(dir);
}
