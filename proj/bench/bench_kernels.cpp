// Serial reference kernels against their OpenMP counterparts.
//
//   ./bench_kernels --benchmark_filter=Bttb
//
// Arguments are the grid side n (n x n cells).

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "incscat/kernels.hpp"
#include "incscat/random.hpp"

using namespace incscat;
using namespace incscat::kernels;

namespace {

constexpr double kK0 = 2.0 * kPi / 0.3;  // 1 GHz
constexpr double kCell = 0.01;

Grid2D square_grid(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  return {n, n, kCell, kCell};
}

std::vector<cplx> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<cplx> v(n);
  for (auto& x : v) x = {uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
  return v;
}

std::vector<cplx> generator_for(const Grid2D& g) {
  std::vector<cplx> gen(generator_size(g.nx(), g.ny()));
  fill_generator_omp(make_disc_kernel(kK0, g.cell_area()), g, gen);
  return gen;
}

void BM_GeneratorSerial(benchmark::State& st) {
  const Grid2D g = square_grid(st);
  const auto k = make_disc_kernel(kK0, g.cell_area());
  std::vector<cplx> out(generator_size(g.nx(), g.ny()));
  for (auto _ : st) {
    fill_generator_serial(k, g, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_GeneratorOmp(benchmark::State& st) {
  const Grid2D g = square_grid(st);
  const auto k = make_disc_kernel(kK0, g.cell_area());
  std::vector<cplx> out(generator_size(g.nx(), g.ny()));
  for (auto _ : st) {
    fill_generator_omp(k, g, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void surface_inputs(const Grid2D& g, std::vector<Point2>& rx, std::vector<Point2>& cells) {
  rx.resize(32);
  for (std::size_t s = 0; s < rx.size(); ++s) {
    const double a = 2.0 * kPi * static_cast<double>(s) / static_cast<double>(rx.size());
    rx[s] = {5.0 * std::cos(a), 5.0 * std::sin(a)};
  }
  cells.resize(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) cells[m] = g.cell_center(m);
}

void BM_SurfaceSerial(benchmark::State& st) {
  const Grid2D g = square_grid(st);
  std::vector<Point2> rx, cells;
  surface_inputs(g, rx, cells);
  const auto k = make_disc_kernel(kK0, g.cell_area());
  CMatrix out;
  for (auto _ : st) {
    fill_surface_serial(k, rx, cells, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_SurfaceOmp(benchmark::State& st) {
  const Grid2D g = square_grid(st);
  std::vector<Point2> rx, cells;
  surface_inputs(g, rx, cells);
  const auto k = make_disc_kernel(kK0, g.cell_area());
  CMatrix out;
  for (auto _ : st) {
    fill_surface_omp(k, rx, cells, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_BttbDirect(benchmark::State& st) {
  const Grid2D g = square_grid(st);
  const auto gen = generator_for(g);
  const auto x = random_vector(g.size(), 1);
  std::vector<cplx> y(g.size());
  for (auto _ : st) {
    bttb_apply_reference(gen, g.nx(), g.ny(), x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_BttbFftSerial(benchmark::State& st) {
  const Grid2D g = square_grid(st);
  const auto gen = generator_for(g);
  const BttbConvolver conv(gen, g.nx(), g.ny());
  const auto x = random_vector(g.size(), 1);
  std::vector<cplx> y(g.size());
  for (auto _ : st) {
    conv.apply_serial(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_BttbFftOmp(benchmark::State& st) {
  const Grid2D g = square_grid(st);
  const auto gen = generator_for(g);
  const BttbConvolver conv(gen, g.nx(), g.ny());
  const auto x = random_vector(g.size(), 1);
  std::vector<cplx> y(g.size());
  for (auto _ : st) {
    conv.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

}  // namespace

BENCHMARK(BM_GeneratorSerial)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GeneratorOmp)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SurfaceSerial)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SurfaceOmp)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BttbDirect)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BttbFftSerial)->Arg(16)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BttbFftOmp)->Arg(16)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
