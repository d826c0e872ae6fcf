// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include "berrywave/chaos.hpp"
#include "berrywave/nodal_stats.hpp"
#include "berrywave/synthesis.hpp"

using namespace berrywave;

namespace {

struct fixture {
  energy_level e;
  grid_spec g;
  wave_sample re;
  wave_sample im;

  explicit fixture(double E)
      : e(E),
        g(grid_spec::for_energy(domain::rectangle(1, 1), E, 16)),
        re(sample_wave(e, 256, 1, 0, field_real)),
        im(sample_wave(e, 256, 1, 0, field_imag)) {}
};

execution mode(const benchmark::State& s) { return s.range(1) == 0 ? execution::serial : execution::parallel; }

void BM_eval_grid(benchmark::State& s) {
  fixture f(static_cast<double>(s.range(0)));
  for (auto _ : s) {
    benchmark::DoNotOptimize(eval_grid(f.re, f.g, true, mode(s)));
  }
  s.counters["nodes"] = static_cast<double>(f.g.node_count());
}

void BM_nodal_length(benchmark::State& s) {
  fixture f(static_cast<double>(s.range(0)));
  auto v = eval_grid(f.re, f.g, false).value;
  for (auto _ : s) {
    benchmark::DoNotOptimize(nodal_length(v, f.g, {}, mode(s)));
  }
}

void BM_singularities(benchmark::State& s) {
  fixture f(static_cast<double>(s.range(0)));
  auto a = eval_grid(f.re, f.g, false).value;
  auto b = eval_grid(f.im, f.g, false).value;
  for (auto _ : s) {
    benchmark::DoNotOptimize(count_singularities(a, b, f.g, mode(s)));
  }
}

void BM_fourth_chaos(benchmark::State& s) {
  fixture f(static_cast<double>(s.range(0)));
  auto a = eval_grid(f.re, f.g, true);
  auto b = eval_grid(f.im, f.g, true);
  for (auto _ : s) {
    benchmark::DoNotOptimize(fourth_chaos_count(a, b, mode(s)));
  }
}

void args(benchmark::internal::Benchmark* b) {
  for (int E : {100, 1000}) {
    b->Args({E, 0});
    b->Args({E, 1});
  }
  b->ArgNames({"E", "parallel"})->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_eval_grid)->Apply(args);
BENCHMARK(BM_nodal_length)->Apply(args);
BENCHMARK(BM_singularities)->Apply(args);
BENCHMARK(BM_fourth_chaos)->Apply(args);

BENCHMARK_MAIN();
