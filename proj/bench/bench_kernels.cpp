// Serial reference against OpenMP kernels: arg 0 = serial, 1 = parallel.
#include <benchmark/benchmark.h>

#include "flatcyl/coupled.hpp"
#include "flatcyl/experiments.hpp"
#include "flatcyl/flux.hpp"
#include "flatcyl/tower.hpp"
#include "flatcyl/transit.hpp"

using namespace flatcyl;

namespace {

exec mode(const benchmark::State& s) { return s.range(0) ? exec::parallel : exec::serial; }

void label(benchmark::State& s) { s.SetLabel(s.range(0) ? "parallel" : "serial"); }

void bm_sample_flux(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(sample_flux(1, 1 << 20, mode(s)));
  s.SetItemsProcessed(s.iterations() * (1 << 20));
  label(s);
}
BENCHMARK(bm_sample_flux)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void bm_clairaut(benchmark::State& s) {
  const profile_params p;
  for (auto _ : s) benchmark::DoNotOptimize(clairaut_conservation(p, 256, 1000, 1e-10, 1, mode(s)));
  s.SetItemsProcessed(s.iterations() * 256);
  label(s);
}
BENCHMARK(bm_clairaut)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void bm_transition_oracle(benchmark::State& s) {
  const profile_params p;
  for (auto _ : s) benchmark::DoNotOptimize(transition_oracle(p, 64, 50, 1e-10, 1e-11, 1e-12, 1, mode(s)));
  s.SetItemsProcessed(s.iterations() * 64);
  label(s);
}
BENCHMARK(bm_transition_oracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void bm_tower_simulate(benchmark::State& s) {
  const auto m = build_tower(tower_spec{});
  for (auto _ : s) benchmark::DoNotOptimize(simulate(m, observable::jr0, {1 << 16}, 64, 1, mode(s)));
  s.SetItemsProcessed(s.iterations() * 64 * (1 << 16));
  label(s);
}
BENCHMARK(bm_tower_simulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void bm_wip(benchmark::State& s) {
  coupled_spec c;
  c.head = 1024;
  const auto m = build_coupled(profile_params{}, c);
  wip_options w;
  w.n = 1 << 16;
  w.samples = 64;
  for (auto _ : s) benchmark::DoNotOptimize(wip_test(m, w, 1, mode(s)));
  label(s);
}
BENCHMARK(bm_wip)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// the single-stream sampler itself
void bm_tower_draw(benchmark::State& s) {
  const auto m = build_tower(tower_spec{});
  engine g = make_engine(1, tag::tower, 0);
  for (auto _ : s) benchmark::DoNotOptimize(m.draw(g));
}
BENCHMARK(bm_tower_draw);

}  // namespace

BENCHMARK_MAIN();
