// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "smkl/experiments.hpp"
#include "smkl/kernels.hpp"
#include "smkl/oracle.hpp"
#include "smkl/solver.hpp"
#include "smkl/strata.hpp"

namespace {

smkl::ExperimentConfig gaussian_config(int m) {
  auto c = smkl::ExperimentConfig::gaussian_kernel_paper();
  c.m = m;
  c.n_instances = 1;
  return c;
}

const smkl::Dataset& gaussian_dataset(int m) {
  static std::map<int, smkl::Dataset> cache;
  auto it = cache.find(m);
  if (it == cache.end())
    it = cache.emplace(m, smkl::generate_instance(gaussian_config(m), 0).problem.dataset()).first;
  return it->second;
}

smkl::KernelSpec sigmas(int groups) {
  std::vector<double> s;
  for (int g = 0; g < groups; ++g) s.push_back(0.1 * std::pow(100.0, g / double(groups - 1)));
  return smkl::GaussianFamily{s};
}

void BM_AssembleParallel(benchmark::State& state) {
  const auto& data = gaussian_dataset(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(smkl::assemble_gram_blocks(data, sigmas(20)));
}
void BM_AssembleSerial(benchmark::State& state) {
  const auto& data = gaussian_dataset(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(smkl::assemble_gram_blocks_serial(data, sigmas(20)));
}
BENCHMARK(BM_AssembleParallel)->Arg(50)->Arg(200);
BENCHMARK(BM_AssembleSerial)->Arg(50)->Arg(200);

const smkl::GeneratedInstance& gaussian_instance(int m) {
  static std::map<int, smkl::GeneratedInstance> cache;
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, smkl::generate_instance(gaussian_config(m), 0)).first;
  return it->second;
}

void BM_SolveParallel(benchmark::State& state) {
  const auto& inst = gaussian_instance(static_cast<int>(state.range(0)));
  smkl::SolverConfig cfg;
  cfg.max_iters = 200;
  for (auto _ : state) benchmark::DoNotOptimize(smkl::solve(inst.problem, cfg, smkl::Execution::parallel));
}
void BM_SolveSerial(benchmark::State& state) {
  const auto& inst = gaussian_instance(static_cast<int>(state.range(0)));
  smkl::SolverConfig cfg;
  cfg.max_iters = 200;
  for (auto _ : state) benchmark::DoNotOptimize(smkl::solve(inst.problem, cfg, smkl::Execution::serial));
}
BENCHMARK(BM_SolveParallel)->Arg(50)->Arg(200);
BENCHMARK(BM_SolveSerial)->Arg(50)->Arg(200);

void BM_LatticeParallel(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(smkl::verify_lattice(static_cast<int>(state.range(0)), smkl::group_norm_transfer(),
                                                  smkl::Execution::parallel));
}
void BM_LatticeSerial(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(smkl::verify_lattice(static_cast<int>(state.range(0)), smkl::group_norm_transfer(),
                                                  smkl::Execution::serial));
}
BENCHMARK(BM_LatticeParallel)->Arg(8)->Arg(12);
BENCHMARK(BM_LatticeSerial)->Arg(8)->Arg(12);

void BM_EnumerateParallel(benchmark::State& state) {
  const auto problem = smkl::random_small_group_lasso(3);
  for (auto _ : state) benchmark::DoNotOptimize(smkl::enumerate_solve(problem, 1e-9, smkl::Execution::parallel));
}
void BM_EnumerateSerial(benchmark::State& state) {
  const auto problem = smkl::random_small_group_lasso(3);
  for (auto _ : state) benchmark::DoNotOptimize(smkl::enumerate_solve(problem, 1e-9, smkl::Execution::serial));
}
BENCHMARK(BM_EnumerateParallel);
BENCHMARK(BM_EnumerateSerial);

}  // namespace

BENCHMARK_MAIN();
