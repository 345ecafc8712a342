// Serial reference against OpenMP-parallel kernels on the shipped fixtures.
// Arg 0 selects the serial path, arg 1 the parallel one.

#include "dhr/conjugation.hpp"
#include "dhr/fixtures.hpp"

#include <benchmark/benchmark.h>

using namespace dhr;

namespace {

const fixtures::Fixture& z2() {
  static const fixtures::Fixture fx = fixtures::named_fixture("z2_2x2");
  return fx;
}

const fixtures::Fixture& z3() {
  static const fixtures::Fixture fx = fixtures::named_fixture("z3_2x2");
  return fx;
}

kernels::Exec exec(const benchmark::State& state) {
  return state.range(0) == 0 ? kernels::Exec::serial : kernels::Exec::parallel;
}

void BM_Commutant(benchmark::State& state) {
  const auto& alg = z2().net->local(z2().cell_region(0, 0));
  for (auto _ : state) benchmark::DoNotOptimize(commutant(alg, kTol, exec(state)).dim());
}

void BM_CommutantZ3(benchmark::State& state) {
  const auto& alg = z3().net->local(z3().cell_region(0, 0));
  for (auto _ : state) benchmark::DoNotOptimize(commutant(alg, kTol, exec(state)).dim());
}

void BM_CommutantReference(benchmark::State& state) {
  const auto& alg = z2().net->local(z2().cell_region(0, 0));
  for (auto _ : state) benchmark::DoNotOptimize(commutant_reference(alg).dim());
}

void BM_Symmetrizer(benchmark::State& state) {
  const auto& f = *z2().object("rho_r00c00").family;
  const auto eps = symmetry(f, f).eps;
  for (auto _ : state)
    benchmark::DoNotOptimize(symmetrizer(f.base, eps, 3, SymKind::antisymmetric, exec(state)).block.norm());
}

void BM_Extend(benchmark::State& state) {
  const auto& f = *z2().object("rho_r11c11").family;
  for (auto _ : state) benchmark::DoNotOptimize(extend(f, exec(state)).components.size());
}

void BM_SolveConjugate(benchmark::State& state) {
  const auto& f = *z2().object("rho_r00c00").family;
  const auto sum = direct_sum(f.base, f.base);
  for (auto _ : state) benchmark::DoNotOptimize(solve_conjugate(sum.alpha, sum.alpha, kTol, exec(state)).candidates);
}

}  // namespace

BENCHMARK(BM_Commutant)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CommutantZ3)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CommutantReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Symmetrizer)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Extend)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveConjugate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
