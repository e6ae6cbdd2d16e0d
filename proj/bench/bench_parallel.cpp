#include <benchmark/benchmark.h>

#include "quadsum/operator_spec.hpp"
#include "quadsum/verify.hpp"

namespace {

using namespace quadsum;

Endomorphism jordan_operator(Field f) {
    spec::BlockSizes sizes;
    sizes.kind = spec::BlockSizes::Kind::Arithmetic;
    sizes.start = 1;
    sizes.step = 1;
    return make_operator(*spec::jordan(sizes, {Scalar::zero(f)}), f);
}

template <typename Check>
void window_check(benchmark::State& state, Check check) {
    Field q = Field::rationals();
    Index window = static_cast<Index>(state.range(0));
    QuadraticPoly idem(-Scalar::one(q), Scalar::zero(q));
    for (auto _ : state) {
        // Fresh operators each round, so no column is served from a warm cache.
        state.PauseTiming();
        Endomorphism u = jordan_operator(q);
        DecomposeConfig config;
        config.strat.window = window;
        Decomposition d = four_sum(u, {idem, idem, idem, idem}, config);
        state.ResumeTiming();
        benchmark::DoNotOptimize(check(u, d, window).pass());
    }
}

void BM_CheckDecompositionParallel(benchmark::State& state) { window_check(state, check_decomposition); }
void BM_CheckDecompositionSerial(benchmark::State& state) { window_check(state, check_decomposition_serial); }
BENCHMARK(BM_CheckDecompositionParallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CheckDecompositionSerial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SquareZeroOracleParallel(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(oracle_three_squarezero(Field::prime(5), 4, state.range(0), 1).pass());
    }
}
void BM_SquareZeroOracleSerial(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(oracle_three_squarezero_serial(Field::prime(5), 4, state.range(0), 1).pass());
    }
}
BENCHMARK(BM_SquareZeroOracleParallel)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SquareZeroOracleSerial)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_IdempotentOracleParallel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(oracle_three_idempotents_smallfield(7, 2).pass());
}
void BM_IdempotentOracleSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(oracle_three_idempotents_smallfield_serial(7, 2).pass());
}
BENCHMARK(BM_IdempotentOracleParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IdempotentOracleSerial)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
