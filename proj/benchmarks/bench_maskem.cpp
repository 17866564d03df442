#include <benchmark/benchmark.h>

#include <maskem/gf2.hpp>
#include <maskem/kem.hpp>
#include <maskem/markov_error.hpp>
#include <maskem/rng.hpp>

#include <cstdint>

namespace {

using maskem::Rng;
namespace gf2 = maskem::gf2;
namespace kem = maskem::kem;
namespace markov = maskem::markov;

const kem::ParamSet kPresets[4] = {
    {205, 80, 10, 0.055},
    {300, 118, 10, 0.055},
    {400, 155, 10, 0.055},
    {750, 302, 10, 0.055},
};
const char* const kPresetNames[4] = {"sec258", "sec388", "sec524", "sec1000"};

void BM_keygen(benchmark::State& state) {
    const kem::ParamSet& pr = kPresets[state.range(0)];
    Rng rng(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kem::keygen(pr, rng));
    }
    state.SetLabel(kPresetNames[state.range(0)]);
}
BENCHMARK(BM_keygen)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_encapsulate(benchmark::State& state) {
    const kem::ParamSet& pr = kPresets[state.range(0)];
    Rng rng(2);
    const kem::KeyPair keys = kem::keygen(pr, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kem::encapsulate(keys.pk, rng));
    }
    state.SetLabel(kPresetNames[state.range(0)]);
}
BENCHMARK(BM_encapsulate)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_decapsulate(benchmark::State& state) {
    const kem::ParamSet& pr = kPresets[state.range(0)];
    Rng rng(3);
    const kem::KeyPair keys = kem::keygen(pr, rng);
    const kem::EncapsResult enc = kem::encapsulate(keys.pk, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kem::decapsulate(keys.sk, enc.ct));
    }
    state.SetLabel(kPresetNames[state.range(0)]);
}
BENCHMARK(BM_decapsulate)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_gf2_mul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(4);
    const gf2::BitMatrix a = gf2::BitMatrix::random(n, n, rng);
    const gf2::BitMatrix b = gf2::BitMatrix::random(n, n, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gf2::mul(a, b));
    }
}
BENCHMARK(BM_gf2_mul)->Arg(256)->Arg(1024)->Arg(2260)
    ->Unit(benchmark::kMillisecond);

void BM_gf2_invert(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(5);
    const gf2::BitMatrix a = gf2::random_full_rank(n, n, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gf2::invert(a));
    }
}
BENCHMARK(BM_gf2_invert)->Arg(256)->Arg(1024)->Arg(2260)
    ->Unit(benchmark::kMillisecond);

void BM_gf2_mul_vec(benchmark::State& state) {
    const kem::ParamSet& pr = kPresets[state.range(0)];
    Rng rng(6);
    const gf2::BitMatrix p =
        gf2::BitMatrix::random(pr.n() + pr.m, pr.d, rng);
    const gf2::BitVector v = gf2::BitVector::random(pr.d, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gf2::mul_vec(p, v));
    }
    state.SetLabel(kPresetNames[state.range(0)]);
}
BENCHMARK(BM_gf2_mul_vec)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_markov_sample(benchmark::State& state) {
    const markov::ErrorModel model(0.055);
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(markov::sample_error(n, model, rng));
    }
}
BENCHMARK(BM_markov_sample)->Arg(615)->Arg(2250)
    ->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
