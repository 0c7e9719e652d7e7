#include "mhqa/linglab.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace mhqa;

namespace {

std::pair<std::vector<double>, std::vector<double>> random_vectors(std::size_t n) {
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = dist(rng);
        y[i] = dist(rng);
    }
    return {x, y};
}

}  // namespace

static void BM_pearson(benchmark::State& state) {
    auto [x, y] = random_vectors(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(linglab::pearson(x, y));
    }
}
BENCHMARK(BM_pearson)->Arg(32)->Arg(1024)->Arg(65536);

static void BM_spearman(benchmark::State& state) {
    auto [x, y] = random_vectors(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(linglab::spearman(x, y));
    }
}
BENCHMARK(BM_spearman)->Arg(32)->Arg(1024)->Arg(65536);

static void BM_overlap(benchmark::State& state) {
    linglab::VocabProfile a, b;
    a.language = lang("en");
    b.language = lang("fr");
    a.tokenizer_id = b.tokenizer_id = "bench";
    a.corpus_id = b.corpus_id = "bench";
    for (int i = 0; i < state.range(0); ++i) {
        a.subwords.insert("tok" + std::to_string(i));
        b.subwords.insert("tok" + std::to_string(i + state.range(0) / 2));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(linglab::overlap(a, b));
    }
}
BENCHMARK(BM_overlap)->Arg(256)->Arg(8192);
