#include "mhqa/scoring.hpp"
#include "mhqa/util.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace mhqa;

namespace {

std::string random_text(std::size_t words, std::uint64_t seed) {
    static const std::vector<std::string> vocab = {"alpha", "beta",  "мост", "ответ",
                                                   "جسر",   "vérité", "link", "span"};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::vector<std::string> out(words);
    for (auto& w : out) w = vocab[pick(rng)];
    return util::join(out, " ");
}

}  // namespace

static void BM_normalize_en(benchmark::State& state) {
    auto text = random_text(static_cast<std::size_t>(state.range(0)), 1);
    auto en = lang("en");
    for (auto _ : state) {
        benchmark::DoNotOptimize(scoring::normalize(text, en));
    }
}
BENCHMARK(BM_normalize_en)->Arg(16)->Arg(128)->Arg(1024);

static void BM_normalize_zh(benchmark::State& state) {
    std::string text;
    for (int i = 0; i < state.range(0); ++i) text += "礼宾司司长";
    auto zh = lang("zh");
    for (auto _ : state) {
        benchmark::DoNotOptimize(scoring::normalize(text, zh));
    }
}
BENCHMARK(BM_normalize_zh)->Arg(8)->Arg(64);

static void BM_token_f1(benchmark::State& state) {
    auto pred = random_text(static_cast<std::size_t>(state.range(0)), 2);
    auto gold = random_text(static_cast<std::size_t>(state.range(0)), 3);
    auto ru = lang("ru");
    for (auto _ : state) {
        benchmark::DoNotOptimize(scoring::token_f1(pred, gold, ru));
    }
}
BENCHMARK(BM_token_f1)->Arg(8)->Arg(64)->Arg(512);
