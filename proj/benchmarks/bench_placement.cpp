#include "mhqa/attribution.hpp"
#include "mhqa/perturb.hpp"

#include <benchmark/benchmark.h>

using namespace mhqa;

namespace {

corpus::Document doc(const std::string& id, const std::string& body) {
    corpus::Document d;
    d.id = id;
    d.title = "T";
    d.body = body;
    d.language = lang("en");
    return d;
}

}  // namespace

static void BM_place(benchmark::State& state) {
    auto h1 = doc("h1", "hop one body");
    auto h2 = doc("h2", "hop two body");
    perturb::DistractorPool pool;
    for (int i = 0; i < 16; ++i) pool.documents.push_back(doc("x" + std::to_string(i), "noise"));
    int d = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(perturb::place(h1, h2, pool, d));
    }
}
BENCHMARK(BM_place)->Arg(1)->Arg(5)->Arg(-5);

static void BM_segment_words(benchmark::State& state) {
    std::string body;
    for (int i = 0; i < state.range(0); ++i) body += "word" + std::to_string(i) + " ";
    auto en = lang("en");
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            attribution::segment_text(body, attribution::ErasureUnit::word, en));
    }
}
BENCHMARK(BM_segment_words)->Arg(64)->Arg(1024);
