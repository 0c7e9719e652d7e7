#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "mhqa/linglab.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace mhqa;
using namespace mhqa::linglab;

namespace {

// Definitional oracles in long double, independent of the implementation.
long double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    long double n = static_cast<long double>(x.size());
    long double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxy += static_cast<long double>(x[i]) * y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        syy += static_cast<long double>(y[i]) * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

std::vector<double> oracle_midranks(const std::vector<double>& v) {
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t less = 0, equal = 0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (v[j] < v[i]) ++less;
            if (v[j] == v[i]) ++equal;
        }
        ranks[i] = less + 1 + (equal - 1) * 0.5;
    }
    return ranks;
}

VocabProfile profile_of(std::set<std::string> words, const std::string& language) {
    VocabProfile p;
    p.language = lang(language);
    p.subwords = std::move(words);
    p.tokenizer_id = "test";
    p.corpus_id = "unit";
    return p;
}

double oracle_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::set<std::string> inter, uni;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::inserter(inter, inter.begin()));
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::inserter(uni, uni.begin()));
    return uni.empty() ? 0.0 : static_cast<double>(inter.size()) / uni.size();
}

}  // namespace

TEST_CASE("overlap identities") {
    auto p = profile_of({"a", "b", "c"}, "en");
    CHECK(overlap(p, p) == 1.0);
    auto q = profile_of({"x", "y"}, "fr");
    CHECK(overlap(p, q) == 0.0);
    auto r = profile_of({"b", "c", "d"}, "ru");
    CHECK(overlap(p, r) == doctest::Approx(0.5));  // 2 / 4
    CHECK(overlap(p, r) == overlap(r, p));
}

TEST_CASE("overlap requires matching tokenizer and corpus ids") {
    auto p = profile_of({"a"}, "en");
    auto q = profile_of({"a"}, "fr");
    q.tokenizer_id = "other";
    CHECK_THROWS_AS(overlap(p, q), ValidationError);
    q = profile_of({"a"}, "fr");
    q.corpus_id = "other";
    CHECK_THROWS_AS(overlap(p, q), ValidationError);
}

TEST_CASE("overlap matches set-enumeration brute force on random pairs") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> size_dist(1, 40);
    std::uniform_int_distribution<int> word_dist(0, 60);
    for (int trial = 0; trial < 200; ++trial) {
        std::set<std::string> a, b;
        int na = size_dist(rng), nb = size_dist(rng);
        for (int i = 0; i < na; ++i) a.insert("w" + std::to_string(word_dist(rng)));
        for (int i = 0; i < nb; ++i) b.insert("w" + std::to_string(word_dist(rng)));
        auto pa = profile_of(a, "en");
        auto pb = profile_of(b, "fr");
        CHECK(overlap(pa, pb) == oracle_jaccard(a, b));
    }
}

TEST_CASE("build_profile is deterministic and rejects empty input") {
    CharTokenizer tok;
    std::vector<std::string> lines{"ab", "bc"};
    auto p1 = build_profile(lines, lang("en"), tok, "c1");
    auto p2 = build_profile(lines, lang("en"), tok, "c1");
    CHECK(p1.subwords == p2.subwords);
    CHECK(p1.subwords == std::set<std::string>{"a", "b", "c"});

    std::vector<std::string> empty;
    CHECK_THROWS_AS(build_profile(empty, lang("en"), tok, "c1"), ValidationError);
}

TEST_CASE("char tokenizer splits code points") {
    CharTokenizer tok;
    CHECK(tok.tokenize("ab") == std::vector<std::string>{"a", "b"});
    CHECK(tok.tokenize("礼宾") == std::vector<std::string>{"礼", "宾"});
}

TEST_CASE("greedy vocab tokenizer takes longest matches with byte fallback") {
    VocabGreedyTokenizer tok({"ab", "abc", "d"}, "t");
    CHECK(tok.tokenize("abcd") == std::vector<std::string>{"abc", "d"});
    CHECK(tok.tokenize("abzd") == std::vector<std::string>{"ab", "z", "d"});
    std::string joined;
    for (const auto& t : tok.tokenize("xyzabc!")) joined += t;
    CHECK(joined == "xyzabc!");
}

TEST_CASE("profiles round-trip through the disk cache layout") {
    auto dir = std::filesystem::temp_directory_path() / "mhqa_linglab_cache";
    std::filesystem::remove_all(dir);
    auto p = profile_of({"alpha", "beta"}, "en");
    auto path = profile_cache_path(dir, p);
    save_profile(p, path);
    auto loaded = load_profile(path);
    CHECK(loaded.language == p.language);
    CHECK(loaded.subwords == p.subwords);
    CHECK(loaded.tokenizer_id == p.tokenizer_id);
    CHECK(loaded.corpus_id == p.corpus_id);
    // Key depends on (corpus, tokenizer, language).
    auto q = p;
    q.language = lang("fr");
    CHECK(profile_cache_path(dir, q) != path);
}

TEST_CASE("pearson and spearman basics") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y{2, 4, 6, 8, 10};
    CHECK(*pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*spearman(x, y) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> down{9, 7, 5, 3, 1};
    CHECK(*spearman(x, down) == doctest::Approx(-1.0).epsilon(1e-12));

    // Rank-difference oracle: sum d^2 = 4 -> 1 - 24/60 = 0.6.
    std::vector<double> a{1, 2, 3, 4};
    std::vector<double> b{2, 1, 4, 3};
    CHECK(*spearman(a, b) == doctest::Approx(0.6).epsilon(1e-12));

    std::vector<double> flat{3, 3, 3, 3, 3};
    CHECK_FALSE(pearson(flat, x).has_value());
    CHECK_FALSE(spearman(flat, x).has_value());

    std::vector<double> short_x{1};
    CHECK_THROWS_AS(pearson(short_x, short_x), ValidationError);
    std::vector<double> mism{1, 2, 3};
    CHECK_THROWS_AS(pearson(mism, a), ValidationError);
}

TEST_CASE("midranks average ties") {
    std::vector<double> v{10, 20, 20, 30};
    CHECK(midranks(v) == std::vector<double>{1.0, 2.5, 2.5, 4.0});
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> val(0, 5);  // plenty of ties
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> w(10);
        for (auto& e : w) e = val(rng);
        CHECK(midranks(w) == oracle_midranks(w));
    }
}

TEST_CASE("correlations match definitional oracles within 1e-12") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> len(2, 60);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n = len(rng);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = dist(rng);
            y[i] = dist(rng);
        }
        auto p = pearson(x, y);
        REQUIRE(p.has_value());
        CHECK(std::abs(*p - static_cast<double>(oracle_pearson(x, y))) < 1e-12);

        auto s = spearman(x, y);
        REQUIRE(s.has_value());
        auto rx = oracle_midranks(x);
        auto ry = oracle_midranks(y);
        CHECK(std::abs(*s - static_cast<double>(oracle_pearson(rx, ry))) < 1e-12);
    }
}

TEST_CASE("correlations live in [-1, 1] and respect monotone transforms") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(20), y(20);
        for (std::size_t i = 0; i < 20; ++i) {
            x[i] = dist(rng);
            y[i] = dist(rng);
        }
        auto p = *pearson(x, y);
        CHECK(p >= -1.0 - 1e-12);
        CHECK(p <= 1.0 + 1e-12);

        // Positive affine transform leaves pearson unchanged.
        std::vector<double> x2(20);
        for (std::size_t i = 0; i < 20; ++i) x2[i] = 3.5 * x[i] + 2.0;
        CHECK(*pearson(x2, y) == doctest::Approx(p).epsilon(1e-9));

        // Any strictly increasing transform leaves spearman unchanged.
        auto s = *spearman(x, y);
        std::vector<double> x3(20);
        for (std::size_t i = 0; i < 20; ++i) x3[i] = std::exp(x[i]);
        CHECK(*spearman(x3, y) == doctest::Approx(s).epsilon(1e-9));
    }
}

TEST_CASE("similarity matrix is symmetric with unit diagonal and round-trips") {
    std::vector<VocabProfile> profiles{
        profile_of({"a", "b", "c"}, "en"),
        profile_of({"b", "c", "d"}, "fr"),
        profile_of({"x"}, "zh"),
    };
    auto m = SimilarityMatrix::from_profiles(profiles);
    CHECK(m.overlap(lang("en"), lang("en")) == 1.0);
    CHECK(m.overlap(lang("en"), lang("fr")) == doctest::Approx(0.5));
    CHECK(m.overlap(lang("fr"), lang("en")) == m.overlap(lang("en"), lang("fr")));
    CHECK(m.distance(lang("en"), lang("fr")) == doctest::Approx(0.5));
    CHECK(m.overlap(lang("en"), lang("zh")) == 0.0);

    auto path = std::filesystem::temp_directory_path() / "mhqa_matrix.json";
    m.save(path);
    auto loaded = SimilarityMatrix::load(path);
    CHECK(loaded.overlap(lang("en"), lang("fr")) == doctest::Approx(0.5));
    CHECK(loaded.languages().size() == 3);
    CHECK_THROWS_AS(loaded.overlap(lang("en"), lang("xx")), ValidationError);
}

namespace {

harness::Outcome outcome_with_f1(const std::string& q, const std::string& h1, const std::string& h2,
                                 double f1) {
    harness::Outcome o;
    o.instance_id = "s";
    o.condition = {lang(q), lang(h1), lang(h2), harness::Strategy::standard, std::nullopt};
    o.two_hop.card.f1 = f1;
    o.two_hop.ok = f1 >= 0.5;
    o.subq1.ok = true;
    o.subq2.ok = true;
    return o;
}

}  // namespace

TEST_CASE("correlate_accuracy recovers a planted linear relation") {
    SimilarityMatrix m;
    m.set(lang("en"), lang("fr"), 0.8);
    m.set(lang("en"), lang("ru"), 0.5);
    m.set(lang("en"), lang("ar"), 0.3);
    m.set(lang("en"), lang("zh"), 0.1);

    std::vector<harness::Outcome> outcomes;
    for (const char* h2 : {"en", "fr", "ru", "ar", "zh"}) {
        double ov = m.overlap(lang("en"), lang(h2));
        outcomes.push_back(outcome_with_f1("en", "en", h2, 0.15 + 0.6 * ov));
        outcomes.push_back(outcome_with_f1("en", "en", h2, 0.15 + 0.6 * ov));
    }
    auto cells = correlate_accuracy(outcomes, m, 2);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].query_lang == lang("en"));
    CHECK(cells[0].hop == 2);
    CHECK(cells[0].n == 5);
    REQUIRE(cells[0].pearson.has_value());
    CHECK(std::abs(*cells[0].pearson - 1.0) < 1e-9);
    CHECK(std::abs(*cells[0].spearman - 1.0) < 1e-12);
}

TEST_CASE("correlate_accuracy flags constant accuracy and thin grids") {
    SimilarityMatrix m;
    m.set(lang("en"), lang("fr"), 0.8);
    m.set(lang("en"), lang("ru"), 0.5);
    m.set(lang("en"), lang("zh"), 0.2);

    std::vector<harness::Outcome> flat;
    for (const char* h2 : {"en", "fr", "ru", "zh"})
        flat.push_back(outcome_with_f1("en", "en", h2, 0.4));
    auto cells = correlate_accuracy(flat, m, 2);
    REQUIRE(cells.size() == 1);
    CHECK_FALSE(cells[0].insufficient);
    CHECK_FALSE(cells[0].pearson.has_value());  // constant input flagged undefined

    std::vector<harness::Outcome> thin{outcome_with_f1("en", "en", "fr", 0.4),
                                       outcome_with_f1("en", "en", "ru", 0.6)};
    auto thin_cells = correlate_accuracy(thin, m, 2);
    REQUIRE(thin_cells.size() == 1);
    CHECK(thin_cells[0].insufficient);
}

TEST_CASE("correlate_accuracy separates hops") {
    SimilarityMatrix m;
    m.set(lang("en"), lang("fr"), 0.8);
    m.set(lang("en"), lang("ru"), 0.5);
    m.set(lang("en"), lang("zh"), 0.2);

    std::vector<harness::Outcome> outcomes;
    for (const char* h1 : {"en", "fr", "ru", "zh"}) {
        double ov = m.overlap(lang("en"), lang(h1));
        outcomes.push_back(outcome_with_f1("en", h1, "en", 0.9 - 0.5 * ov));  // decreasing
    }
    auto hop1_cells = correlate_accuracy(outcomes, m, 1);
    REQUIRE(hop1_cells.size() == 1);
    CHECK(std::abs(*hop1_cells[0].pearson + 1.0) < 1e-9);  // perfectly negative

    // Hop-2 language is constant, so the hop-2 grid is too thin.
    auto hop2_cells = correlate_accuracy(outcomes, m, 2);
    REQUIRE(hop2_cells.size() == 1);
    CHECK(hop2_cells[0].insufficient);
}
