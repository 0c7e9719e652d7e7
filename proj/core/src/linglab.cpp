#include "mhqa/linglab.hpp"

#include "mhqa/error.hpp"
#include "mhqa/sha256.hpp"
#include "mhqa/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mhqa::linglab {

using nlohmann::json;

std::vector<std::string> CharTokenizer::tokenize(std::string_view line) const {
    std::vector<std::string> out;
    for (char32_t cp : util::utf8_decode(line)) out.push_back(util::utf8_encode(cp));
    return out;
}

std::vector<std::string> WhitespaceTokenizer::tokenize(std::string_view line) const {
    std::vector<std::string> out;
    std::string current;
    for (char c : line) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) {
                out.push_back(current);
                current.clear();
            }
        } else {
            current += c;
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

VocabGreedyTokenizer::VocabGreedyTokenizer(std::set<std::string> vocabulary, std::string vocab_id)
    : vocabulary_(std::move(vocabulary)), id_("vocab:" + vocab_id) {
    if (vocabulary_.empty()) throw ConfigError("subword vocabulary is empty");
    for (const auto& v : vocabulary_) max_len_ = std::max(max_len_, v.size());
}

VocabGreedyTokenizer VocabGreedyTokenizer::from_file(const std::filesystem::path& path) {
    std::set<std::string> vocab;
    for (const auto& line : util::read_lines(path)) {
        if (!line.empty()) vocab.insert(line);
    }
    std::string joined;
    for (const auto& v : vocab) joined += v + "\n";
    return VocabGreedyTokenizer(std::move(vocab), sha256_hex(joined).substr(0, 12));
}

std::vector<std::string> VocabGreedyTokenizer::tokenize(std::string_view line) const {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        std::size_t limit = std::min(max_len_, line.size() - i);
        std::size_t matched = 0;
        for (std::size_t len = limit; len >= 1; --len) {
            if (vocabulary_.count(std::string(line.substr(i, len)))) {
                matched = len;
                break;
            }
        }
        if (matched == 0) matched = 1;  // single-byte fallback keeps the partition exact
        out.emplace_back(line.substr(i, matched));
        i += matched;
    }
    return out;
}

std::unique_ptr<SubwordTokenizer> make_tokenizer(const std::string& spec) {
    if (spec == "char") return std::make_unique<CharTokenizer>();
    if (spec == "whitespace") return std::make_unique<WhitespaceTokenizer>();
    if (spec.rfind("vocab:", 0) == 0)
        return std::make_unique<VocabGreedyTokenizer>(
            VocabGreedyTokenizer::from_file(spec.substr(6)));
    throw ConfigError("unknown tokenizer spec '" + spec + "' (char | whitespace | vocab:<path>)");
}

VocabProfile build_profile(std::span<const std::string> lines, const LanguageTag& language,
                           const SubwordTokenizer& tokenizer, const std::string& corpus_id) {
    if (lines.empty())
        throw ValidationError("cannot build a vocabulary profile from empty text for '" +
                              language.code() + "'");
    VocabProfile profile;
    profile.language = language;
    profile.tokenizer_id = tokenizer.id();
    profile.corpus_id = corpus_id;
    for (const auto& line : lines) {
        for (auto& tok : tokenizer.tokenize(line)) profile.subwords.insert(std::move(tok));
    }
    if (profile.subwords.empty())
        throw ValidationError("tokenizer produced no subwords for '" + language.code() + "'");
    return profile;
}

void save_profile(const VocabProfile& profile, const std::filesystem::path& path) {
    json j;
    j["language"] = profile.language.code();
    j["tokenizer_id"] = profile.tokenizer_id;
    j["corpus_id"] = profile.corpus_id;
    j["subwords"] = json::array();
    for (const auto& s : profile.subwords) j["subwords"].push_back(s);
    util::write_file_atomic(path, j.dump() + "\n");
}

VocabProfile load_profile(const std::filesystem::path& path) {
    json j = json::parse(util::read_file(path));
    VocabProfile profile;
    profile.language = LanguageTag(j.at("language").get<std::string>());
    profile.tokenizer_id = j.value("tokenizer_id", "");
    profile.corpus_id = j.value("corpus_id", "");
    for (const auto& s : j.value("subwords", std::vector<std::string>{}))
        profile.subwords.insert(s);
    return profile;
}

std::filesystem::path profile_cache_path(const std::filesystem::path& cache_dir,
                                         const VocabProfile& profile) {
    std::string key = profile.corpus_id + "|" + profile.tokenizer_id + "|" + profile.language.code();
    return cache_dir / "profiles" / (sha256_hex(key).substr(0, 16) + ".json");
}

double overlap(const VocabProfile& a, const VocabProfile& b) {
    if (a.tokenizer_id != b.tokenizer_id)
        throw ValidationError("profiles use different tokenizers: '" + a.tokenizer_id + "' vs '" +
                              b.tokenizer_id + "'");
    if (a.corpus_id != b.corpus_id)
        throw ValidationError("profiles come from different corpora: '" + a.corpus_id + "' vs '" +
                              b.corpus_id + "'");
    if (a.subwords.empty() || b.subwords.empty())
        throw ValidationError("cannot compare empty vocabulary profiles");
    std::size_t inter = 0;
    for (const auto& s : a.subwords) inter += b.subwords.count(s);
    std::size_t uni = a.subwords.size() + b.subwords.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

SimilarityMatrix SimilarityMatrix::from_profiles(std::span<const VocabProfile> profiles) {
    SimilarityMatrix m;
    for (const auto& p : profiles) m.languages_.push_back(p.language);
    std::sort(m.languages_.begin(), m.languages_.end());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        for (std::size_t j = 0; j < profiles.size(); ++j) {
            double value = i == j ? 1.0 : linglab::overlap(profiles[i], profiles[j]);
            m.set(profiles[i].language, profiles[j].language, value);
        }
    }
    return m;
}

double SimilarityMatrix::overlap(const LanguageTag& a, const LanguageTag& b) const {
    if (a == b) return 1.0;
    auto key = a.code() < b.code() ? std::make_pair(a.code(), b.code())
                                   : std::make_pair(b.code(), a.code());
    auto it = values_.find(key);
    if (it == values_.end())
        throw ValidationError("similarity matrix has no entry for (" + a.code() + ", " + b.code() +
                              ")");
    return it->second;
}

void SimilarityMatrix::set(const LanguageTag& a, const LanguageTag& b, double value) {
    if (value < 0.0 || value > 1.0) throw ValidationError("overlap must be in [0, 1]");
    if (std::find(languages_.begin(), languages_.end(), a) == languages_.end())
        languages_.push_back(a);
    if (std::find(languages_.begin(), languages_.end(), b) == languages_.end())
        languages_.push_back(b);
    std::sort(languages_.begin(), languages_.end());
    languages_.erase(std::unique(languages_.begin(), languages_.end()), languages_.end());
    if (a == b) return;  // diagonal is fixed at 1
    auto key = a.code() < b.code() ? std::make_pair(a.code(), b.code())
                                   : std::make_pair(b.code(), a.code());
    values_[key] = value;
}

std::string SimilarityMatrix::to_json() const {
    json j;
    json langs = json::array();
    for (const auto& l : languages_) langs.push_back(l.code());
    j["languages"] = langs;
    json pairs = json::array();
    for (const auto& [key, value] : values_) {
        pairs.push_back(json{{"l1", key.first}, {"l2", key.second}, {"overlap", value}});
    }
    j["pairs"] = pairs;
    return j.dump(2) + "\n";
}

SimilarityMatrix SimilarityMatrix::from_json(const std::string& content) {
    json j = json::parse(content);
    SimilarityMatrix m;
    for (const auto& code : j.value("languages", std::vector<std::string>{}))
        m.languages_.push_back(LanguageTag(code));
    std::sort(m.languages_.begin(), m.languages_.end());
    for (const auto& p : j.value("pairs", json::array())) {
        m.set(LanguageTag(p.at("l1").get<std::string>()), LanguageTag(p.at("l2").get<std::string>()),
              p.at("overlap").get<double>());
    }
    return m;
}

void SimilarityMatrix::save(const std::filesystem::path& path) const {
    util::write_file_atomic(path, to_json());
}

SimilarityMatrix SimilarityMatrix::load(const std::filesystem::path& path) {
    return from_json(util::read_file(path));
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("correlation inputs differ in length");
    if (x.size() < 2) throw ValidationError("correlation needs at least 2 points");
    const std::size_t n = x.size();
    double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mean_x;
        double dy = y[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;  // constant input
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // Tied block [i, j]: everyone gets the average rank (1-based).
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("correlation inputs differ in length");
    if (x.size() < 2) throw ValidationError("correlation needs at least 2 points");
    auto rx = midranks(x);
    auto ry = midranks(y);
    return pearson(rx, ry);
}

std::vector<CorrelationCell> correlate_accuracy(std::span<const harness::Outcome> outcomes,
                                                const SimilarityMatrix& matrix, int hop) {
    if (hop != 1 && hop != 2) throw ConfigError("hop must be 1 or 2");

    // query language -> hop language -> (sum f1, n)
    std::map<LanguageTag, std::map<LanguageTag, std::pair<double, std::size_t>>> acc;
    for (const auto& o : outcomes) {
        if (!o.complete) continue;
        const LanguageTag& hop_lang = hop == 1 ? o.condition.hop1_lang : o.condition.hop2_lang;
        auto& cell = acc[o.condition.query_lang][hop_lang];
        cell.first += o.two_hop.card.f1;
        ++cell.second;
    }

    std::vector<CorrelationCell> cells;
    for (const auto& [query, by_hop_lang] : acc) {
        CorrelationCell cell;
        cell.query_lang = query;
        cell.hop = hop;
        cell.n = by_hop_lang.size();
        if (by_hop_lang.size() < 3) {
            cell.insufficient = true;
            cells.push_back(std::move(cell));
            continue;
        }
        std::vector<double> f1s, overlaps;
        for (const auto& [hop_lang, sum_n] : by_hop_lang) {
            f1s.push_back(sum_n.first / sum_n.second);
            overlaps.push_back(matrix.overlap(query, hop_lang));
        }
        cell.pearson = pearson(f1s, overlaps);
        cell.spearman = spearman(f1s, overlaps);
        cells.push_back(std::move(cell));
    }
    return cells;
}

}  // namespace mhqa::linglab
