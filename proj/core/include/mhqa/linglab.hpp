#pragma once

#include "mhqa/harness.hpp"
#include "mhqa/lang.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace mhqa::linglab {

class SubwordTokenizer {
public:
    virtual ~SubwordTokenizer() = default;
    virtual std::string id() const = 0;
    virtual std::vector<std::string> tokenize(std::string_view line) const = 0;
};

// Unicode-codepoint tokenizer; partitions input byte-exactly.
class CharTokenizer final : public SubwordTokenizer {
public:
    std::string id() const override { return "char"; }
    std::vector<std::string> tokenize(std::string_view line) const override;
};

class WhitespaceTokenizer final : public SubwordTokenizer {
public:
    std::string id() const override { return "whitespace"; }
    std::vector<std::string> tokenize(std::string_view line) const override;
};

// Greedy longest-match over a fixed subword vocabulary (one entry per line in
// the vocab file); unknown bytes fall back to single characters, so the
// output partitions the input byte-exactly.
class VocabGreedyTokenizer final : public SubwordTokenizer {
public:
    explicit VocabGreedyTokenizer(std::set<std::string> vocabulary, std::string vocab_id);
    static VocabGreedyTokenizer from_file(const std::filesystem::path& path);

    std::string id() const override { return id_; }
    std::vector<std::string> tokenize(std::string_view line) const override;

private:
    std::set<std::string> vocabulary_;
    std::size_t max_len_ = 1;
    std::string id_;
};

// "char" | "whitespace" | "vocab:<path>"
std::unique_ptr<SubwordTokenizer> make_tokenizer(const std::string& spec);

struct VocabProfile {
    LanguageTag language;
    std::set<std::string> subwords;
    std::string tokenizer_id;
    std::string corpus_id;
};

VocabProfile build_profile(std::span<const std::string> lines, const LanguageTag& language,
                           const SubwordTokenizer& tokenizer, const std::string& corpus_id);

void save_profile(const VocabProfile& profile, const std::filesystem::path& path);
VocabProfile load_profile(const std::filesystem::path& path);
// Cache location keyed by (corpus_id, tokenizer_id, language).
std::filesystem::path profile_cache_path(const std::filesystem::path& cache_dir,
                                         const VocabProfile& profile);

// |V1 n V2| / |V1 u V2|; profiles must share tokenizer and corpus ids.
double overlap(const VocabProfile& a, const VocabProfile& b);

class SimilarityMatrix {
public:
    SimilarityMatrix() = default;

    static SimilarityMatrix from_profiles(std::span<const VocabProfile> profiles);

    const std::vector<LanguageTag>& languages() const { return languages_; }
    double overlap(const LanguageTag& a, const LanguageTag& b) const;
    double distance(const LanguageTag& a, const LanguageTag& b) const { return 1.0 - overlap(a, b); }

    void set(const LanguageTag& a, const LanguageTag& b, double value);

    std::string to_json() const;
    static SimilarityMatrix from_json(const std::string& content);
    void save(const std::filesystem::path& path) const;
    static SimilarityMatrix load(const std::filesystem::path& path);

private:
    std::vector<LanguageTag> languages_;
    std::map<std::pair<std::string, std::string>, double> values_;  // ordered pair key
};

// Product-moment coefficient; nullopt when either input is constant.
// Throws on length mismatch or fewer than 2 points.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// Pearson over mid-ranks (ties averaged).
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

std::vector<double> midranks(std::span<const double> values);

struct CorrelationCell {
    LanguageTag query_lang;
    int hop = 1;  // 1 or 2
    std::optional<double> pearson;
    std::optional<double> spearman;
    std::size_t n = 0;          // hop-language settings entering the correlation
    bool insufficient = false;  // fewer than 3 settings
};

// Per query language: x = mean two-hop F1 per hop language, y = vocabulary
// overlap(query, hop language). The Table-2 grid for one hop.
std::vector<CorrelationCell> correlate_accuracy(std::span<const harness::Outcome> outcomes,
                                                const SimilarityMatrix& matrix, int hop);

}  // namespace mhqa::linglab
