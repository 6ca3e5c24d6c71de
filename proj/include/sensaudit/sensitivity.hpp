#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sensaudit/classifier.hpp"
#include "sensaudit/corpus.hpp"
#include "sensaudit/perturb.hpp"
#include "sensaudit/stats.hpp"

namespace sensaudit {

// |f(x) - f(g_{u,h}(x))|. Classifier errors propagate with note and filter
// context attached.
double delta(const Classifier& f, const Note& note, const Token& u, const PerturbationFilter& h,
             SwapScheme scheme);

// Mean delta over the filter set, in filter order. Rejects an empty set.
double noteSensitivity(const Classifier& f, const Note& note, const Token& u, const FilterSet& filters,
                       SwapScheme scheme);

// Mean note sensitivity over the view's notes in canonical note-id order.
// Throws UndefinedMetricError when the view is empty: "u absent everywhere"
// is not the same thing as score 0.
double overallSensitivity(const Classifier& f, const CorpusView& view, const Token& u,
                          const FilterSet& filters, SwapScheme scheme);

struct FilterFamilyConfig {
    int uniformCount = 5;
    int onegramCount = 5;
    int contextCount = 5;
    std::uint64_t seed = 0;
    // When null and contextCount > 0 the engine builds a co-occurrence
    // provider over the evaluation corpus.
    ContextProvider* contextProvider = nullptr;
};

struct AuditOptions {
    SwapScheme scheme = SwapScheme::OneSwap;
    int workers = 1;
    std::uint64_t seed = 0;        // drives subsampling only
    std::size_t maxNotesPerToken = 0;  // 0 = off
    std::size_t maxFiltersPerNote = 0; // 0 = off
    bool keepDetails = true;
};

struct NoteLevelScore {
    Token token;
    std::string noteId;
    double score = 0.0;
    std::vector<double> deltas;        // per filter, in filter order
    std::vector<std::string> families; // parallel to deltas
};

struct TokenSensitivity {
    Token token;
    std::size_t support = 0;  // notes containing the token in the evaluation corpus
    std::size_t evaluatedNotes = 0;
    double overall = 0.0;
    std::map<std::string, double> familyScores;
    double rank = 0.0;
};

struct SensitivityReport {
    std::string classifierId;
    SwapScheme scheme = SwapScheme::OneSwap;
    int nominalFilterCount = 15;
    std::vector<Token> tokenOrder;  // supported tokens in input order
    std::map<Token, TokenSensitivity> tokens;
    std::vector<Token> unsupported;
    std::vector<NoteLevelScore> noteLevel;  // canonical (token order, note-id) order
    std::vector<std::string> warnings;
};

// Scores every token of U with support > 0; support-0 tokens land in
// `unsupported`. Deltas are computed in parallel over (token, note) tasks and
// reduced in canonical order, so results are bit-identical for any worker
// count.
SensitivityReport audit(const Classifier& f, const Corpus& corpus, const std::vector<Token>& tokens,
                        const FilterFamilyConfig& familyConfig, const AuditOptions& options);

// token,support,overall,uniform_family,onegram_family,context_family,rank
// rows ordered by rank.
void writeReportCsv(const std::filesystem::path& path, const SensitivityReport& report);
SensitivityReport readReportCsv(const std::filesystem::path& path);  // scores/ranks only

void writeNoteLevelJsonl(const std::filesystem::path& path, const SensitivityReport& report);
void writeUnsupportedList(const std::filesystem::path& path, const SensitivityReport& report);

}  // namespace sensaudit
