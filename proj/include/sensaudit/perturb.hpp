#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "sensaudit/corpus.hpp"

namespace sensaudit {

enum class SwapScheme { OneSwap, MultiSwap };

std::string swapSchemeName(SwapScheme scheme);
SwapScheme parseSwapScheme(const std::string& name);  // "one-swap" | "multi-swap"

enum class FilterKind { Uniform, OneGram, Context, Explicit };

// A token -> token replacement rule. Uniform filters derive the replacement
// lazily from (seed, filter index, token) so the mapping is defined for every
// token and independent of query order; the other kinds carry explicit
// mappings for the tokens they were built for.
class PerturbationFilter {
  public:
    static PerturbationFilter uniform(std::shared_ptr<const std::vector<Token>> sortedVocab,
                                      std::uint64_t seed, std::uint32_t filterIndex);
    static PerturbationFilter explicitMapping(FilterKind kind,
                                              std::unordered_map<Token, Token> mapping,
                                              std::string provenance);

    FilterKind kind() const { return kind_; }
    const std::string& provenance() const { return provenance_; }

    // Throws ValidationError if the mapping is undefined for u.
    Token replacementFor(const Token& u) const;

  private:
    PerturbationFilter() = default;

    FilterKind kind_ = FilterKind::Explicit;
    std::string provenance_;
    std::unordered_map<Token, Token> mapping_;
    std::shared_ptr<const std::vector<Token>> vocab_;
    std::uint64_t seed_ = 0;
    std::uint32_t filterIndex_ = 0;
};

struct FilterSet {
    std::vector<PerturbationFilter> filters;  // order fixed so averages are deterministic
    std::vector<std::string> familyLabels;    // one per filter: "uniform" | "onegram" | "context" | ...
    bool truncated = false;                   // fewer filters than requested were available

    std::size_t size() const { return filters.size(); }
    void append(const FilterSet& other);
};

// One-swap replaces only the first occurrence of u; multi-swap replaces every
// occurrence. A note without u is returned unchanged.
Note perturb(const Note& note, const Token& u, const PerturbationFilter& filter, SwapScheme scheme);

// `count` filters, each mapping any u to a token drawn uniformly from
// vocab \ {u}. Deterministic per seed. Requires |vocab| >= 2.
FilterSet buildUniformFilters(const std::vector<Token>& vocab, int count, std::uint64_t seed);

// The i-th filter maps u to the i-th most frequent token within the subset
// (excluding u), ties broken lexicographically. Returns fewer filters with
// `truncated` set when the subset has fewer distinct candidates.
FilterSet buildOneGramFilters(const CorpusView& subset, const Token& u, int count);

// Most-likely in-context replacements for a masked position.
class ContextProvider {
  public:
    virtual ~ContextProvider() = default;
    // Top-k candidates, most likely first; must not include the masked-out token.
    virtual std::vector<Token> replacements(const Note& note, std::size_t maskIndex, int k) = 0;
    virtual std::string name() const = 0;
};

// Deterministic fallback: ranks corpus vocabulary by co-occurrence with the
// tokens inside a +/-window around the masked position.
class CooccurrenceProvider : public ContextProvider {
  public:
    explicit CooccurrenceProvider(const Corpus& corpus, int window = 3);
    std::vector<Token> replacements(const Note& note, std::size_t maskIndex, int k) override;
    std::string name() const override { return "cooccurrence"; }

    // Co-occurrence count of a candidate with one context token (test hook).
    std::uint64_t pairCount(const Token& a, const Token& b) const;

  private:
    int window_;
    std::vector<Token> vocab_;
    std::unordered_map<Token, std::unordered_map<Token, std::uint64_t>> counts_;
};

// Filters mapping the token at `position` to the provider's top-count
// replacements. Provider failures propagate; no silent fallback.
FilterSet buildContextFilters(ContextProvider& provider, const Note& note, std::size_t position,
                              int count);

}  // namespace sensaudit
