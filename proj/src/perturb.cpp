#include "sensaudit/perturb.hpp"

#include <algorithm>

#include "sensaudit/errors.hpp"

namespace sensaudit {

std::string swapSchemeName(SwapScheme scheme) {
    return scheme == SwapScheme::OneSwap ? "one-swap" : "multi-swap";
}

SwapScheme parseSwapScheme(const std::string& name) {
    if (name == "one-swap" || name == "one_swap") return SwapScheme::OneSwap;
    if (name == "multi-swap" || name == "multi_swap") return SwapScheme::MultiSwap;
    throw ValidationError("unknown swap scheme '" + name + "' (want one-swap or multi-swap)");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

PerturbationFilter PerturbationFilter::uniform(std::shared_ptr<const std::vector<Token>> sortedVocab,
                                               std::uint64_t seed, std::uint32_t filterIndex) {
    if (!sortedVocab || sortedVocab->size() < 2) {
        throw ValidationError("uniform filters need a vocabulary of at least 2 tokens");
    }
    PerturbationFilter f;
    f.kind_ = FilterKind::Uniform;
    f.provenance_ = "uniform(seed=" + std::to_string(seed) + ",i=" + std::to_string(filterIndex) + ")";
    f.vocab_ = std::move(sortedVocab);
    f.seed_ = seed;
    f.filterIndex_ = filterIndex;
    return f;
}

PerturbationFilter PerturbationFilter::explicitMapping(FilterKind kind,
                                                       std::unordered_map<Token, Token> mapping,
                                                       std::string provenance) {
    PerturbationFilter f;
    f.kind_ = kind;
    f.mapping_ = std::move(mapping);
    f.provenance_ = std::move(provenance);
    return f;
}

Token PerturbationFilter::replacementFor(const Token& u) const {
    if (kind_ == FilterKind::Uniform) {
        // u is excluded from the candidate pool so the filter always perturbs.
        const auto& vocab = *vocab_;
        const bool uInVocab = std::binary_search(vocab.begin(), vocab.end(), u);
        const std::uint64_t poolSize = vocab.size() - (uInVocab ? 1 : 0);
        if (poolSize == 0) throw ValidationError("uniform filter has no candidate for '" + u + "'");
        const std::uint64_t mix =
            splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(filterIndex_) + 1) ^ fnv1a(u));
        std::uint64_t pick = mix % poolSize;
        if (uInVocab) {
            const auto uPos = static_cast<std::uint64_t>(
                std::lower_bound(vocab.begin(), vocab.end(), u) - vocab.begin());
            if (pick >= uPos) ++pick;
        }
        return vocab[pick];
    }
    auto it = mapping_.find(u);
    if (it == mapping_.end()) {
        throw ValidationError("filter " + provenance_ + " has no mapping for token '" + u + "'");
    }
    return it->second;
}

void FilterSet::append(const FilterSet& other) {
    filters.insert(filters.end(), other.filters.begin(), other.filters.end());
    familyLabels.insert(familyLabels.end(), other.familyLabels.begin(), other.familyLabels.end());
    truncated = truncated || other.truncated;
}

Note perturb(const Note& note, const Token& u, const PerturbationFilter& filter, SwapScheme scheme) {
    auto first = std::find(note.tokens.begin(), note.tokens.end(), u);
    if (first == note.tokens.end()) return note;  // perturbation does not change the note

    Note out = note;
    const Token replacement = filter.replacementFor(u);
    const std::size_t firstIdx = static_cast<std::size_t>(first - note.tokens.begin());
    if (scheme == SwapScheme::OneSwap) {
        out.tokens[firstIdx] = replacement;
    } else {
        for (std::size_t i = firstIdx; i < out.tokens.size(); ++i) {
            if (out.tokens[i] == u) out.tokens[i] = replacement;
        }
    }
    return out;
}

FilterSet buildUniformFilters(const std::vector<Token>& vocab, int count, std::uint64_t seed) {
    if (vocab.size() < 2) {
        throw ValidationError("uniform filters need a vocabulary of at least 2 tokens, got " +
                              std::to_string(vocab.size()));
    }
    if (count <= 0) throw ValidationError("uniform filter count must be positive");
    auto sorted = std::make_shared<std::vector<Token>>(vocab);
    std::sort(sorted->begin(), sorted->end());
    sorted->erase(std::unique(sorted->begin(), sorted->end()), sorted->end());
    FilterSet set;
    for (int i = 0; i < count; ++i) {
        set.filters.push_back(
            PerturbationFilter::uniform(sorted, seed, static_cast<std::uint32_t>(i)));
        set.familyLabels.emplace_back("uniform");
    }
    return set;
}

FilterSet buildOneGramFilters(const CorpusView& subset, const Token& u, int count) {
    if (subset.empty()) throw ValidationError("one-gram filters need a non-empty subset for '" + u + "'");
    if (count <= 0) throw ValidationError("one-gram filter count must be positive");

    auto freq = subset.tokenFrequency();
    std::vector<std::pair<Token, std::size_t>> candidates;
    candidates.reserve(freq.size());
    for (const auto& [tok, n] : freq) {
        if (tok != u) candidates.emplace_back(tok, n);
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    FilterSet set;
    const std::size_t available = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < available; ++i) {
        set.filters.push_back(PerturbationFilter::explicitMapping(
            FilterKind::OneGram, {{u, candidates[i].first}},
            "onegram(rank=" + std::to_string(i + 1) + ",count=" + std::to_string(candidates[i].second) +
                ")"));
        set.familyLabels.emplace_back("onegram");
    }
    set.truncated = available < static_cast<std::size_t>(count);
    return set;
}

CooccurrenceProvider::CooccurrenceProvider(const Corpus& corpus, int window) : window_(window) {
    if (window <= 0) throw ValidationError("co-occurrence window must be positive");
    vocab_ = corpus.vocabulary();
    for (const Note& note : corpus.notes()) {
        const auto& toks = note.tokens;
        for (std::size_t i = 0; i < toks.size(); ++i) {
            const std::size_t end = std::min(toks.size(), i + 1 + static_cast<std::size_t>(window));
            for (std::size_t j = i + 1; j < end; ++j) {
                counts_[toks[i]][toks[j]] += 1;
                counts_[toks[j]][toks[i]] += 1;
            }
        }
    }
}

std::uint64_t CooccurrenceProvider::pairCount(const Token& a, const Token& b) const {
    auto it = counts_.find(a);
    if (it == counts_.end()) return 0;
    auto jt = it->second.find(b);
    return jt == it->second.end() ? 0 : jt->second;
}

std::vector<Token> CooccurrenceProvider::replacements(const Note& note, std::size_t maskIndex, int k) {
    if (maskIndex >= note.tokens.size()) {
        throw ValidationError("mask index " + std::to_string(maskIndex) + " out of range for note '" +
                              note.id + "'");
    }
    const Token& masked = note.tokens[maskIndex];

    // Context = tokens within the window around the mask, mask excluded.
    std::vector<Token> context;
    const std::size_t lo = maskIndex >= static_cast<std::size_t>(window_)
                               ? maskIndex - static_cast<std::size_t>(window_)
                               : 0;
    const std::size_t hi = std::min(note.tokens.size(), maskIndex + 1 + static_cast<std::size_t>(window_));
    for (std::size_t i = lo; i < hi; ++i) {
        if (i != maskIndex) context.push_back(note.tokens[i]);
    }

    std::vector<std::pair<Token, std::uint64_t>> scored;
    scored.reserve(vocab_.size());
    for (const Token& cand : vocab_) {
        if (cand == masked) continue;
        std::uint64_t score = 0;
        for (const Token& ctx : context) score += pairCount(cand, ctx);
        scored.emplace_back(cand, score);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<Token> out;
    for (const auto& [tok, score] : scored) {
        if (static_cast<int>(out.size()) >= k) break;
        out.push_back(tok);
    }
    return out;
}

FilterSet buildContextFilters(ContextProvider& provider, const Note& note, std::size_t position,
                              int count) {
    if (count <= 0) throw ValidationError("context filter count must be positive");
    if (position >= note.tokens.size()) {
        throw ValidationError("context filter position out of range for note '" + note.id + "'");
    }
    const Token& u = note.tokens[position];
    const auto candidates = provider.replacements(note, position, count);

    FilterSet set;
    for (std::size_t i = 0; i < candidates.size() && i < static_cast<std::size_t>(count); ++i) {
        set.filters.push_back(PerturbationFilter::explicitMapping(
            FilterKind::Context, {{u, candidates[i]}},
            "context(" + provider.name() + ",rank=" + std::to_string(i + 1) + ")"));
        set.familyLabels.emplace_back("context");
    }
    set.truncated = set.filters.size() < static_cast<std::size_t>(count);
    return set;
}

}  // namespace sensaudit
