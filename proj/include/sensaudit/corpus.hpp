#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sensaudit {

using Token = std::string;

struct TokenizePolicy {
    bool lowercase = true;
    bool stripPunctuation = true;
};

// Lowercase and strip leading/trailing punctuation. Idempotent: applying it
// to an already-normalized token is the identity.
Token normalizeToken(std::string_view raw, const TokenizePolicy& policy = {});

// Whitespace-split whole-word tokenizer. Empty results are dropped, so empty
// or punctuation-only input yields an empty sequence.
std::vector<Token> tokenize(std::string_view text, const TokenizePolicy& policy = {});

struct Note {
    std::string id;
    std::vector<Token> tokens;  // order preserved exactly as ingested
    std::optional<int> label;   // 0/1 when present
};

// Immutable after build(); safe to read concurrently.
class Corpus {
  public:
    Corpus() = default;

    // Throws ValidationError naming the offending id on duplicates.
    static Corpus build(std::vector<Note> notes);

    const std::vector<Note>& notes() const { return notes_; }
    std::size_t size() const { return notes_.size(); }

    // Sorted; every token occurring in any note is present.
    const std::vector<Token>& vocabulary() const { return vocab_; }

    std::size_t docFrequency(const Token& t) const;
    std::size_t tokenFrequency(const Token& t) const;
    bool containsToken(const Token& t) const { return docFrequency_.count(t) > 0; }

    const Note* findNote(const std::string& id) const;

  private:
    std::vector<Note> notes_;
    std::vector<Token> vocab_;
    std::unordered_map<Token, std::size_t> docFrequency_;
    std::unordered_map<Token, std::size_t> tokenFrequency_;
    std::unordered_map<std::string, std::size_t> noteIndexById_;
};

// Notes of a base corpus selected by index. Indices are kept in canonical
// note-id order so downstream reductions are reproducible.
class CorpusView {
  public:
    CorpusView(const Corpus& base, std::vector<std::size_t> indices);

    const Corpus& base() const { return *base_; }
    const std::vector<std::size_t>& indices() const { return indices_; }
    std::size_t size() const { return indices_.size(); }
    bool empty() const { return indices_.empty(); }
    const Note& note(std::size_t i) const { return base_->notes()[indices_[i]]; }

    // Occurrence counts restricted to the selected notes.
    std::unordered_map<Token, std::size_t> tokenFrequency() const;

  private:
    const Corpus* base_;
    std::vector<std::size_t> indices_;
};

// Exactly the notes where u occurs at least once; empty result is legal.
CorpusView subsetContaining(const Corpus& corpus, const Token& u);

}  // namespace sensaudit
