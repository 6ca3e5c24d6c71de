#include "sensaudit/corpus.hpp"

#include <algorithm>
#include <cctype>

#include "sensaudit/errors.hpp"

namespace sensaudit {

Token normalizeToken(std::string_view raw, const TokenizePolicy& policy) {
    std::size_t begin = 0;
    std::size_t end = raw.size();
    if (policy.stripPunctuation) {
        while (begin < end && std::ispunct(static_cast<unsigned char>(raw[begin]))) ++begin;
        while (end > begin && std::ispunct(static_cast<unsigned char>(raw[end - 1]))) --end;
    }
    Token out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        char c = raw[i];
        if (policy.lowercase) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(c);
    }
    return out;
}

std::vector<Token> tokenize(std::string_view text, const TokenizePolicy& policy) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) {
            Token tok = normalizeToken(text.substr(start, i - start), policy);
            if (!tok.empty()) out.push_back(std::move(tok));
        }
    }
    return out;
}

Corpus Corpus::build(std::vector<Note> notes) {
    Corpus c;
    c.notes_ = std::move(notes);
    c.noteIndexById_.reserve(c.notes_.size());
    for (std::size_t i = 0; i < c.notes_.size(); ++i) {
        const auto& note = c.notes_[i];
        if (!c.noteIndexById_.emplace(note.id, i).second) {
            throw ValidationError("duplicate note id: " + note.id);
        }
        std::unordered_map<Token, std::size_t> seen;
        for (const Token& t : note.tokens) {
            ++seen[t];
        }
        for (const auto& [tok, count] : seen) {
            c.docFrequency_[tok] += 1;
            c.tokenFrequency_[tok] += count;
        }
    }
    c.vocab_.reserve(c.docFrequency_.size());
    for (const auto& [tok, df] : c.docFrequency_) c.vocab_.push_back(tok);
    std::sort(c.vocab_.begin(), c.vocab_.end());
    return c;
}

std::size_t Corpus::docFrequency(const Token& t) const {
    auto it = docFrequency_.find(t);
    return it == docFrequency_.end() ? 0 : it->second;
}

std::size_t Corpus::tokenFrequency(const Token& t) const {
    auto it = tokenFrequency_.find(t);
    return it == tokenFrequency_.end() ? 0 : it->second;
}

const Note* Corpus::findNote(const std::string& id) const {
    auto it = noteIndexById_.find(id);
    return it == noteIndexById_.end() ? nullptr : &notes_[it->second];
}

CorpusView::CorpusView(const Corpus& base, std::vector<std::size_t> indices)
    : base_(&base), indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end(), [&](std::size_t a, std::size_t b) {
        return base.notes()[a].id < base.notes()[b].id;
    });
}

std::unordered_map<Token, std::size_t> CorpusView::tokenFrequency() const {
    std::unordered_map<Token, std::size_t> freq;
    for (std::size_t idx : indices_) {
        for (const Token& t : base_->notes()[idx].tokens) ++freq[t];
    }
    return freq;
}

CorpusView subsetContaining(const Corpus& corpus, const Token& u) {
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < corpus.notes().size(); ++i) {
        const auto& tokens = corpus.notes()[i].tokens;
        if (std::find(tokens.begin(), tokens.end(), u) != tokens.end()) {
            indices.push_back(i);
        }
    }
    return CorpusView(corpus, std::move(indices));
}

}  // namespace sensaudit
