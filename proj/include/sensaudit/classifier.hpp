#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "sensaudit/corpus.hpp"

namespace sensaudit {

// Note -> probability contract. predict must be a pure function of the note
// content; implementations that cannot take concurrent calls return false
// from threadSafe() and the engine serializes them.
class Classifier {
  public:
    virtual ~Classifier() = default;
    virtual double predict(const Note& note) const = 0;
    virtual std::string id() const = 0;
    virtual bool threadSafe() const { return true; }
};

class ConstantClassifier : public Classifier {
  public:
    explicit ConstantClassifier(double value);  // throws ValidationError outside [0,1]
    double predict(const Note&) const override { return value_; }
    std::string id() const override;

  private:
    double value_;
};

// Vocabulary and document-frequency statistics frozen from a training corpus.
// idf uses the natural log with no smoothing: ln(|X| / df). Tokens present in
// every note get idf 0.
class TfidfStats {
  public:
    TfidfStats() = default;
    explicit TfidfStats(const Corpus& corpus);  // throws ValidationError on empty corpus

    // Rehydrate from persisted (token, idf) rows, vocab sorted.
    static TfidfStats fromPersisted(std::vector<Token> vocab, std::vector<double> idf,
                                    std::size_t numNotes);

    const std::vector<Token>& vocabulary() const { return vocab_; }
    std::size_t numNotes() const { return numNotes_; }
    double idf(const Token& t) const;                 // 0 for out-of-vocabulary tokens
    std::optional<std::size_t> index(const Token& t) const;

  private:
    std::vector<Token> vocab_;  // sorted
    std::unordered_map<Token, std::size_t> indexByToken_;
    std::vector<double> idf_;
    std::size_t numNotes_ = 0;
};

// Dense embedding aligned with stats.vocabulary(); entry(t) = tf(t, note) * idf(t).
// Out-of-vocabulary note tokens contribute nothing.
std::vector<double> tfidfEmbed(const Note& note, const TfidfStats& stats);

// (vocab index, value) pairs for nonzero entries, ascending index.
std::vector<std::pair<std::size_t, double>> tfidfEmbedSparse(const Note& note, const TfidfStats& stats);

struct TrainConfig {
    double learningRate = 0.5;
    int epochs = 400;
    std::uint64_t seed = 0;
    // Negative means derive from the corpus: positive examples weighted by the
    // fraction of negatives and vice versa.
    double positiveWeight = -1.0;
    double negativeWeight = -1.0;
};

struct ClassWeights {
    double positiveWeight = 0.5;
    double negativeWeight = 0.5;
};

ClassWeights deriveClassWeights(const Corpus& corpus);

class TfidfLinearClassifier : public Classifier {
  public:
    TfidfLinearClassifier() = default;
    TfidfLinearClassifier(TfidfStats stats, std::vector<double> weights, double bias,
                          std::uint64_t seed = 0);

    double predict(const Note& note) const override;  // logistic(W . phi(x) + bias)
    std::string id() const override;

    const TfidfStats& stats() const { return stats_; }
    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }
    std::uint64_t trainingSeed() const { return seed_; }

    void save(const std::filesystem::path& path) const;
    static TfidfLinearClassifier load(const std::filesystem::path& path);

  private:
    TfidfStats stats_;
    std::vector<double> weights_;
    double bias_ = 0.0;
    std::uint64_t seed_ = 0;
};

struct TrainResult {
    TfidfLinearClassifier model;
    double finalLoss = 0.0;
    ClassWeights classWeights;
};

// Full-batch gradient descent on weighted cross-entropy from zero-initialized
// weights. Deterministic per config. Throws ValidationError when the corpus
// holds a single class.
TrainResult trainLinear(const Corpus& corpus, const TrainConfig& config);

}  // namespace sensaudit
