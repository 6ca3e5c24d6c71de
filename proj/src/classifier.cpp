#include "sensaudit/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sensaudit/errors.hpp"
#include "sensaudit/io.hpp"

namespace sensaudit {

ConstantClassifier::ConstantClassifier(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ValidationError("constant classifier value must lie in [0,1], got " + std::to_string(value));
    }
}

std::string ConstantClassifier::id() const {
    std::ostringstream os;
    os << "constant(" << value_ << ")";
    return os.str();
}

TfidfStats::TfidfStats(const Corpus& corpus) {
    if (corpus.size() == 0) throw ValidationError("tfidf stats require a non-empty corpus");
    numNotes_ = corpus.size();
    vocab_ = corpus.vocabulary();
    idf_.resize(vocab_.size());
    indexByToken_.reserve(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        indexByToken_.emplace(vocab_[i], i);
        const double df = static_cast<double>(corpus.docFrequency(vocab_[i]));
        idf_[i] = std::log(static_cast<double>(numNotes_) / df);
    }
}

TfidfStats TfidfStats::fromPersisted(std::vector<Token> vocab, std::vector<double> idf,
                                     std::size_t numNotes) {
    if (vocab.size() != idf.size()) throw ValidationError("persisted vocab/idf size mismatch");
    TfidfStats stats;
    stats.vocab_ = std::move(vocab);
    stats.idf_ = std::move(idf);
    stats.numNotes_ = numNotes;
    if (!std::is_sorted(stats.vocab_.begin(), stats.vocab_.end())) {
        throw ValidationError("persisted vocabulary must be sorted");
    }
    stats.indexByToken_.reserve(stats.vocab_.size());
    for (std::size_t i = 0; i < stats.vocab_.size(); ++i) {
        if (!stats.indexByToken_.emplace(stats.vocab_[i], i).second) {
            throw ValidationError("persisted vocabulary has duplicate token: " + stats.vocab_[i]);
        }
    }
    return stats;
}

double TfidfStats::idf(const Token& t) const {
    auto it = indexByToken_.find(t);
    return it == indexByToken_.end() ? 0.0 : idf_[it->second];
}

std::optional<std::size_t> TfidfStats::index(const Token& t) const {
    auto it = indexByToken_.find(t);
    if (it == indexByToken_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::pair<std::size_t, double>> tfidfEmbedSparse(const Note& note, const TfidfStats& stats) {
    std::unordered_map<std::size_t, std::size_t> counts;
    for (const Token& t : note.tokens) {
        if (auto idx = stats.index(t)) ++counts[*idx];
    }
    std::vector<std::pair<std::size_t, double>> entries;
    entries.reserve(counts.size());
    for (const auto& [idx, tf] : counts) {
        entries.emplace_back(idx, static_cast<double>(tf) * stats.idf(stats.vocabulary()[idx]));
    }
    std::sort(entries.begin(), entries.end());
    return entries;
}

std::vector<double> tfidfEmbed(const Note& note, const TfidfStats& stats) {
    std::vector<double> dense(stats.vocabulary().size(), 0.0);
    for (const auto& [idx, value] : tfidfEmbedSparse(note, stats)) dense[idx] = value;
    return dense;
}

ClassWeights deriveClassWeights(const Corpus& corpus) {
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (const auto& note : corpus.notes()) {
        if (!note.label) continue;
        (*note.label == 1 ? pos : neg) += 1;
    }
    const std::size_t total = pos + neg;
    if (pos == 0 || neg == 0) {
        throw ValidationError("class weights require both classes present (positives=" +
                              std::to_string(pos) + ", negatives=" + std::to_string(neg) + ")");
    }
    ClassWeights w;
    w.positiveWeight = static_cast<double>(neg) / static_cast<double>(total);
    w.negativeWeight = static_cast<double>(pos) / static_cast<double>(total);
    return w;
}

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TfidfLinearClassifier::TfidfLinearClassifier(TfidfStats stats, std::vector<double> weights,
                                             double bias, std::uint64_t seed)
    : stats_(std::move(stats)), weights_(std::move(weights)), bias_(bias), seed_(seed) {
    if (weights_.size() != stats_.vocabulary().size()) {
        throw ValidationError("linear model weight count does not match vocabulary size");
    }
}

double TfidfLinearClassifier::predict(const Note& note) const {
    double z = bias_;
    for (const auto& [idx, value] : tfidfEmbedSparse(note, stats_)) {
        z += weights_[idx] * value;
    }
    return logistic(z);
}

std::string TfidfLinearClassifier::id() const {
    return "tfidf_linear(seed=" + std::to_string(seed_) + ")";
}

void TfidfLinearClassifier::save(const std::filesystem::path& path) const {
    std::ostringstream os;
    os.precision(17);
    os << "# sensaudit tfidf_linear model\n";
    os << "bias " << bias_ << "\n";
    os << "log_base e\n";
    os << "seed " << seed_ << "\n";
    os << "num_notes " << stats_.numNotes() << "\n";
    os << "vocab_size " << stats_.vocabulary().size() << "\n";
    os << "token\tweight\tidf\n";
    for (std::size_t i = 0; i < stats_.vocabulary().size(); ++i) {
        os << stats_.vocabulary()[i] << "\t" << weights_[i] << "\t" << stats_.idf(stats_.vocabulary()[i])
           << "\n";
    }
    writeFileAtomic(path, os.str());
}

TfidfLinearClassifier TfidfLinearClassifier::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path.string());
    std::string line;
    double bias = 0.0;
    std::uint64_t seed = 0;
    std::size_t numNotes = 0;
    std::vector<Token> vocab;
    std::vector<double> weights;
    std::vector<double> idf;
    bool inTable = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!inTable) {
            std::istringstream ls(line);
            std::string key;
            ls >> key;
            if (key == "bias") {
                ls >> bias;
            } else if (key == "seed") {
                ls >> seed;
            } else if (key == "num_notes") {
                ls >> numNotes;
            } else if (key == "log_base" || key == "vocab_size") {
                // informational
            } else if (key == "token") {
                inTable = true;
            } else {
                throw ParseError("model file: unknown header key '" + key + "'");
            }
            continue;
        }
        std::istringstream ls(line);
        Token tok;
        double w = 0.0;
        double v = 0.0;
        if (!(ls >> tok >> w >> v)) throw ParseError("model file: malformed row '" + line + "'");
        vocab.push_back(tok);
        weights.push_back(w);
        idf.push_back(v);
    }
    if (numNotes == 0) throw ParseError("model file: missing num_notes header");
    TfidfStats stats = TfidfStats::fromPersisted(std::move(vocab), std::move(idf), numNotes);
    return TfidfLinearClassifier(std::move(stats), std::move(weights), bias, seed);
}

namespace {

double weightedCrossEntropy(double p, int y, const ClassWeights& w) {
    constexpr double kEps = 1e-12;
    const double pc = std::min(std::max(p, kEps), 1.0 - kEps);
    return y == 1 ? -w.positiveWeight * std::log(pc) : -w.negativeWeight * std::log(1.0 - pc);
}

}  // namespace

TrainResult trainLinear(const Corpus& corpus, const TrainConfig& config) {
    std::vector<std::size_t> labeled;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (corpus.notes()[i].label) labeled.push_back(i);
    }
    if (labeled.empty()) throw ValidationError("training corpus has no labeled notes");

    ClassWeights cw;
    if (config.positiveWeight >= 0.0 && config.negativeWeight >= 0.0) {
        cw.positiveWeight = config.positiveWeight;
        cw.negativeWeight = config.negativeWeight;
    } else {
        cw = deriveClassWeights(corpus);  // throws on single-class corpus
    }

    TfidfStats stats(corpus);
    const std::size_t dim = stats.vocabulary().size();
    std::vector<double> w(dim, 0.0);
    double bias = 0.0;

    // Sparse per-note embeddings, fixed order.
    std::vector<std::vector<std::pair<std::size_t, double>>> features;
    std::vector<int> ys;
    std::vector<double> exampleWeight;
    features.reserve(labeled.size());
    for (std::size_t idx : labeled) {
        const Note& note = corpus.notes()[idx];
        features.push_back(tfidfEmbedSparse(note, stats));
        ys.push_back(*note.label);
        exampleWeight.push_back(*note.label == 1 ? cw.positiveWeight : cw.negativeWeight);
    }
    const double invN = 1.0 / static_cast<double>(features.size());

    std::vector<double> grad(dim, 0.0);
    double finalLoss = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double gradBias = 0.0;
        for (std::size_t i = 0; i < features.size(); ++i) {
            double z = bias;
            for (const auto& [j, v] : features[i]) z += w[j] * v;
            const double p = logistic(z);
            const double err = exampleWeight[i] * (p - static_cast<double>(ys[i]));
            for (const auto& [j, v] : features[i]) grad[j] += err * v;
            gradBias += err;
        }
        for (std::size_t j = 0; j < dim; ++j) w[j] -= config.learningRate * grad[j] * invN;
        bias -= config.learningRate * gradBias * invN;
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        double z = bias;
        for (const auto& [j, v] : features[i]) z += w[j] * v;
        finalLoss += weightedCrossEntropy(logistic(z), ys[i], cw);
    }
    finalLoss *= invN;

    TrainResult result{TfidfLinearClassifier(std::move(stats), std::move(w), bias, config.seed),
                       finalLoss, cw};
    return result;
}

}  // namespace sensaudit
