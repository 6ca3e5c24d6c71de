#include "sensaudit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sensaudit/errors.hpp"
#include "sensaudit/io.hpp"

namespace sensaudit {

namespace {

constexpr double kBackgroundZipfExponent = 0.8;

// mt19937_64 output is pinned by the standard; the helpers below avoid the
// implementation-defined std distributions so equal seeds give equal corpora
// everywhere.
struct Rng {
    std::mt19937_64 engine;

    explicit Rng(std::uint64_t seed) : engine(seed) {}

    double real() {  // [0,1)
        return static_cast<double>(engine() >> 11) * 0x1.0p-53;
    }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine() % n); }
};

struct ConditionalPresence {
    double givenPositive;
    double givenNegative;
};

ConditionalPresence solvePresence(const PlantedSignal& s, double positiveRate) {
    const double q = positiveRate;
    const double b = s.presence;
    const double scale = std::sqrt(b * (1.0 - b) / (q * (1.0 - q)));
    const double delta = s.labelCorrelation * scale;
    ConditionalPresence p{b + delta * (1.0 - q), b - delta * q};
    if (p.givenPositive < 0.0 || p.givenPositive > 1.0 || p.givenNegative < 0.0 ||
        p.givenNegative > 1.0) {
        std::ostringstream os;
        os << "signal '" << s.token << "': correlation " << s.labelCorrelation
           << " is infeasible at presence " << b << " and positive rate " << q
           << " (conditional presence would be " << p.givenPositive << " | " << p.givenNegative
           << "; lower |correlation| or move presence toward 0.5)";
        throw ValidationError(os.str());
    }
    return p;
}

void validate(const SyntheticSpec& spec) {
    if (spec.numNotes == 0) throw ValidationError("synthetic spec: num_notes must be positive");
    if (spec.noteLengthMin == 0 || spec.noteLengthMax < spec.noteLengthMin) {
        throw ValidationError("synthetic spec: need 0 < note_length_min <= note_length_max");
    }
    if (!(spec.positiveRate > 0.0 && spec.positiveRate < 1.0)) {
        throw ValidationError("synthetic spec: positive_rate must lie in (0,1)");
    }
    if (spec.vocabSize < spec.signals.size() + 10) {
        throw ValidationError("synthetic spec: vocab_size must cover the planted signals plus at "
                              "least 10 background tokens");
    }
    std::size_t maxInserted = 0;
    for (const auto& s : spec.signals) {
        if (s.token.empty()) throw ValidationError("synthetic spec: empty signal token");
        if (s.occurrences < 1) throw ValidationError("synthetic spec: occurrences must be >= 1");
        if (!(s.presence > 0.0 && s.presence < 1.0)) {
            throw ValidationError("signal '" + s.token + "': presence must lie in (0,1)");
        }
        if (s.labelCorrelation < -1.0 || s.labelCorrelation > 1.0) {
            throw ValidationError("signal '" + s.token + "': correlation must lie in [-1,1]");
        }
        maxInserted += static_cast<std::size_t>(s.occurrences);
    }
    if (maxInserted > spec.noteLengthMin) {
        throw ValidationError("synthetic spec: note_length_min " + std::to_string(spec.noteLengthMin) +
                              " cannot hold up to " + std::to_string(maxInserted) +
                              " inserted signal occurrences");
    }
}

}  // namespace

Corpus generateSynthetic(const SyntheticSpec& spec) {
    validate(spec);

    std::vector<ConditionalPresence> conditional;
    conditional.reserve(spec.signals.size());
    for (const auto& s : spec.signals) conditional.push_back(solvePresence(s, spec.positiveRate));

    // Background tokens w000..; Zipf-like weights give a realistic frequency head.
    const std::size_t numBackground = spec.vocabSize - spec.signals.size();
    std::vector<Token> background(numBackground);
    std::vector<double> cumulative(numBackground);
    {
        int width = 1;
        for (std::size_t v = numBackground; v >= 10; v /= 10) ++width;
        double sum = 0.0;
        for (std::size_t i = 0; i < numBackground; ++i) {
            std::ostringstream name;
            name << "w";
            name.width(width);
            name.fill('0');
            name << i;
            background[i] = name.str();
            sum += 1.0 / std::pow(static_cast<double>(i + 1), kBackgroundZipfExponent);
            cumulative[i] = sum;
        }
        for (auto& c : cumulative) c /= sum;
    }

    int idWidth = 1;
    for (std::size_t v = spec.numNotes; v >= 10; v /= 10) ++idWidth;

    Rng rng(spec.seed);
    auto drawBackground = [&]() -> const Token& {
        const double r = rng.real();
        const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), r);
        const std::size_t i = std::min(static_cast<std::size_t>(it - cumulative.begin()),
                                       numBackground - 1);
        return background[i];
    };

    std::vector<Note> notes;
    notes.reserve(spec.numNotes);
    std::vector<std::size_t> positions;
    for (std::size_t n = 0; n < spec.numNotes; ++n) {
        Note note;
        {
            std::ostringstream id;
            id << "n";
            id.width(idWidth);
            id.fill('0');
            id << n;
            note.id = id.str();
        }
        const int label = rng.real() < spec.positiveRate ? 1 : 0;
        note.label = label;
        const std::size_t length =
            spec.noteLengthMin + rng.index(spec.noteLengthMax - spec.noteLengthMin + 1);
        note.tokens.reserve(length);
        for (std::size_t i = 0; i < length; ++i) note.tokens.push_back(drawBackground());

        // One shuffled position queue per note keeps signal insertions from
        // overwriting each other.
        positions.resize(length);
        for (std::size_t i = 0; i < length; ++i) positions[i] = i;
        for (std::size_t i = length; i > 1; --i) {
            std::swap(positions[i - 1], positions[rng.index(i)]);
        }
        std::size_t cursor = 0;
        for (std::size_t s = 0; s < spec.signals.size(); ++s) {
            const double pPresent =
                label == 1 ? conditional[s].givenPositive : conditional[s].givenNegative;
            if (rng.real() < pPresent) {
                for (int k = 0; k < spec.signals[s].occurrences; ++k) {
                    note.tokens[positions[cursor++]] = spec.signals[s].token;
                }
            }
        }
        notes.push_back(std::move(note));
    }
    return Corpus::build(std::move(notes));
}

SyntheticSpec readSyntheticSpec(const std::filesystem::path& path) {
    const auto kv = readKeyValueConfig(path);
    SyntheticSpec spec;
    auto require = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError(path.string() + ": missing key '" + key + "'");
        return it->second;
    };
    spec.seed = std::stoull(require("synthetic.seed"));
    spec.numNotes = std::stoull(require("synthetic.num_notes"));
    spec.noteLengthMin = std::stoull(require("synthetic.note_length_min"));
    spec.noteLengthMax = std::stoull(require("synthetic.note_length_max"));
    spec.vocabSize = std::stoull(require("synthetic.vocab_size"));
    spec.positiveRate = std::stod(require("synthetic.positive_rate"));
    for (const auto& [key, value] : kv) {
        if (key.rfind("signals.", 0) != 0) continue;
        PlantedSignal s;
        s.token = key.substr(8);
        std::istringstream vs(value);
        if (!(vs >> s.labelCorrelation)) {
            throw ParseError(path.string() + ": signal '" + s.token + "' needs a correlation value");
        }
        double presence = 0.0;
        if (vs >> presence) s.presence = presence;
        int occ = 0;
        if (vs >> occ) s.occurrences = occ;
        spec.signals.push_back(std::move(s));
    }
    return spec;
}

void writeSyntheticSpec(const std::filesystem::path& path, const SyntheticSpec& spec) {
    std::ostringstream os;
    os << "[synthetic]\n";
    os << "seed = " << spec.seed << "\n";
    os << "num_notes = " << spec.numNotes << "\n";
    os << "note_length_min = " << spec.noteLengthMin << "\n";
    os << "note_length_max = " << spec.noteLengthMax << "\n";
    os << "vocab_size = " << spec.vocabSize << "\n";
    os << "positive_rate = " << formatDouble(spec.positiveRate) << "\n";
    os << "\n[signals]\n";
    for (const auto& s : spec.signals) {
        os << s.token << " = " << formatDouble(s.labelCorrelation) << " " << formatDouble(s.presence)
           << " " << s.occurrences << "\n";
    }
    writeFileAtomic(path, os.str());
}

}  // namespace sensaudit
