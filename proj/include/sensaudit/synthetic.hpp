#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sensaudit/corpus.hpp"

namespace sensaudit {

struct PlantedSignal {
    Token token;
    double labelCorrelation = 0.0;  // target point-biserial of presence vs label, in [-1,1]
    double presence = 0.5;          // marginal probability the token appears in a note
    int occurrences = 1;            // copies inserted when present (drives term frequency)
};

struct SyntheticSpec {
    std::uint64_t seed = 0;
    std::size_t numNotes = 0;
    std::size_t noteLengthMin = 0;
    std::size_t noteLengthMax = 0;
    std::size_t vocabSize = 0;  // planted signals + background tokens
    double positiveRate = 0.5;
    std::vector<PlantedSignal> signals;
};

// Labels are drawn first at the requested positive rate; signal presence is
// then drawn from label-conditional probabilities solved from the requested
// correlation, so presence correlates with the label at the target value
// while the positive rate stays untouched. Background tokens follow a fixed
// Zipf-like distribution. Bit-identical output per seed.
//
// Throws ValidationError when a requested correlation is infeasible for the
// given presence and positive rate (the conditional probability would leave
// [0,1]), and on malformed specs.
Corpus generateSynthetic(const SyntheticSpec& spec);

// [synthetic] scalars plus [signals] "token = correlation [presence] [occurrences]".
SyntheticSpec readSyntheticSpec(const std::filesystem::path& path);
void writeSyntheticSpec(const std::filesystem::path& path, const SyntheticSpec& spec);

}  // namespace sensaudit
