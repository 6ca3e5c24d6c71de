#include "sensaudit/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

#include "sensaudit/errors.hpp"

namespace sensaudit {

namespace {

struct Counts {
    std::uint64_t positives = 0;
    std::uint64_t negatives = 0;
};

Counts countClasses(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ValidationError("scores/labels length mismatch");
    if (scores.empty()) throw ValidationError("empty score sequence");
    Counts c;
    for (int y : labels) {
        if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
        (y == 1 ? c.positives : c.negatives) += 1;
    }
    return c;
}

// (score, label) sorted by descending score.
std::vector<std::pair<double, int>> sortedByScoreDesc(std::span<const double> scores,
                                                      std::span<const int> labels) {
    std::vector<std::pair<double, int>> rows;
    rows.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) rows.emplace_back(scores[i], labels[i]);
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    return rows;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
    const Counts c = countClasses(scores, labels);
    if (c.positives == 0 || c.negatives == 0) {
        throw UndefinedMetricError("auroc undefined: labels contain a single class");
    }
    auto rows = sortedByScoreDesc(scores, labels);

    // Sweep ascending so "negatives strictly below" accumulates; group ties.
    std::reverse(rows.begin(), rows.end());
    std::uint64_t wins = 0;       // positive strictly above a negative
    std::uint64_t tiedPairs = 0;  // positive and negative at equal score
    std::uint64_t negativesBelow = 0;
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        std::uint64_t posHere = 0;
        std::uint64_t negHere = 0;
        while (j < rows.size() && rows[j].first == rows[i].first) {
            (rows[j].second == 1 ? posHere : negHere) += 1;
            ++j;
        }
        wins += posHere * negativesBelow;
        tiedPairs += posHere * negHere;
        negativesBelow += negHere;
        i = j;
    }
    const double total = static_cast<double>(c.positives) * static_cast<double>(c.negatives);
    return (static_cast<double>(wins) + 0.5 * static_cast<double>(tiedPairs)) / total;
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
    const Counts c = countClasses(scores, labels);
    if (c.positives == 0 || c.negatives == 0) {
        throw UndefinedMetricError("auprc undefined: labels contain a single class");
    }
    auto rows = sortedByScoreDesc(scores, labels);

    double area = 0.0;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    double prevRecall = 0.0;
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        while (j < rows.size() && rows[j].first == rows[i].first) {
            (rows[j].second == 1 ? tp : fp) += 1;
            ++j;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(c.positives);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prevRecall) * precision;
        prevRecall = recall;
        i = j;
    }
    return area;
}

ThresholdCalibration calibrateThreshold(std::span<const double> scores, std::span<const int> labels,
                                        double targetRecall) {
    if (!(targetRecall > 0.0 && targetRecall <= 1.0)) {
        throw ValidationError("target recall must lie in (0, 1]");
    }
    const Counts c = countClasses(scores, labels);
    if (c.positives == 0) throw UndefinedMetricError("threshold calibration requires positives");

    auto recallAt = [&](double threshold) {
        std::uint64_t tp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (labels[i] == 1 && scores[i] >= threshold) ++tp;
        }
        return static_cast<double>(tp) / static_cast<double>(c.positives);
    };

    // Candidate thresholds are the distinct positive scores; recall only
    // changes there. Pick the largest one whose recall clears the target.
    std::vector<double> candidates;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 1) candidates.push_back(scores[i]);
    }
    std::sort(candidates.begin(), candidates.end(), std::greater<>());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    for (double t : candidates) {
        const double r = recallAt(t);
        if (r >= targetRecall) return {t, r};
    }
    // Unreachable: the minimum positive score always yields recall 1.
    const double t = candidates.back();
    return {t, recallAt(t)};
}

}  // namespace sensaudit
