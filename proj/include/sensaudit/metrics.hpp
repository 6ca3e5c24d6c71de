#pragma once

#include <span>

namespace sensaudit {

// Probability that a random positive outscores a random negative, ties
// counting one half (Mann-Whitney). Throws UndefinedMetricError when only
// one class is present.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Area under the precision-recall step curve with a descending-score sweep.
// All-equal scores collapse to a single point and yield the positive
// prevalence.
double auprc(std::span<const double> scores, std::span<const int> labels);

struct ThresholdCalibration {
    double threshold = 0.0;
    double recallAtThreshold = 0.0;  // with the "predict positive when score >= threshold" convention
};

// Largest threshold achieving recall >= targetRecall. Always feasible for
// targetRecall in (0, 1]: the minimum positive score reaches recall 1.
ThresholdCalibration calibrateThreshold(std::span<const double> scores, std::span<const int> labels,
                                        double targetRecall);

}  // namespace sensaudit
