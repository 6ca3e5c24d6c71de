#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sensaudit/corpus.hpp"

namespace sensaudit {

enum class TiePolicy {
    Strict,       // ranks are a permutation of 1..n; exact-score ties broken lexicographically
    Competition,  // equal scores share the block's minimum rank; next rank skips (1,2,3,3,3,6)
    Average,      // equal scores share the mean of their positions (fractional ranks)
};

struct Ranking {
    std::map<Token, double> ranks;  // rank 1 = best
    TiePolicy policy = TiePolicy::Strict;
    std::string source;

    // Tokens ordered by ascending rank, ties lexicographic.
    std::vector<Token> orderedTokens() const;
};

// Rank 1 goes to the highest score. Throws ValidationError naming the token
// on NaN scores.
Ranking rankTokens(const std::map<Token, double>& scores, TiePolicy policy = TiePolicy::Strict);

enum class SpearmanVariant {
    PaperFormula,  // 1 - 6*sum(D^2) / (n(n^2-1)) applied to the rank values as given
    TieCorrected,  // re-rank both sides with average ties, then Pearson
};

struct SpearmanResult {
    double coefficient = 0.0;
    std::size_t n = 0;
    double sumSquaredDiff = 0.0;  // sum(D^2) over the rank values as given
};

// Requires identical token sets with n >= 2; throws ValidationError listing
// the symmetric difference otherwise.
SpearmanResult spearman(const Ranking& a, const Ranking& b, SpearmanVariant variant);

// Product-moment correlation. Throws UndefinedMetricError on zero variance,
// ValidationError on length mismatch or n < 2.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct ReferenceRanking {
    std::map<std::string, std::map<Token, double>> perRater;  // rater -> token -> significance 1..5
    std::map<Token, double> averageScore;
    Ranking combined;  // competition-ranked ascending: most significant = rank 1
};

// All raters must cover the same token set; throws ValidationError naming
// the rater and token on gaps.
ReferenceRanking combineRaters(const std::map<std::string, std::map<Token, double>>& perRater);

// Average-tie fractional ranks of a value vector, ascending (smallest value
// gets rank 1). Shared by TieCorrected spearman and exposed for tests.
std::vector<double> fractionalRanks(std::span<const double> values);

}  // namespace sensaudit
