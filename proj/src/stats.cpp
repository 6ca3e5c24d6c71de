#include "sensaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sensaudit/errors.hpp"

namespace sensaudit {

std::vector<Token> Ranking::orderedTokens() const {
    std::vector<Token> tokens;
    tokens.reserve(ranks.size());
    for (const auto& [tok, r] : ranks) tokens.push_back(tok);
    std::sort(tokens.begin(), tokens.end(), [&](const Token& a, const Token& b) {
        double ra = ranks.at(a);
        double rb = ranks.at(b);
        if (ra != rb) return ra < rb;
        return a < b;
    });
    return tokens;
}

namespace {

// positions: 1-based sort positions of entries ordered best-first.
double blockRank(TiePolicy policy, std::size_t blockStart, std::size_t blockEnd) {
    switch (policy) {
        case TiePolicy::Competition:
            return static_cast<double>(blockStart);
        case TiePolicy::Average:
            return (static_cast<double>(blockStart) + static_cast<double>(blockEnd)) / 2.0;
        case TiePolicy::Strict:
            break;
    }
    return 0.0;  // unreachable for tie policies; strict never calls this
}

}  // namespace

Ranking rankTokens(const std::map<Token, double>& scores, TiePolicy policy) {
    if (scores.empty()) throw ValidationError("rankTokens: empty score map");
    for (const auto& [tok, s] : scores) {
        if (std::isnan(s)) throw ValidationError("rankTokens: NaN score for token '" + tok + "'");
    }
    std::vector<std::pair<Token, double>> order(scores.begin(), scores.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;  // descending score
        return a.first < b.first;
    });

    Ranking out;
    out.policy = policy;
    if (policy == TiePolicy::Strict) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            out.ranks[order[i].first] = static_cast<double>(i + 1);
        }
        return out;
    }
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && order[j + 1].second == order[i].second) ++j;
        const double rank = blockRank(policy, i + 1, j + 1);
        for (std::size_t k = i; k <= j; ++k) out.ranks[order[k].first] = rank;
        i = j + 1;
    }
    return out;
}

std::vector<double> fractionalRanks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b];
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

void requireSameTokens(const Ranking& a, const Ranking& b) {
    std::vector<Token> onlyA;
    std::vector<Token> onlyB;
    for (const auto& [tok, r] : a.ranks)
        if (!b.ranks.count(tok)) onlyA.push_back(tok);
    for (const auto& [tok, r] : b.ranks)
        if (!a.ranks.count(tok)) onlyB.push_back(tok);
    if (onlyA.empty() && onlyB.empty()) return;
    std::ostringstream os;
    os << "spearman: token sets differ;";
    if (!onlyA.empty()) {
        os << " only in first:";
        for (const auto& t : onlyA) os << " " << t;
        os << ";";
    }
    if (!onlyB.empty()) {
        os << " only in second:";
        for (const auto& t : onlyB) os << " " << t;
    }
    throw ValidationError(os.str());
}

}  // namespace

SpearmanResult spearman(const Ranking& a, const Ranking& b, SpearmanVariant variant) {
    requireSameTokens(a, b);
    const std::size_t n = a.ranks.size();
    if (n < 2) throw ValidationError("spearman: need at least 2 paired ranks");

    std::vector<double> ra;
    std::vector<double> rb;
    ra.reserve(n);
    rb.reserve(n);
    for (const auto& [tok, rank] : a.ranks) {  // std::map: token order, identical on both sides
        ra.push_back(rank);
        rb.push_back(b.ranks.at(tok));
    }

    SpearmanResult res;
    res.n = n;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = ra[i] - rb[i];
        res.sumSquaredDiff += d * d;
    }
    switch (variant) {
        case SpearmanVariant::PaperFormula: {
            const double nn = static_cast<double>(n);
            res.coefficient = 1.0 - 6.0 * res.sumSquaredDiff / (nn * (nn * nn - 1.0));
            break;
        }
        case SpearmanVariant::TieCorrected: {
            const auto fa = fractionalRanks(ra);
            const auto fb = fractionalRanks(rb);
            res.coefficient = pearson(fa, fb);
            break;
        }
    }
    return res;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ValidationError("pearson: length mismatch");
    const std::size_t n = xs.size();
    if (n < 2) throw ValidationError("pearson: need at least 2 pairs");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedMetricError("pearson: zero variance input");
    }
    return sxy / std::sqrt(sxx * syy);
}

ReferenceRanking combineRaters(const std::map<std::string, std::map<Token, double>>& perRater) {
    if (perRater.empty()) throw ValidationError("combineRaters: no raters");
    const auto& first = perRater.begin()->second;
    for (const auto& [rater, scores] : perRater) {
        for (const auto& [tok, s] : first) {
            if (!scores.count(tok)) {
                throw ValidationError("combineRaters: rater '" + rater + "' missing token '" + tok + "'");
            }
        }
        for (const auto& [tok, s] : scores) {
            if (!first.count(tok)) {
                throw ValidationError("combineRaters: rater '" + rater + "' has extra token '" + tok + "'");
            }
        }
    }

    ReferenceRanking ref;
    ref.perRater = perRater;
    for (const auto& [tok, s] : first) {
        double sum = 0.0;
        for (const auto& [rater, scores] : perRater) sum += scores.at(tok);
        ref.averageScore[tok] = sum / static_cast<double>(perRater.size());
    }
    // Lower averaged significance = more important = better rank, so rank on
    // the negated scores with the shared descending-score ranker.
    std::map<Token, double> negated;
    for (const auto& [tok, s] : ref.averageScore) negated[tok] = -s;
    ref.combined = rankTokens(negated, TiePolicy::Competition);
    ref.combined.source = "reference";
    return ref;
}

}  // namespace sensaudit
