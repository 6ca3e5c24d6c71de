#include "sensaudit/sensitivity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sensaudit/errors.hpp"
#include "sensaudit/io.hpp"

namespace sensaudit {

using nlohmann::json;

double delta(const Classifier& f, const Note& note, const Token& u, const PerturbationFilter& h,
             SwapScheme scheme) {
    try {
        const double before = f.predict(note);
        const double after = f.predict(perturb(note, u, h, scheme));
        return std::abs(before - after);
    } catch (const Error& e) {
        throw Error(std::string(e.what()) + " [token '" + u + "', note '" + note.id + "', filter " +
                    h.provenance() + "]");
    }
}

double noteSensitivity(const Classifier& f, const Note& note, const Token& u, const FilterSet& filters,
                       SwapScheme scheme) {
    if (filters.size() == 0) throw ValidationError("note sensitivity needs a non-empty filter set");
    double sum = 0.0;
    for (const auto& h : filters.filters) sum += delta(f, note, u, h, scheme);
    return sum / static_cast<double>(filters.size());
}

double overallSensitivity(const Classifier& f, const CorpusView& view, const Token& u,
                          const FilterSet& filters, SwapScheme scheme) {
    if (view.empty()) {
        throw UndefinedMetricError("overall sensitivity undefined: token '" + u +
                                   "' occurs in no note of the corpus");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < view.size(); ++i) {
        sum += noteSensitivity(f, view.note(i), u, filters, scheme);
    }
    return sum / static_cast<double>(view.size());
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Deterministic partial Fisher-Yates: first k slots of 0..n-1.
std::vector<std::size_t> sampleIndices(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::uint64_t state = seed;
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
        state = splitmix64(state);
        const std::size_t j = i + static_cast<std::size_t>(state % (n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(std::min(k, n));
    std::sort(idx.begin(), idx.end());
    return idx;
}

struct TokenPlan {
    Token token;
    std::size_t support = 0;
    std::vector<std::size_t> noteIndices;  // into corpus.notes(), canonical id order
    FilterSet sharedFilters;               // uniform + onegram (context is per note)
};

struct TaskResult {
    double noteScore = 0.0;
    std::vector<double> deltas;
    std::vector<std::string> families;
    std::string noteId;
    std::string warning;
};

}  // namespace

SensitivityReport audit(const Classifier& f, const Corpus& corpus, const std::vector<Token>& tokens,
                        const FilterFamilyConfig& familyConfig, const AuditOptions& options) {
    if (tokens.empty()) throw ValidationError("audit needs a non-empty token set");
    if (options.workers < 1) throw ValidationError("audit needs at least one worker");

    // Dedupe, preserving first-seen order.
    std::vector<Token> order;
    for (const auto& u : tokens) {
        if (std::find(order.begin(), order.end(), u) == order.end()) order.push_back(u);
    }

    SensitivityReport report;
    report.classifierId = f.id();
    report.scheme = options.scheme;
    report.nominalFilterCount =
        familyConfig.uniformCount + familyConfig.onegramCount + familyConfig.contextCount;
    if (report.nominalFilterCount <= 0) throw ValidationError("audit needs at least one filter family");

    FilterSet uniformSet;
    if (familyConfig.uniformCount > 0) {
        uniformSet = buildUniformFilters(corpus.vocabulary(), familyConfig.uniformCount,
                                         familyConfig.seed);
    }
    std::unique_ptr<CooccurrenceProvider> ownedProvider;
    ContextProvider* provider = familyConfig.contextProvider;
    if (familyConfig.contextCount > 0 && provider == nullptr) {
        ownedProvider = std::make_unique<CooccurrenceProvider>(corpus);
        provider = ownedProvider.get();
    }

    std::vector<TokenPlan> plans;
    for (const auto& u : order) {
        CorpusView view = subsetContaining(corpus, u);
        if (view.empty()) {
            report.unsupported.push_back(u);
            continue;
        }
        TokenPlan plan;
        plan.token = u;
        plan.support = view.size();
        plan.sharedFilters = uniformSet;
        if (familyConfig.onegramCount > 0) {
            FilterSet onegram = buildOneGramFilters(view, u, familyConfig.onegramCount);
            if (onegram.truncated) {
                report.warnings.push_back("token '" + u + "': only " +
                                          std::to_string(onegram.size()) + " one-gram filters available");
            }
            plan.sharedFilters.append(onegram);
        }
        plan.noteIndices = view.indices();
        if (options.maxNotesPerToken > 0 && plan.noteIndices.size() > options.maxNotesPerToken) {
            const auto keep = sampleIndices(plan.noteIndices.size(), options.maxNotesPerToken,
                                            splitmix64(options.seed ^ fnv1a(u)));
            std::vector<std::size_t> sampled;
            sampled.reserve(keep.size());
            for (auto k : keep) sampled.push_back(plan.noteIndices[k]);
            plan.noteIndices = std::move(sampled);
        }
        plans.push_back(std::move(plan));
    }

    // Flatten (token, note) tasks.
    struct TaskRef {
        std::size_t planIdx;
        std::size_t noteSlot;
    };
    std::vector<TaskRef> taskRefs;
    for (std::size_t p = 0; p < plans.size(); ++p) {
        for (std::size_t n = 0; n < plans[p].noteIndices.size(); ++n) taskRefs.push_back({p, n});
    }
    std::vector<TaskResult> results(taskRefs.size());

    std::mutex serialMutex;
    const bool serialize = !f.threadSafe();
    auto predictGuarded = [&](const Note& note) {
        if (serialize) {
            std::lock_guard<std::mutex> lock(serialMutex);
            return f.predict(note);
        }
        return f.predict(note);
    };

    std::mutex providerMutex;  // co-occurrence lookups are read-only but wire providers are not
    auto runTask = [&](std::size_t t) {
        const TokenPlan& plan = plans[taskRefs[t].planIdx];
        const Note& note = corpus.notes()[plan.noteIndices[taskRefs[t].noteSlot]];
        TaskResult& out = results[t];
        out.noteId = note.id;

        FilterSet filters = plan.sharedFilters;
        if (familyConfig.contextCount > 0) {
            const auto first = std::find(note.tokens.begin(), note.tokens.end(), plan.token);
            const auto position = static_cast<std::size_t>(first - note.tokens.begin());
            FilterSet context;
            {
                std::lock_guard<std::mutex> lock(providerMutex);
                context = buildContextFilters(*provider, note, position, familyConfig.contextCount);
            }
            if (context.truncated) {
                out.warning = "token '" + plan.token + "' note '" + note.id + "': only " +
                              std::to_string(context.size()) + " context filters available";
            }
            filters.append(context);
        }
        if (options.maxFiltersPerNote > 0 && filters.size() > options.maxFiltersPerNote) {
            const auto keep =
                sampleIndices(filters.size(), options.maxFiltersPerNote,
                              splitmix64(options.seed ^ fnv1a(plan.token) ^ fnv1a(note.id)));
            FilterSet sampled;
            for (auto k : keep) {
                sampled.filters.push_back(filters.filters[k]);
                sampled.familyLabels.push_back(filters.familyLabels[k]);
            }
            filters = std::move(sampled);
        }

        const double before = predictGuarded(note);  // one call, reused across all filters
        out.deltas.reserve(filters.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < filters.size(); ++i) {
            double d = 0.0;
            try {
                const double after = predictGuarded(perturb(note, plan.token, filters.filters[i],
                                                            options.scheme));
                d = std::abs(before - after);
            } catch (const Error& e) {
                throw Error(std::string(e.what()) + " [token '" + plan.token + "', note '" + note.id +
                            "', filter " + filters.filters[i].provenance() + "]");
            }
            out.deltas.push_back(d);
            sum += d;
        }
        out.families = filters.familyLabels;
        out.noteScore = filters.size() == 0 ? 0.0 : sum / static_cast<double>(filters.size());
    };

    const int workers = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(options.workers), std::max<std::size_t>(taskRefs.size(), 1)));
    if (workers <= 1) {
        for (std::size_t t = 0; t < taskRefs.size(); ++t) runTask(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::mutex errorMutex;
        std::exception_ptr firstError;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t t = next.fetch_add(1);
                    if (t >= taskRefs.size()) return;
                    try {
                        runTask(t);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(errorMutex);
                        if (!firstError) firstError = std::current_exception();
                        next.store(taskRefs.size());
                        return;
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (firstError) std::rethrow_exception(firstError);
    }

    // Canonical reduce: token order, then ascending note id (the plan's note
    // order is already canonical).
    std::size_t cursor = 0;
    for (const auto& plan : plans) {
        TokenSensitivity ts;
        ts.token = plan.token;
        ts.support = plan.support;
        ts.evaluatedNotes = plan.noteIndices.size();

        double overallSum = 0.0;
        std::map<std::string, double> familySum;
        std::map<std::string, std::size_t> familyNotes;
        for (std::size_t n = 0; n < plan.noteIndices.size(); ++n, ++cursor) {
            const TaskResult& r = results[cursor];
            overallSum += r.noteScore;
            if (!r.warning.empty()) report.warnings.push_back(r.warning);

            std::map<std::string, double> perFamilySum;
            std::map<std::string, std::size_t> perFamilyCount;
            for (std::size_t i = 0; i < r.deltas.size(); ++i) {
                perFamilySum[r.families[i]] += r.deltas[i];
                perFamilyCount[r.families[i]] += 1;
            }
            for (const auto& [family, s] : perFamilySum) {
                familySum[family] += s / static_cast<double>(perFamilyCount[family]);
                familyNotes[family] += 1;
            }
            if (options.keepDetails) {
                report.noteLevel.push_back({plan.token, r.noteId, r.noteScore, r.deltas, r.families});
            } else {
                report.noteLevel.push_back({plan.token, r.noteId, r.noteScore, {}, {}});
            }
        }
        const double numNotes = static_cast<double>(plan.noteIndices.size());
        ts.overall = overallSum / numNotes;
        for (const auto& [family, s] : familySum) {
            ts.familyScores[family] = s / static_cast<double>(familyNotes[family]);
        }
        report.tokenOrder.push_back(plan.token);
        report.tokens.emplace(plan.token, std::move(ts));
    }

    if (!report.tokens.empty()) {
        std::map<Token, double> overallScores;
        for (const auto& [tok, ts] : report.tokens) overallScores[tok] = ts.overall;
        const Ranking ranking = rankTokens(overallScores, TiePolicy::Strict);
        for (auto& [tok, ts] : report.tokens) ts.rank = ranking.ranks.at(tok);
    }
    return report;
}

namespace {

std::string familyOrEmpty(const TokenSensitivity& ts, const std::string& family) {
    auto it = ts.familyScores.find(family);
    return it == ts.familyScores.end() ? std::string() : formatDouble(it->second);
}

}  // namespace

void writeReportCsv(const std::filesystem::path& path, const SensitivityReport& report) {
    std::vector<const TokenSensitivity*> rows;
    rows.reserve(report.tokens.size());
    for (const auto& [tok, ts] : report.tokens) rows.push_back(&ts);
    std::sort(rows.begin(), rows.end(),
              [](const TokenSensitivity* a, const TokenSensitivity* b) { return a->rank < b->rank; });

    std::ostringstream os;
    os << "token,support,overall,uniform_family,onegram_family,context_family,rank\n";
    for (const auto* ts : rows) {
        os << ts->token << "," << ts->support << "," << formatDouble(ts->overall) << ","
           << familyOrEmpty(*ts, "uniform") << "," << familyOrEmpty(*ts, "onegram") << ","
           << familyOrEmpty(*ts, "context") << "," << formatDouble(ts->rank) << "\n";
    }
    writeFileAtomic(path, os.str());
}

SensitivityReport readReportCsv(const std::filesystem::path& path) {
    const auto rows = readCsv(path);
    if (rows.empty() || rows[0].empty() || rows[0][0] != "token") {
        throw ParseError(path.string() + ": not a sensitivity report (expected token,... header)");
    }
    SensitivityReport report;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 7) {
            throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": expected 7 fields");
        }
        TokenSensitivity ts;
        ts.token = r[0];
        ts.support = static_cast<std::size_t>(std::stoull(r[1]));
        ts.overall = std::stod(r[2]);
        if (!r[3].empty()) ts.familyScores["uniform"] = std::stod(r[3]);
        if (!r[4].empty()) ts.familyScores["onegram"] = std::stod(r[4]);
        if (!r[5].empty()) ts.familyScores["context"] = std::stod(r[5]);
        ts.rank = std::stod(r[6]);
        report.tokenOrder.push_back(ts.token);
        report.tokens.emplace(ts.token, std::move(ts));
    }
    return report;
}

void writeNoteLevelJsonl(const std::filesystem::path& path, const SensitivityReport& report) {
    std::ostringstream os;
    for (const auto& row : report.noteLevel) {
        json obj;
        obj["token"] = row.token;
        obj["note_id"] = row.noteId;
        obj["score"] = row.score;
        if (!row.deltas.empty()) {
            obj["deltas"] = row.deltas;
            obj["families"] = row.families;
        }
        os << obj.dump() << "\n";
    }
    writeFileAtomic(path, os.str());
}

void writeUnsupportedList(const std::filesystem::path& path, const SensitivityReport& report) {
    std::ostringstream os;
    for (const auto& tok : report.unsupported) os << tok << "\n";
    writeFileAtomic(path, os.str());
}

}  // namespace sensaudit
