#include "sensaudit/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "sensaudit/classifier.hpp"
#include "sensaudit/corpus.hpp"
#include "sensaudit/errors.hpp"
#include "sensaudit/io.hpp"
#include "sensaudit/labels.hpp"
#include "sensaudit/metrics.hpp"
#include "sensaudit/sensitivity.hpp"
#include "sensaudit/stats.hpp"
#include "sensaudit/synthetic.hpp"
#include "sensaudit/wire.hpp"

namespace sensaudit::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 0;
    int workers = 1;
    std::string scheme = "one-swap";
};

using Resolved = std::vector<std::pair<std::string, std::string>>;

void writeResolvedConfig(const fs::path& dir, const std::string& subcommand,
                         const GlobalOptions& global, const Resolved& entries) {
    std::ostringstream os;
    os << "seed = " << global.seed << "\n";
    os << "workers = " << global.workers << "\n";
    os << "scheme = " << global.scheme << "\n";
    os << "\n[" << subcommand << "]\n";
    for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
    writeFileAtomic(dir / "config.resolved.ini", os.str());
}

// Which config keys hold filesystem paths, per subcommand, for rebasing
// relative to the config file.
const std::map<std::string, std::set<std::string>>& pathKeys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"labelgen", {"input", "output", "warnings"}},
        {"synth", {"spec", "out"}},
        {"train", {"corpus", "out"}},
        {"audit", {"corpus", "tokens", "out", "model", "stub-classifier"}},
        {"compare", {"a", "b", "out", "table"}},
        {"rank", {"scores", "out"}},
    };
    return keys;
}

std::string rebase(const fs::path& baseDir, const std::string& value) {
    if (value.empty()) return value;
    fs::path p(value);
    if (p.is_absolute()) return value;
    return (baseDir / p).string();
}

// Fill flags from "--config file" without overriding anything given
// explicitly: global keys are bare, subcommand keys live in [sections].
std::vector<std::string> mergeConfig(const std::vector<std::string>& args) {
    std::string configPath;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ValidationError("--config needs a file argument");
            configPath = args[++i];
            continue;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            configPath = args[i].substr(9);
            continue;
        }
        out.push_back(args[i]);
    }
    if (configPath.empty()) return out;

    const auto kv = readKeyValueConfig(configPath);
    const fs::path baseDir = fs::absolute(fs::path(configPath)).parent_path();

    std::string subcommand;
    for (const auto& a : out) {
        if (!a.empty() && a[0] != '-') {
            subcommand = a;
            break;
        }
    }
    std::set<std::string> present;
    for (const auto& a : out) {
        if (a.rfind("--", 0) == 0) present.insert(a.substr(2, a.find('=') - 2));
    }
    auto appendOption = [&](const std::string& key, std::string value, bool isPath) {
        if (present.count(key)) return;
        if (isPath) value = rebase(baseDir, value);
        if (value == "true" || value == "yes" || value == "on") {
            out.push_back("--" + key);
        } else if (value == "false" || value == "no" || value == "off") {
            // unset flag stays unset
        } else {
            out.push_back("--" + key);
            out.push_back(value);
        }
    };
    for (const auto& [key, value] : kv) {
        const auto dot = key.find('.');
        if (dot == std::string::npos) {
            if (key == "seed" || key == "workers" || key == "scheme") appendOption(key, value, false);
            continue;
        }
        const std::string section = key.substr(0, dot);
        const std::string name = key.substr(dot + 1);
        if (section != subcommand) continue;
        bool isPath = false;
        if (auto it = pathKeys().find(section); it != pathKeys().end()) isPath = it->second.count(name) > 0;
        if (name == "stub-classifier" && value.rfind("replay:", 0) == 0) {
            appendOption(name, "replay:" + rebase(baseDir, value.substr(7)), false);
            continue;
        }
        appendOption(name, value, isPath);
    }
    return out;
}

void printWarnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---------------------------------------------------------------- labelgen

int cmdLabelgen(const std::string& input, const std::string& output, double windowDays,
                const std::string& warningsPath) {
    const auto encounters = readEncountersCsv(input);
    const LabelResult result = generateLabels(encounters, windowDays);
    writeLabeledEncountersCsv(output, result);
    std::ostringstream warn;
    for (const auto& w : result.warnings) {
        warn << "patient " << w.patientId << " encounter " << w.encounterId << ": " << w.message
             << "\n";
        std::cerr << "warning: patient " << w.patientId << " encounter " << w.encounterId << ": "
                  << w.message << "\n";
    }
    if (!warningsPath.empty()) writeFileAtomic(warningsPath, warn.str());
    std::cout << "labeled " << result.encounters.size() << " encounters ("
              << result.warnings.size() << " warnings) -> " << output << "\n";
    return 0;
}

// ------------------------------------------------------------------- synth

int cmdSynth(const GlobalOptions& global, const std::string& specPath, const std::string& outDir,
             bool seedGiven) {
    SyntheticSpec spec = readSyntheticSpec(specPath);
    if (seedGiven) spec.seed = global.seed;
    const Corpus corpus = generateSynthetic(spec);
    fs::create_directories(outDir);
    writeCorpusJsonl(fs::path(outDir) / "corpus.jsonl", corpus);
    writeSyntheticSpec(fs::path(outDir) / "synth.resolved.ini", spec);

    std::size_t positives = 0;
    for (const auto& note : corpus.notes()) positives += note.label.value_or(0);
    std::cout << "generated " << corpus.size() << " notes, vocabulary " << corpus.vocabulary().size()
              << ", positives " << positives << " -> " << (fs::path(outDir) / "corpus.jsonl").string()
              << "\n";
    return 0;
}

// ------------------------------------------------------------------- train

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

SplitIndices splitLabeled(const Corpus& corpus, const std::vector<double>& fractions,
                          std::uint64_t seed) {
    std::vector<std::size_t> labeled;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (corpus.notes()[i].label) labeled.push_back(i);
    }
    std::mt19937_64 engine(seed);
    for (std::size_t i = labeled.size(); i > 1; --i) {
        std::swap(labeled[i - 1], labeled[engine() % i]);
    }
    const auto nTrain = static_cast<std::size_t>(fractions[0] * static_cast<double>(labeled.size()));
    const auto nVal = static_cast<std::size_t>(fractions[1] * static_cast<double>(labeled.size()));
    SplitIndices split;
    split.train.assign(labeled.begin(), labeled.begin() + static_cast<std::ptrdiff_t>(nTrain));
    split.val.assign(labeled.begin() + static_cast<std::ptrdiff_t>(nTrain),
                     labeled.begin() + static_cast<std::ptrdiff_t>(nTrain + nVal));
    split.test.assign(labeled.begin() + static_cast<std::ptrdiff_t>(nTrain + nVal), labeled.end());
    return split;
}

Corpus corpusFromIndices(const Corpus& corpus, const std::vector<std::size_t>& indices) {
    std::vector<Note> notes;
    notes.reserve(indices.size());
    for (auto i : indices) notes.push_back(corpus.notes()[i]);
    return Corpus::build(std::move(notes));
}

int cmdTrain(const GlobalOptions& global, const std::string& corpusPath, const std::string& outDir,
             double learningRate, int epochs, double targetRecall, const std::string& splitSpec,
             const std::string& classWeightSpec) {
    const Corpus corpus = readCorpusJsonl(corpusPath);

    std::vector<double> fractions;
    {
        std::istringstream is(splitSpec);
        std::string part;
        while (std::getline(is, part, ',')) fractions.push_back(std::stod(part));
        if (fractions.size() != 3) throw ValidationError("--split needs train,val,test fractions");
        const double sum = fractions[0] + fractions[1] + fractions[2];
        if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("--split fractions must sum to 1");
    }

    const SplitIndices split = splitLabeled(corpus, fractions, global.seed);
    if (split.train.empty() || split.val.empty() || split.test.empty()) {
        throw ValidationError("split produced an empty partition; corpus too small");
    }
    const Corpus trainCorpus = corpusFromIndices(corpus, split.train);

    TrainConfig config;
    config.learningRate = learningRate;
    config.epochs = epochs;
    config.seed = global.seed;
    if (classWeightSpec != "auto") {
        std::istringstream is(classWeightSpec);
        std::string pos;
        std::string neg;
        if (!std::getline(is, pos, ',') || !std::getline(is, neg, ',')) {
            throw ValidationError("--class-weights wants 'auto' or pos,neg");
        }
        config.positiveWeight = std::stod(pos);
        config.negativeWeight = std::stod(neg);
    }

    const TrainResult trained = trainLinear(trainCorpus, config);

    auto evaluate = [&](const std::vector<std::size_t>& indices, std::vector<double>& scores,
                        std::vector<int>& labels) {
        scores.clear();
        labels.clear();
        for (auto i : indices) {
            scores.push_back(trained.model.predict(corpus.notes()[i]));
            labels.push_back(*corpus.notes()[i].label);
        }
    };
    std::vector<double> valScores;
    std::vector<int> valLabels;
    evaluate(split.val, valScores, valLabels);
    std::vector<double> testScores;
    std::vector<int> testLabels;
    evaluate(split.test, testScores, testLabels);

    const double valAuroc = auroc(valScores, valLabels);
    const double valAuprc = auprc(valScores, valLabels);
    const double testAuroc = auroc(testScores, testLabels);
    const double testAuprc = auprc(testScores, testLabels);
    const ThresholdCalibration calib = calibrateThreshold(valScores, valLabels, targetRecall);

    fs::create_directories(outDir);
    trained.model.save(fs::path(outDir) / "model.tsv");
    {
        std::ostringstream os;
        os << "train_notes = " << split.train.size() << "\n";
        os << "val_notes = " << split.val.size() << "\n";
        os << "test_notes = " << split.test.size() << "\n";
        os << "positive_weight = " << formatDouble(trained.classWeights.positiveWeight) << "\n";
        os << "negative_weight = " << formatDouble(trained.classWeights.negativeWeight) << "\n";
        os << "final_train_loss = " << formatDouble(trained.finalLoss) << "\n";
        os << "val_auroc = " << formatDouble(valAuroc) << "\n";
        os << "val_auprc = " << formatDouble(valAuprc) << "\n";
        os << "test_auroc = " << formatDouble(testAuroc) << "\n";
        os << "test_auprc = " << formatDouble(testAuprc) << "\n";
        os << "target_recall = " << formatDouble(targetRecall) << "\n";
        os << "threshold = " << formatDouble(calib.threshold) << "\n";
        os << "recall_at_threshold = " << formatDouble(calib.recallAtThreshold) << "\n";
        writeFileAtomic(fs::path(outDir) / "metrics.ini", os.str());
    }
    writeResolvedConfig(outDir, "train", global,
                        {{"corpus", fs::absolute(corpusPath).string()},
                         {"out", fs::absolute(outDir).string()},
                         {"lr", formatDouble(learningRate)},
                         {"epochs", std::to_string(epochs)},
                         {"target-recall", formatDouble(targetRecall)},
                         {"split", splitSpec},
                         {"class-weights", classWeightSpec}});

    std::cout << "model -> " << (fs::path(outDir) / "model.tsv").string() << "\n"
              << "val auroc " << valAuroc << " auprc " << valAuprc << "\n"
              << "test auroc " << testAuroc << " auprc " << testAuprc << "\n"
              << "threshold " << calib.threshold << " (recall " << calib.recallAtThreshold << ")\n";
    return 0;
}

// ------------------------------------------------------------------- audit

int cmdAudit(const GlobalOptions& global, const std::string& corpusPath, const std::string& tokensPath,
             const std::string& outDir, const std::string& modelPath, double constantValue,
             bool constantGiven, const std::string& externalSpec, const std::string& stubSpec,
             const std::string& contextProviderSpec, int uniformCount, int onegramCount,
             int contextCount, std::size_t maxNotes, std::size_t maxFilters, bool details) {
    const Corpus corpus = readCorpusJsonl(corpusPath);
    const std::vector<Token> tokens = readTokenList(tokensPath);
    if (tokens.empty()) throw ValidationError("token set file " + tokensPath + " is empty");

    int chosen = 0;
    chosen += modelPath.empty() ? 0 : 1;
    chosen += constantGiven ? 1 : 0;
    chosen += externalSpec.empty() ? 0 : 1;
    chosen += stubSpec.empty() ? 0 : 1;
    if (chosen != 1) {
        throw ValidationError(
            "choose exactly one classifier: --model, --constant, --external, or --stub-classifier");
    }
    std::unique_ptr<Classifier> classifier;
    if (!modelPath.empty()) {
        classifier = std::make_unique<TfidfLinearClassifier>(TfidfLinearClassifier::load(modelPath));
    } else if (constantGiven) {
        classifier = std::make_unique<ConstantClassifier>(constantValue);
    } else if (!externalSpec.empty()) {
        classifier = std::make_unique<wire::ExternalClassifier>(externalSpec);
    } else {
        if (stubSpec.rfind("replay:", 0) != 0) {
            throw ValidationError("--stub-classifier expects replay:<file>");
        }
        classifier = std::make_unique<wire::ReplayClassifier>(
            wire::ReplayClassifier::fromFile(stubSpec.substr(7)));
    }

    std::unique_ptr<wire::WireContextProvider> wireProvider;
    FilterFamilyConfig familyConfig;
    familyConfig.uniformCount = uniformCount;
    familyConfig.onegramCount = onegramCount;
    familyConfig.contextCount = contextCount;
    familyConfig.seed = global.seed;
    if (contextProviderSpec != "fallback") {
        wireProvider = std::make_unique<wire::WireContextProvider>(contextProviderSpec);
        familyConfig.contextProvider = wireProvider.get();
    }

    AuditOptions options;
    options.scheme = parseSwapScheme(global.scheme);
    options.workers = global.workers;
    options.seed = global.seed;
    options.maxNotesPerToken = maxNotes;
    options.maxFiltersPerNote = maxFilters;
    options.keepDetails = details;

    const SensitivityReport report = audit(*classifier, corpus, tokens, familyConfig, options);

    fs::create_directories(outDir);
    writeReportCsv(fs::path(outDir) / "report.csv", report);
    writeUnsupportedList(fs::path(outDir) / "unsupported.txt", report);
    if (details) writeNoteLevelJsonl(fs::path(outDir) / "note_level.jsonl", report);

    Resolved resolved = {{"corpus", fs::absolute(corpusPath).string()},
                         {"tokens", fs::absolute(tokensPath).string()},
                         {"out", fs::absolute(outDir).string()},
                         {"uniform", std::to_string(uniformCount)},
                         {"onegram", std::to_string(onegramCount)},
                         {"context", std::to_string(contextCount)},
                         {"context-provider", contextProviderSpec},
                         {"max-notes", std::to_string(maxNotes)},
                         {"max-filters", std::to_string(maxFilters)},
                         {"details", details ? "true" : "false"}};
    if (!modelPath.empty()) resolved.emplace_back("model", fs::absolute(modelPath).string());
    if (constantGiven) resolved.emplace_back("constant", formatDouble(constantValue));
    if (!externalSpec.empty()) resolved.emplace_back("external", externalSpec);
    if (!stubSpec.empty()) resolved.emplace_back("stub-classifier", stubSpec);
    writeResolvedConfig(outDir, "audit", global, resolved);

    printWarnings(report.warnings);
    std::cout << "audited " << report.tokens.size() << " tokens (" << report.unsupported.size()
              << " unsupported) with " << swapSchemeName(report.scheme) << " -> "
              << (fs::path(outDir) / "report.csv").string() << "\n";
    return 0;
}

// ----------------------------------------------------------------- compare

Ranking loadRanksAuto(const std::string& path) {
    const auto rows = readCsv(path);
    if (rows.empty()) throw ParseError(path + ": empty ranking file");
    const auto& header = rows[0];
    Ranking ranking;
    if (!header.empty() && header[0] == "token" && header.size() >= 7 && header[1] == "support") {
        const SensitivityReport report = readReportCsv(path);
        for (const auto& [tok, ts] : report.tokens) ranking.ranks[tok] = ts.rank;
        ranking.source = "report:" + path;
        return ranking;
    }
    if (header.size() == 2 && header[0] == "token" && header[1] == "rank") {
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].size() != 2) throw ParseError(path + ":" + std::to_string(i + 1) + ": want 2 fields");
            ranking.ranks[rows[i][0]] = std::stod(rows[i][1]);
        }
        ranking.source = "ranks:" + path;
        return ranking;
    }
    if (header.size() == 3 && header[0] == "token" && header[1] == "rater_id" && header[2] == "score") {
        std::map<std::string, std::map<Token, double>> perRater;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].size() != 3) throw ParseError(path + ":" + std::to_string(i + 1) + ": want 3 fields");
            perRater[rows[i][1]][rows[i][0]] = std::stod(rows[i][2]);
        }
        Ranking combined = combineRaters(perRater).combined;
        combined.source = "raters:" + path;
        return combined;
    }
    throw ParseError(path + ": unrecognized ranking format (report, token/rank, or token/rater_id/score)");
}

int cmdCompare(const std::string& pathA, const std::string& pathB, const std::string& outPath,
               const std::string& tablePath) {
    const Ranking a = loadRanksAuto(pathA);
    const Ranking b = loadRanksAuto(pathB);
    const SpearmanResult paper = spearman(a, b, SpearmanVariant::PaperFormula);
    const SpearmanResult tieCorrected = spearman(a, b, SpearmanVariant::TieCorrected);

    std::ostringstream os;
    os << "a = " << a.source << "\n";
    os << "b = " << b.source << "\n";
    os << "n = " << paper.n << "\n";
    os << "sum_d2 = " << formatDouble(paper.sumSquaredDiff) << "\n";
    os << "spearman_paper_formula = " << formatDouble(paper.coefficient) << "\n";
    os << "spearman_tie_corrected = " << formatDouble(tieCorrected.coefficient) << "\n";
    writeFileAtomic(outPath, os.str());
    std::cout << os.str();

    if (!tablePath.empty()) {
        std::ostringstream table;
        table << "token,rank_a,rank_b\n";
        for (const auto& [tok, rank] : a.ranks) {
            table << tok << "," << formatDouble(rank) << "," << formatDouble(b.ranks.at(tok)) << "\n";
        }
        writeFileAtomic(tablePath, table.str());
    }
    return 0;
}

// -------------------------------------------------------------------- rank

int cmdRank(const std::string& scoresPath, const std::string& policyName, const std::string& outPath) {
    const auto rows = readCsv(scoresPath);
    if (rows.empty() || rows[0].size() != 2 || rows[0][0] != "token" || rows[0][1] != "score") {
        throw ParseError(scoresPath + ": expected header token,score");
    }
    std::map<Token, double> scores;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 2) throw ParseError(scoresPath + ":" + std::to_string(i + 1) + ": want 2 fields");
        scores[rows[i][0]] = std::stod(rows[i][1]);
    }
    TiePolicy policy;
    if (policyName == "strict") policy = TiePolicy::Strict;
    else if (policyName == "competition") policy = TiePolicy::Competition;
    else if (policyName == "average") policy = TiePolicy::Average;
    else throw ValidationError("unknown tie policy '" + policyName + "'");

    const Ranking ranking = rankTokens(scores, policy);
    std::ostringstream os;
    os << "token,score,rank\n";
    for (const auto& tok : ranking.orderedTokens()) {
        os << tok << "," << formatDouble(scores.at(tok)) << "," << formatDouble(ranking.ranks.at(tok))
           << "\n";
    }
    writeFileAtomic(outPath, os.str());
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& rawArgs) {
    try {
        const std::vector<std::string> args = mergeConfig(rawArgs);

        CLI::App app{"token sensitivity auditing for text classifiers"};
        app.require_subcommand(1);
        app.fallthrough();

        GlobalOptions global;
        auto* seedOpt = app.add_option("--seed", global.seed, "global random seed");
        app.add_option("--workers", global.workers, "worker threads for the audit engine");
        app.add_option("--scheme", global.scheme, "one-swap | multi-swap")
            ->check(CLI::IsMember({"one-swap", "multi-swap", "one_swap", "multi_swap"}));

        // labelgen
        auto* labelgen = app.add_subcommand("labelgen", "generate 30-day readmission labels");
        std::string lgInput;
        std::string lgOutput;
        std::string lgWarnings;
        double lgWindow = 30.0;
        labelgen->add_option("--input", lgInput, "encounters CSV")->required();
        labelgen->add_option("--output", lgOutput, "labeled CSV destination")->required();
        labelgen->add_option("--window-days", lgWindow, "readmission window in days");
        labelgen->add_option("--warnings", lgWarnings, "also write warnings to this file");

        // synth
        auto* synth = app.add_subcommand("synth", "generate a seeded synthetic corpus");
        std::string synSpec;
        std::string synOut;
        synth->add_option("--spec", synSpec, "synthetic spec (key = value)")->required();
        synth->add_option("--out", synOut, "output directory")->required();

        // train
        auto* train = app.add_subcommand("train", "train the tf-idf + linear classifier");
        std::string trCorpus;
        std::string trOut;
        double trLr = 0.5;
        int trEpochs = 400;
        double trTargetRecall = 0.7;
        std::string trSplit = "0.7,0.15,0.15";
        std::string trClassWeights = "auto";
        train->add_option("--corpus", trCorpus, "labeled corpus JSONL")->required();
        train->add_option("--out", trOut, "output directory")->required();
        train->add_option("--lr", trLr, "learning rate");
        train->add_option("--epochs", trEpochs, "full-batch epochs");
        train->add_option("--target-recall", trTargetRecall, "recall target for threshold calibration");
        train->add_option("--split", trSplit, "train,val,test fractions");
        train->add_option("--class-weights", trClassWeights, "'auto' or pos,neg");

        // audit
        auto* auditCmd = app.add_subcommand("audit", "compute token sensitivity scores");
        std::string auCorpus;
        std::string auTokens;
        std::string auOut;
        std::string auModel;
        double auConstant = 0.0;
        std::string auExternal;
        std::string auStub;
        std::string auProvider = "fallback";
        int auUniform = 5;
        int auOnegram = 5;
        int auContext = 5;
        std::size_t auMaxNotes = 0;
        std::size_t auMaxFilters = 0;
        bool auDetails = false;
        auditCmd->add_option("--corpus", auCorpus, "evaluation corpus JSONL")->required();
        auditCmd->add_option("--tokens", auTokens, "tokens of interest, one per line")->required();
        auditCmd->add_option("--out", auOut, "output directory")->required();
        auditCmd->add_option("--model", auModel, "tfidf_linear model file");
        auto* constantOpt = auditCmd->add_option("--constant", auConstant, "constant classifier value");
        auditCmd->add_option("--external", auExternal, "external classifier endpoint (tcp:/cmd:)");
        auditCmd->add_option("--stub-classifier", auStub, "replay:<file> recorded probabilities");
        auditCmd->add_option("--context-provider", auProvider,
                             "'fallback' co-occurrence or a wire endpoint");
        auditCmd->add_option("--uniform", auUniform, "uniform filters per token");
        auditCmd->add_option("--onegram", auOnegram, "one-gram filters per token");
        auditCmd->add_option("--context", auContext, "context filters per note");
        auditCmd->add_option("--max-notes", auMaxNotes, "subsample notes per token (0 = off)");
        auditCmd->add_option("--max-filters", auMaxFilters, "subsample filters per note (0 = off)");
        auditCmd->add_flag("--details", auDetails, "emit note-level detail JSONL");

        // compare
        auto* compare = app.add_subcommand("compare", "rank correlation between two rankings");
        std::string cmpA;
        std::string cmpB;
        std::string cmpOut;
        std::string cmpTable;
        compare->add_option("--a", cmpA, "report.csv, token/rank CSV, or rater CSV")->required();
        compare->add_option("--b", cmpB, "report.csv, token/rank CSV, or rater CSV")->required();
        compare->add_option("--out", cmpOut, "correlation report destination")->required();
        compare->add_option("--table", cmpTable, "also write token,rank_a,rank_b CSV here");

        // rank
        auto* rank = app.add_subcommand("rank", "rank tokens by score");
        std::string rkScores;
        std::string rkOut;
        std::string rkPolicy = "strict";
        rank->add_option("--scores", rkScores, "token,score CSV")->required();
        rank->add_option("--out", rkOut, "ranking CSV destination")->required();
        rank->add_option("--tie-policy", rkPolicy, "strict | competition | average");

        std::vector<std::string> argv(args.rbegin(), args.rend());
        try {
            app.parse(argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }

        if (labelgen->parsed()) return cmdLabelgen(lgInput, lgOutput, lgWindow, lgWarnings);
        if (synth->parsed()) return cmdSynth(global, synSpec, synOut, seedOpt->count() > 0);
        if (train->parsed())
            return cmdTrain(global, trCorpus, trOut, trLr, trEpochs, trTargetRecall, trSplit,
                            trClassWeights);
        if (auditCmd->parsed())
            return cmdAudit(global, auCorpus, auTokens, auOut, auModel, auConstant,
                            constantOpt->count() > 0, auExternal, auStub, auProvider, auUniform,
                            auOnegram, auContext, auMaxNotes, auMaxFilters, auDetails);
        if (compare->parsed()) return cmdCompare(cmpA, cmpB, cmpOut, cmpTable);
        if (rank->parsed()) return cmdRank(rkScores, rkPolicy, rkOut);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sensaudit::cli
