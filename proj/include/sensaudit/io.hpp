#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sensaudit/corpus.hpp"
#include "sensaudit/labels.hpp"

namespace sensaudit {

// Write via temp file + rename so interrupted runs never leave partial files.
void writeFileAtomic(const std::filesystem::path& path, const std::string& content);

std::string readFile(const std::filesystem::path& path);

// One JSON object per line: {"id": ..., "text": ...} for raw notes or
// {"id": ..., "tokens": [...]} pre-tokenized, optional "label" 0/1.
// Raw text is tokenized with the default policy; pre-tokenized tokens pass
// through the same normalization.
Corpus readCorpusJsonl(const std::filesystem::path& path);

// Pre-tokenized form; reading it back reproduces the corpus exactly.
void writeCorpusJsonl(const std::filesystem::path& path, const Corpus& corpus);

// Minimal CSV: comma-separated, no embedded commas or quotes in fields.
std::vector<std::vector<std::string>> readCsv(const std::filesystem::path& path);

std::vector<EncounterRecord> readEncountersCsv(const std::filesystem::path& path);
void writeLabeledEncountersCsv(const std::filesystem::path& path, const LabelResult& result);

// Flat "key = value" config with [section] headers; keys are returned as
// "section.key". Lines starting with '#' are comments.
std::map<std::string, std::string> readKeyValueConfig(const std::filesystem::path& path);

// One token per line; blank lines and '#' comments skipped.
std::vector<Token> readTokenList(const std::filesystem::path& path);

// Shortest round-trip formatting for doubles.
std::string formatDouble(double value);

}  // namespace sensaudit
