#include "sensaudit/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sensaudit/errors.hpp"

namespace sensaudit {

using nlohmann::json;

void writeFileAtomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

std::string readFile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Corpus readCorpusJsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file " + path.string());
    std::vector<Note> notes;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineNo) + ": " + e.what());
        }
        Note note;
        if (!obj.contains("id") || !obj["id"].is_string()) {
            throw ParseError(path.string() + ":" + std::to_string(lineNo) + ": missing string 'id'");
        }
        note.id = obj["id"].get<std::string>();
        if (obj.contains("tokens")) {
            for (const auto& t : obj["tokens"]) {
                Token tok = normalizeToken(t.get<std::string>());
                if (!tok.empty()) note.tokens.push_back(std::move(tok));
            }
        } else if (obj.contains("text")) {
            note.tokens = tokenize(obj["text"].get<std::string>());
        } else {
            throw ParseError(path.string() + ":" + std::to_string(lineNo) +
                             ": note needs 'text' or 'tokens'");
        }
        if (obj.contains("label") && !obj["label"].is_null()) {
            const int label = obj["label"].get<int>();
            if (label != 0 && label != 1) {
                throw ParseError(path.string() + ":" + std::to_string(lineNo) + ": label must be 0 or 1");
            }
            note.label = label;
        }
        notes.push_back(std::move(note));
    }
    return Corpus::build(std::move(notes));
}

void writeCorpusJsonl(const std::filesystem::path& path, const Corpus& corpus) {
    std::ostringstream os;
    for (const Note& note : corpus.notes()) {
        json obj;
        obj["id"] = note.id;
        obj["tokens"] = note.tokens;
        if (note.label) obj["label"] = *note.label;
        os << obj.dump() << "\n";
    }
    writeFileAtomic(path, os.str());
}

std::vector<std::vector<std::string>> readCsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

std::vector<EncounterRecord> readEncountersCsv(const std::filesystem::path& path) {
    auto rows = readCsv(path);
    if (rows.empty()) return {};
    const std::vector<std::string> expected = {"patient_id", "encounter_id", "admit_time",
                                               "discharge_time", "note_id"};
    if (rows[0] != expected) {
        throw ParseError(path.string() +
                         ":1: expected header patient_id,encounter_id,admit_time,discharge_time,note_id");
    }
    std::vector<EncounterRecord> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 5) {
            throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": expected 5 fields, got " +
                             std::to_string(r.size()));
        }
        EncounterRecord rec;
        rec.patientId = r[0];
        rec.encounterId = r[1];
        try {
            rec.admitTime = parseIso8601(r[2]);
            rec.dischargeTime = parseIso8601(r[3]);
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
        rec.noteId = r[4];
        out.push_back(std::move(rec));
    }
    return out;
}

namespace {

std::string formatDays(double days) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", days);
    return buf;
}

}  // namespace

void writeLabeledEncountersCsv(const std::filesystem::path& path, const LabelResult& result) {
    std::ostringstream os;
    os << "patient_id,encounter_id,admit_time,discharge_time,note_id,label,interval_days\n";
    for (const auto& e : result.encounters) {
        os << e.record.patientId << "," << e.record.encounterId << ","
           << formatIso8601(e.record.admitTime) << "," << formatIso8601(e.record.dischargeTime) << ","
           << e.record.noteId << ",";
        switch (e.label) {
            case ReadmitLabel::Negative: os << "0"; break;
            case ReadmitLabel::Positive: os << "1"; break;
            case ReadmitLabel::Excluded: os << "excluded"; break;
        }
        os << ",";
        if (e.intervalDays) os << formatDays(*e.intervalDays);
        os << "\n";
    }
    writeFileAtomic(path, os.str());
}

std::map<std::string, std::string> readKeyValueConfig(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    std::string section;
    std::size_t lineNo = 0;
    auto trim = [](std::string s) {
        const char* ws = " \t\r\n";
        auto b = s.find_first_not_of(ws);
        auto e = s.find_last_not_of(ws);
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineNo;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path.string() + ":" + std::to_string(lineNo) + ": expected key = value");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw ParseError(path.string() + ":" + std::to_string(lineNo) + ": empty key");
        }
        out[section.empty() ? key : section + "." + key] = value;
    }
    return out;
}

std::vector<Token> readTokenList(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open token list " + path.string());
    std::vector<Token> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t;
        for (char c : line) {
            if (c == '#') break;
            t.push_back(c);
        }
        auto tokens = tokenize(t);
        for (auto& tok : tokens) out.push_back(std::move(tok));
    }
    return out;
}

std::string formatDouble(double value) {
    char buf[64];
    // %.17g round-trips; trim to the shortest representation that still does.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
        double parsed = 0.0;
        std::sscanf(buf, "%lf", &parsed);
        if (parsed == value) break;
    }
    return buf;
}

}  // namespace sensaudit
