#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sensaudit {

struct EncounterRecord {
    std::string patientId;
    std::string encounterId;
    std::int64_t admitTime = 0;      // UTC seconds
    std::int64_t dischargeTime = 0;  // UTC seconds, >= admitTime
    std::string noteId;
};

enum class ReadmitLabel { Negative = 0, Positive = 1, Excluded };

struct LabeledEncounter {
    EncounterRecord record;
    ReadmitLabel label = ReadmitLabel::Negative;
    std::optional<double> intervalDays;  // next admit - this discharge, fractional days
};

struct LabelWarning {
    std::string patientId;
    std::string encounterId;
    std::string message;
};

struct LabelResult {
    std::vector<LabeledEncounter> encounters;  // ordered by (patient_id, admit_time, encounter_id)
    std::vector<LabelWarning> warnings;
};

// Per patient, encounters ordered by admission time; interval = next admit -
// current discharge; positive iff interval <= windowDays. Encounters with no
// subsequent admission that are discharged less than windowDays before the
// dataset's latest admission time are excluded (unobservable readmissions).
// A next admission before the current discharge is flagged and the interval
// clamped to 0.
LabelResult generateLabels(std::vector<EncounterRecord> encounters, double windowDays = 30.0);

// "1972-01-30T13:45:00" or with a space separator; date-only means midnight.
std::int64_t parseIso8601(const std::string& text);
std::string formatIso8601(std::int64_t utcSeconds);

}  // namespace sensaudit
