#include "sensaudit/labels.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "sensaudit/errors.hpp"

namespace sensaudit {

namespace {

constexpr double kSecondsPerDay = 86400.0;

// Days since 1970-01-01 for a proleptic Gregorian civil date
// (Howard Hinnant's algorithm).
std::int64_t daysFromCivil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civilFromDays(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

std::int64_t parseIso8601(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0;
    int fields = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s);
    if (fields == 3) {
        // date-only
    } else if (fields == 7 && (sep == 'T' || sep == ' ' || sep == 't')) {
        // full timestamp
    } else {
        throw ParseError("invalid ISO-8601 timestamp: '" + text + "'");
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 ||
        s > 60) {
        throw ParseError("invalid ISO-8601 timestamp: '" + text + "'");
    }
    return daysFromCivil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string formatIso8601(std::int64_t utcSeconds) {
    std::int64_t days = utcSeconds / 86400;
    std::int64_t rem = utcSeconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, m, d;
    civilFromDays(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lld", y, m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem % 3600) / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

LabelResult generateLabels(std::vector<EncounterRecord> encounters, double windowDays) {
    if (windowDays <= 0.0) throw ValidationError("window_days must be positive");

    std::set<std::pair<std::string, std::string>> keys;
    std::int64_t latestAdmit = INT64_MIN;
    for (const auto& e : encounters) {
        if (e.dischargeTime < e.admitTime) {
            throw ValidationError("encounter " + e.encounterId + " of patient " + e.patientId +
                                  " discharges before it admits");
        }
        if (!keys.emplace(e.patientId, e.encounterId).second) {
            throw ValidationError("duplicate encounter (" + e.patientId + ", " + e.encounterId + ")");
        }
        latestAdmit = std::max(latestAdmit, e.admitTime);
    }

    std::map<std::string, std::vector<EncounterRecord>> byPatient;
    for (auto& e : encounters) byPatient[e.patientId].push_back(std::move(e));

    LabelResult result;
    const double windowSeconds = windowDays * kSecondsPerDay;
    for (auto& [patient, recs] : byPatient) {
        std::sort(recs.begin(), recs.end(), [](const EncounterRecord& a, const EncounterRecord& b) {
            if (a.admitTime != b.admitTime) return a.admitTime < b.admitTime;
            return a.encounterId < b.encounterId;
        });
        for (std::size_t i = 0; i < recs.size(); ++i) {
            LabeledEncounter out;
            out.record = recs[i];
            if (i + 1 < recs.size()) {
                double interval =
                    static_cast<double>(recs[i + 1].admitTime - recs[i].dischargeTime) / kSecondsPerDay;
                if (interval < 0.0) {
                    result.warnings.push_back(
                        {patient, recs[i].encounterId,
                         "next admission precedes discharge; interval clamped to 0"});
                    interval = 0.0;
                }
                out.intervalDays = interval;
                out.label = interval <= windowDays ? ReadmitLabel::Positive : ReadmitLabel::Negative;
            } else {
                // No observed readmission. Only trust the negative when the
                // dataset horizon extends at least windowDays past discharge.
                const double headroom = static_cast<double>(latestAdmit - recs[i].dischargeTime);
                out.label = headroom >= windowSeconds ? ReadmitLabel::Negative : ReadmitLabel::Excluded;
            }
            result.encounters.push_back(std::move(out));
        }
    }
    return result;
}

}  // namespace sensaudit
