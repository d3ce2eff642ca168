#pragma once

#include <optional>
#include <string>
#include <vector>

namespace uniocc {

enum class Direction { outbound, inbound };

inline const char* to_string(Direction d) {
    return d == Direction::outbound ? "outbound" : "inbound";
}

std::optional<Direction> direction_from_string(const std::string& s);

struct Station {
    std::string station_id;
    std::string name;
    double lon = 0.0; // degrees, [-180, 180]
    double lat = 0.0; // degrees, [-90, 90]
};

struct CourseKey {
    std::string course_id;
    std::string line_id;
    Direction direction = Direction::outbound;
    std::string service_date; // ISO yyyy-mm-dd
    long start_time_s = 0;    // seconds since service-day midnight
};

// Counting-cell measures at one stop. At least occupancy_after or the
// boardings/alightings pair must be present.
struct ApcMeasure {
    std::optional<long> boardings;
    std::optional<long> alightings;
    std::optional<long> occupancy_after;

    bool usable() const {
        return occupancy_after.has_value() ||
               (boardings.has_value() && alightings.has_value());
    }
};

struct StopEvent {
    std::string station_id;
    int seq = 0; // 1-based position on the course
    long boardings_afc = 0;
    std::optional<ApcMeasure> apc;
};

enum class ProfileSource { apc_measured, unified_mean_rate, unified_kriged, baseline };

inline const char* to_string(ProfileSource s) {
    switch (s) {
        case ProfileSource::apc_measured: return "apc_measured";
        case ProfileSource::unified_mean_rate: return "unified_mean_rate";
        case ProfileSource::unified_kriged: return "unified_kriged";
        default: return "baseline";
    }
}

// Per-course occupancy vectors, one entry per stop (index 0 == seq 1).
// Invariant once unified: total[i] == ticketing[i] + fraud[i], last entry 0.
struct OccupancyProfile {
    CourseKey course;
    std::vector<double> ticketing;
    std::vector<double> fraud;
    std::vector<double> total;
    std::vector<double> alightings_ticketing;
    ProfileSource source = ProfileSource::apc_measured;
};

} // namespace uniocc
