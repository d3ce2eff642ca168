#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "uniocc/config.hpp"
#include "uniocc/types.hpp"

namespace uniocc {

struct ValidationRecord {
    std::optional<std::string> card_id; // absent for anonymous media
    long timestamp = 0;                 // seconds since service-day midnight
    std::string course_id;
    std::string station_id;
};

struct Course {
    CourseKey key;
    std::vector<StopEvent> stops;
};

struct RejectedRow {
    std::string file;
    std::size_t row = 0;
    std::string reason;
};

struct NetworkDataset {
    std::unordered_map<std::string, Station> stations;
    // (line_id, direction) -> ordered station ids
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> routes;
    std::vector<Course> courses;
    std::unordered_map<std::string, std::size_t> course_index;
    std::vector<ValidationRecord> validations;
    // Courses where every stop carries a usable ApcMeasure.
    std::unordered_set<std::string> apc_coverage;
    std::vector<RejectedRow> rejects;

    const Course& course(const std::string& course_id) const;
    const std::vector<std::string>& route(const std::string& line_id, Direction dir) const;
};

struct InputPaths {
    std::string stations;
    std::string routes;
    std::string courses;
    std::string afc;
    std::string apc;

    // stations.csv / routes.csv / courses.csv / afc.csv / apc.csv under dir.
    static InputPaths in_dir(const std::string& dir);
};

// Parses and cross-references the five input files. Row-level problems are
// collected in dataset.rejects and loading continues; structural problems
// (missing file, missing column, empty network) throw.
NetworkDataset load_network(const InputPaths& paths, const Config& config);

struct LineCoverage {
    std::string line_id;
    Direction direction = Direction::outbound;
    std::size_t n_courses = 0;
    std::size_t n_covered = 0;
    double ratio = 0.0;
    bool kriging_only = false; // no APC-covered course at all
};

std::vector<LineCoverage> coverage_summary(const NetworkDataset& dataset);

} // namespace uniocc
