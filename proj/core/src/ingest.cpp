#include "uniocc/ingest.hpp"

#include <algorithm>
#include <charconv>

#include "uniocc/csv.hpp"
#include "uniocc/errors.hpp"

namespace uniocc {

namespace {

std::optional<long> parse_long(const std::string& s) {
    if (s.empty()) return std::nullopt;
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

} // namespace

const Course& NetworkDataset::course(const std::string& course_id) const {
    auto it = course_index.find(course_id);
    if (it == course_index.end())
        throw ReferentialError("unknown course " + course_id);
    return courses[it->second];
}

const std::vector<std::string>& NetworkDataset::route(const std::string& line_id,
                                                      Direction dir) const {
    auto it = routes.find({line_id, to_string(dir)});
    if (it == routes.end())
        throw ReferentialError("unknown route " + line_id + "/" + to_string(dir));
    return it->second;
}

InputPaths InputPaths::in_dir(const std::string& dir) {
    InputPaths p;
    p.stations = dir + "/stations.csv";
    p.routes = dir + "/routes.csv";
    p.courses = dir + "/courses.csv";
    p.afc = dir + "/afc.csv";
    p.apc = dir + "/apc.csv";
    return p;
}

namespace {

void load_stations(const std::string& path, NetworkDataset& ds) {
    csv::Reader r(path);
    auto c_id = r.column("station_id");
    auto c_name = r.column("name");
    auto c_lon = r.column("lon");
    auto c_lat = r.column("lat");
    std::vector<std::string> row;
    while (r.next(row)) {
        auto lon = parse_double(row[c_lon]);
        auto lat = parse_double(row[c_lat]);
        if (row[c_id].empty() || !lon || !lat) {
            ds.rejects.push_back({"stations.csv", r.line(), "missing/mistyped field"});
            continue;
        }
        if (*lon < -180.0 || *lon > 180.0 || *lat < -90.0 || *lat > 90.0) {
            ds.rejects.push_back({"stations.csv", r.line(), "coordinates out of range"});
            continue;
        }
        if (ds.stations.count(row[c_id])) {
            ds.rejects.push_back({"stations.csv", r.line(), "duplicate station_id " + row[c_id]});
            continue;
        }
        ds.stations[row[c_id]] = Station{row[c_id], row[c_name], *lon, *lat};
    }
}

void load_routes(const std::string& path, NetworkDataset& ds) {
    csv::Reader r(path);
    auto c_line = r.column("line_id");
    auto c_dir = r.column("direction");
    auto c_seq = r.column("seq");
    auto c_station = r.column("station_id");
    // (line, dir) -> seq -> station
    std::map<std::pair<std::string, std::string>, std::map<long, std::string>> raw;
    std::vector<std::string> row;
    while (r.next(row)) {
        auto dir = direction_from_string(row[c_dir]);
        auto seq = parse_long(row[c_seq]);
        if (!dir || !seq || row[c_line].empty()) {
            ds.rejects.push_back({"routes.csv", r.line(), "missing/mistyped field"});
            continue;
        }
        if (!ds.stations.count(row[c_station])) {
            ds.rejects.push_back({"routes.csv", r.line(),
                                  "unknown station " + row[c_station]});
            continue;
        }
        raw[{row[c_line], row[c_dir]}][*seq] = row[c_station];
    }
    for (auto& [key, by_seq] : raw) {
        // seq must be contiguous 1..N with N >= 2
        bool ok = by_seq.size() >= 2;
        long expect = 1;
        for (auto& [seq, _] : by_seq)
            if (seq != expect++) ok = false;
        if (!ok) {
            ds.rejects.push_back({"routes.csv", 0,
                                  "route " + key.first + "/" + key.second +
                                      " has non-contiguous or too-short stop sequence"});
            continue;
        }
        std::vector<std::string> order;
        order.reserve(by_seq.size());
        for (auto& [_, station] : by_seq) order.push_back(station);
        ds.routes[key] = std::move(order);
    }
}

void load_courses(const std::string& path, NetworkDataset& ds) {
    csv::Reader r(path);
    auto c_id = r.column("course_id");
    auto c_line = r.column("line_id");
    auto c_dir = r.column("direction");
    auto c_date = r.column("service_date");
    auto c_start = r.column("start_time");
    std::vector<std::string> row;
    while (r.next(row)) {
        auto dir = direction_from_string(row[c_dir]);
        auto start = parse_long(row[c_start]);
        if (row[c_id].empty() || !dir || !start || row[c_date].empty()) {
            ds.rejects.push_back({"courses.csv", r.line(), "missing/mistyped field"});
            continue;
        }
        auto route_it = ds.routes.find({row[c_line], row[c_dir]});
        if (route_it == ds.routes.end()) {
            ds.rejects.push_back({"courses.csv", r.line(),
                                  "unknown route " + row[c_line] + "/" + row[c_dir]});
            continue;
        }
        if (ds.course_index.count(row[c_id])) {
            ds.rejects.push_back({"courses.csv", r.line(), "duplicate course_id " + row[c_id]});
            continue;
        }
        Course course;
        course.key = CourseKey{row[c_id], row[c_line], *dir, row[c_date], *start};
        int seq = 1;
        for (const auto& station : route_it->second)
            course.stops.push_back(StopEvent{station, seq++, 0, std::nullopt});
        ds.course_index[row[c_id]] = ds.courses.size();
        ds.courses.push_back(std::move(course));
    }
}

void load_afc(const std::string& path, NetworkDataset& ds, long window_s, long hop_s) {
    csv::Reader r(path);
    auto c_card = r.column("card_id");
    auto c_ts = r.column("timestamp");
    auto c_course = r.column("course_id");
    auto c_station = r.column("station_id");
    std::vector<std::string> row;
    while (r.next(row)) {
        auto ts = parse_long(row[c_ts]);
        if (!ts) {
            ds.rejects.push_back({"afc.csv", r.line(), "missing/mistyped timestamp"});
            continue;
        }
        auto course_it = ds.course_index.find(row[c_course]);
        if (course_it == ds.course_index.end()) {
            ds.rejects.push_back({"afc.csv", r.line(), "unknown course " + row[c_course]});
            continue;
        }
        Course& course = ds.courses[course_it->second];
        auto stop = std::find_if(course.stops.begin(), course.stops.end(),
                                 [&](const StopEvent& s) { return s.station_id == row[c_station]; });
        if (stop == course.stops.end()) {
            ds.rejects.push_back({"afc.csv", r.line(),
                                  "station " + row[c_station] + " not on course " + row[c_course]});
            continue;
        }
        if (stop->seq == static_cast<int>(course.stops.size())) {
            ds.rejects.push_back({"afc.csv", r.line(), "boarding at final stop of " + row[c_course]});
            continue;
        }
        long start = course.key.start_time_s;
        long end = start + hop_s * static_cast<long>(course.stops.size() - 1);
        if (*ts < start - window_s || *ts > end + window_s) {
            ds.rejects.push_back({"afc.csv", r.line(),
                                  "timestamp outside course service window"});
            continue;
        }
        ValidationRecord v;
        if (!row[c_card].empty()) v.card_id = row[c_card];
        v.timestamp = *ts;
        v.course_id = row[c_course];
        v.station_id = row[c_station];
        ds.validations.push_back(std::move(v));
        stop->boardings_afc += 1;
    }
}

void load_apc(const std::string& path, NetworkDataset& ds) {
    csv::Reader r(path);
    auto c_course = r.column("course_id");
    auto c_seq = r.column("seq");
    auto c_board = r.column("boardings");
    auto c_alight = r.column("alightings");
    auto c_occ = r.column("occupancy_after");
    std::vector<std::string> row;
    while (r.next(row)) {
        auto seq = parse_long(row[c_seq]);
        auto course_it = ds.course_index.find(row[c_course]);
        if (course_it == ds.course_index.end()) {
            ds.rejects.push_back({"apc.csv", r.line(), "unknown course " + row[c_course]});
            continue;
        }
        Course& course = ds.courses[course_it->second];
        if (!seq || *seq < 1 || *seq > static_cast<long>(course.stops.size())) {
            ds.rejects.push_back({"apc.csv", r.line(), "seq out of range"});
            continue;
        }
        ApcMeasure m;
        m.boardings = parse_long(row[c_board]);
        m.alightings = parse_long(row[c_alight]);
        m.occupancy_after = parse_long(row[c_occ]);
        if (!m.usable()) {
            ds.rejects.push_back({"apc.csv", r.line(),
                                  "needs occupancy_after or boardings+alightings"});
            continue;
        }
        bool negative = (m.boardings && *m.boardings < 0) ||
                        (m.alightings && *m.alightings < 0) ||
                        (m.occupancy_after && *m.occupancy_after < 0);
        if (negative) {
            ds.rejects.push_back({"apc.csv", r.line(), "negative count"});
            continue;
        }
        course.stops[*seq - 1].apc = m;
    }
}

} // namespace

NetworkDataset load_network(const InputPaths& paths, const Config& config) {
    NetworkDataset ds;
    load_stations(paths.stations, ds);
    load_routes(paths.routes, ds);
    load_courses(paths.courses, ds);
    if (ds.stations.empty() || ds.courses.empty())
        throw EmptyDataset("network has no stations or no courses");

    long window_s = config.get_long("schedule_match_window_s", 300);
    long hop_s = config.get_long("nominal_hop_s", 120);
    load_afc(paths.afc, ds, window_s, hop_s);
    load_apc(paths.apc, ds);

    // A course counts as covered only when every stop has a usable measure.
    for (const auto& course : ds.courses) {
        bool all = true;
        for (const auto& s : course.stops)
            if (!s.apc || !s.apc->usable()) all = false;
        if (all) ds.apc_coverage.insert(course.key.course_id);
    }
    return ds;
}

std::vector<LineCoverage> coverage_summary(const NetworkDataset& dataset) {
    std::map<std::pair<std::string, std::string>, LineCoverage> acc;
    for (const auto& course : dataset.courses) {
        auto key = std::make_pair(course.key.line_id, std::string(to_string(course.key.direction)));
        auto& row = acc[key];
        row.line_id = course.key.line_id;
        row.direction = course.key.direction;
        row.n_courses += 1;
        if (dataset.apc_coverage.count(course.key.course_id)) row.n_covered += 1;
    }
    std::vector<LineCoverage> out;
    out.reserve(acc.size());
    for (auto& [_, row] : acc) {
        row.ratio = row.n_courses ? static_cast<double>(row.n_covered) / row.n_courses : 0.0;
        row.kriging_only = row.n_covered == 0;
        out.push_back(row);
    }
    return out;
}

} // namespace uniocc
