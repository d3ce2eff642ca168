#include "uniocc/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "uniocc/csv.hpp"
#include "uniocc/errors.hpp"

namespace uniocc {

namespace {

std::ofstream open(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f.is_open()) throw Error("cannot write " + path);
    return f;
}

} // namespace

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_rejects(const std::string& path, const std::vector<RejectedRow>& rejects) {
    auto f = open(path);
    f << "file,row,reason\n";
    for (const auto& r : rejects)
        f << csv::escape(r.file) << "," << r.row << "," << csv::escape(r.reason) << "\n";
}

void write_coverage(const std::string& path, const std::vector<LineCoverage>& rows) {
    auto f = open(path);
    f << "line_id,direction,n_courses,n_covered,ratio,kriging_only\n";
    for (const auto& r : rows)
        f << csv::escape(r.line_id) << "," << to_string(r.direction) << "," << r.n_courses
          << "," << r.n_covered << "," << format_number(r.ratio) << ","
          << (r.kriging_only ? 1 : 0) << "\n";
}

void write_trips(const std::string& path, const NetworkDataset& dataset,
                 const std::vector<ReconstructedTrip>& trips) {
    (void)dataset;
    auto f = open(path);
    f << "card_id,course_id,boarding_seq,alighting_seq,method\n";
    for (const auto& t : trips)
        f << csv::escape(t.card_id.value_or("")) << "," << csv::escape(t.course_id) << ","
          << t.boarding_seq << "," << t.alighting_seq << "," << to_string(t.method) << "\n";
}

void write_fraud_rates(const std::string& path, const FraudRateTable& table) {
    auto f = open(path);
    f << "station_id,line_id,rate,n_courses\n";
    for (const auto& [key, e] : table.entries)
        f << csv::escape(key.first) << "," << csv::escape(key.second) << ","
          << format_number(e.rate) << "," << e.n_courses << "\n";
}

void write_variogram(const std::string& path, const VariogramModel& model) {
    auto f = open(path);
    f << "nugget,sill,range_km,degenerate\n";
    f << format_number(model.nugget) << "," << format_number(model.sill) << ","
      << format_number(model.range_km) << "," << (model.degenerate ? 1 : 0) << "\n";
}

void write_training_points(const std::string& path, const std::vector<TrainingPoint>& points) {
    auto f = open(path);
    f << "x_km,y_km,value\n";
    for (const auto& p : points)
        f << format_number(p.x) << "," << format_number(p.y) << "," << format_number(p.value)
          << "\n";
}

void write_occupancies(const std::string& path, const NetworkDataset& dataset,
                       const std::vector<OccupancyProfile>& profiles) {
    auto f = open(path);
    f << "course_id,seq,station_id,ticketing,fraud,total,source\n";
    for (const auto& p : profiles) {
        const Course& course = dataset.course(p.course.course_id);
        for (std::size_t i = 0; i < course.stops.size(); ++i) {
            double ticketing = i < p.ticketing.size() ? p.ticketing[i] : 0.0;
            double fraud = i < p.fraud.size() ? p.fraud[i] : 0.0;
            double total = i < p.total.size() ? p.total[i] : 0.0;
            f << csv::escape(p.course.course_id) << "," << course.stops[i].seq << ","
              << csv::escape(course.stops[i].station_id) << "," << format_number(ticketing)
              << "," << format_number(fraud) << "," << format_number(total) << ","
              << to_string(p.source) << "\n";
        }
    }
}

void write_eval_report(const std::string& path, const EvalReport& report) {
    auto f = open(path);
    f << "method,scope,wMAPE,n_entries\n";
    for (const auto& r : report.rows)
        f << csv::escape(r.method) << "," << csv::escape(r.scope) << ","
          << format_number(r.wmape) << "," << r.n_entries << "\n";
    for (const auto& line : report.skipped)
        f << "skipped_line," << csv::escape(line) << ",0,0\n";
}

void write_sweep(const std::string& path, const std::vector<SweepPoint>& series) {
    auto f = open(path);
    f << "coverage,wmape\n";
    for (const auto& p : series)
        f << format_number(p.coverage) << "," << format_number(p.wmape) << "\n";
}

void write_fraud_map(const std::string& path, const GeostatFit& fit,
                     const std::vector<Station>& stations, const FraudMapOptions& opt) {
    if (stations.empty()) throw EmptyDataset("no stations for the fraud map");
    double min_x = std::numeric_limits<double>::max(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    for (const auto& s : stations) {
        auto [x, y] = project(s.lon, s.lat, fit.centroid);
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
    }
    double pad_x = (max_x - min_x) * opt.bbox_inflate;
    double pad_y = (max_y - min_y) * opt.bbox_inflate;
    if (pad_x == 0.0) pad_x = 1.0;
    if (pad_y == 0.0) pad_y = 1.0;
    min_x -= pad_x;
    max_x += pad_x;
    min_y -= pad_y;
    max_y += pad_y;

    auto f = open(path);
    f << "x_km,y_km,rate\n";
    for (std::size_t r = 0; r < opt.grid_rows; ++r) {
        double y = min_y + (max_y - min_y) * static_cast<double>(r) /
                               static_cast<double>(opt.grid_rows - 1);
        for (std::size_t c = 0; c < opt.grid_cols; ++c) {
            double x = min_x + (max_x - min_x) * static_cast<double>(c) /
                                   static_cast<double>(opt.grid_cols - 1);
            f << format_number(x) << "," << format_number(y) << ","
              << format_number(fit.model->predict(x, y).rate) << "\n";
        }
    }
}

void write_stations_geojson(const std::string& path, const NetworkDataset& dataset,
                            const FraudRateTable& table, const GeostatFit& fit) {
    using json = nlohmann::ordered_json;

    std::vector<const Station*> stations;
    for (const auto& [_, s] : dataset.stations) stations.push_back(&s);
    std::sort(stations.begin(), stations.end(),
              [](const Station* a, const Station* b) { return a->station_id < b->station_id; });

    json features = json::array();
    for (const Station* s : stations) {
        double rate_sum = 0.0;
        std::size_t rate_n = 0;
        for (const auto& [key, e] : table.entries) {
            if (key.first != s->station_id) continue;
            rate_sum += e.rate;
            ++rate_n;
        }
        bool covered = rate_n > 0;
        double rate;
        if (covered) {
            rate = rate_sum / static_cast<double>(rate_n);
        } else {
            auto [x, y] = project(s->lon, s->lat, fit.centroid);
            rate = fit.model->predict(x, y).rate;
        }
        json feature = {
            {"type", "Feature"},
            {"geometry", {{"type", "Point"}, {"coordinates", {s->lon, s->lat}}}},
            {"properties",
             {{"station_id", s->station_id},
              {"name", s->name},
              {"covered", covered},
              {"fraud_rate", rate}}},
        };
        features.push_back(std::move(feature));
    }
    json collection = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
    auto f = open(path);
    f << collection.dump(2) << "\n";
}

} // namespace uniocc
