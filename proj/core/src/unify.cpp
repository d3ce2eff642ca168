#include "uniocc/unify.hpp"

#include <algorithm>

#include "uniocc/errors.hpp"
#include "uniocc/occupancy.hpp"

namespace uniocc {

RateResolver::RateResolver(const FraudRateTable& table, const GeostatFit& fit,
                           const std::unordered_map<std::string, Station>& stations)
    : table_(table), fit_(fit), stations_(stations) {}

ResolvedRate RateResolver::resolve(const std::string& station_id,
                                   const std::string& line_id) const {
    if (const FraudRateEntry* e = table_.find(station_id, line_id))
        return ResolvedRate{e->rate, RateSource::mean_rate};

    auto cached = kriged_cache_.find(station_id);
    if (cached != kriged_cache_.end())
        return ResolvedRate{cached->second, RateSource::kriged};

    auto it = stations_.find(station_id);
    if (it == stations_.end())
        throw ReferentialError("unknown station " + station_id);
    auto [x, y] = project(it->second.lon, it->second.lat, fit_.centroid);
    double rate = fit_.model->predict(x, y).rate;
    kriged_cache_[station_id] = rate;
    return ResolvedRate{rate, RateSource::kriged};
}

OccupancyProfile unify_course(const Course& course, const OccupancyProfile& ticketing,
                              const RateResolver& resolver) {
    const std::size_t n = course.stops.size();
    OccupancyProfile out = ticketing;
    out.fraud.assign(n, 0.0);
    out.total.assign(n, 0.0);

    bool all_mean_rate = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 == n) { // last stop empties the vehicle
            out.total[i] = 0.0;
            continue;
        }
        auto r = resolver.resolve(course.stops[i].station_id, course.key.line_id);
        if (r.source == RateSource::kriged) all_mean_rate = false;
        out.fraud[i] = out.ticketing[i] * r.rate;
        out.total[i] = out.ticketing[i] * (1.0 + r.rate);
    }
    out.source = all_mean_rate ? ProfileSource::unified_mean_rate
                               : ProfileSource::unified_kriged;
    return out;
}

PipelineOptions PipelineOptions::from(const Config& c) {
    PipelineOptions opt;
    opt.od = OdConfig::from(c);
    opt.min_courses = static_cast<std::size_t>(c.get_long("min_courses", 1));
    opt.geostat.variogram_bins = static_cast<std::size_t>(c.get_long("variogram_bins", 12));
    opt.geostat.max_dist_fraction = c.get_double("variogram_max_dist_fraction", 0.5);
    return opt;
}

PipelineResult run_pipeline(const NetworkDataset& dataset, const PipelineOptions& opt) {
    if (dataset.apc_coverage.empty())
        throw NoCoveredCourses("dataset has no APC-covered course");

    PipelineResult result;
    result.trips = reconstruct_trips(dataset, opt.od);

    // trips grouped per course
    std::unordered_map<std::string, std::vector<ReconstructedTrip>> by_course;
    for (const auto& t : result.trips) by_course[t.course_id].push_back(t);

    std::vector<OccupancyProfile> ticketing;
    ticketing.reserve(dataset.courses.size());
    static const std::vector<ReconstructedTrip> kNoTrips;
    for (const auto& course : dataset.courses) {
        auto it = by_course.find(course.key.course_id);
        ticketing.push_back(ticketing_profile(course, it == by_course.end() ? kNoTrips : it->second));
    }

    // per-course fraud ratios on the covered subset
    std::vector<CourseRatios> ratios;
    std::unordered_map<std::string, std::vector<double>> apc_totals;
    for (std::size_t c = 0; c < dataset.courses.size(); ++c) {
        const Course& course = dataset.courses[c];
        if (!dataset.apc_coverage.count(course.key.course_id)) continue;
        auto apc = apc_occupancy(course.stops);
        ratios.push_back(CourseRatios{
            course.key.course_id,
            course_fraud_ratios(apc.occupancy, ticketing[c].ticketing, &result.diagnostics.ratios)});
        apc_totals[course.key.course_id] = std::move(apc.occupancy);
    }

    result.table = mean_fraud_rates(dataset, ratios, opt.min_courses, &result.diagnostics.ratios);

    // one training value per station: mean over lines, clipped in fit_geostat
    std::map<std::string, std::pair<double, std::size_t>> per_station;
    for (const auto& [key, entry] : result.table.entries) {
        auto& acc = per_station[key.first];
        acc.first += entry.rate;
        acc.second += 1;
    }
    std::map<std::string, double> station_values;
    for (const auto& [station_id, acc] : per_station)
        station_values[station_id] = acc.first / static_cast<double>(acc.second);

    std::vector<Station> all_stations;
    all_stations.reserve(dataset.stations.size());
    for (const auto& [_, s] : dataset.stations) all_stations.push_back(s);
    std::sort(all_stations.begin(), all_stations.end(),
              [](const Station& a, const Station& b) { return a.station_id < b.station_id; });
    result.geostat = fit_geostat(all_stations, station_values, opt.geostat);

    RateResolver resolver(result.table, result.geostat, dataset.stations);
    result.profiles.reserve(dataset.courses.size());
    for (std::size_t c = 0; c < dataset.courses.size(); ++c) {
        const Course& course = dataset.courses[c];
        auto apc_it = apc_totals.find(course.key.course_id);
        if (apc_it != apc_totals.end()) {
            OccupancyProfile p = ticketing[c];
            p.source = ProfileSource::apc_measured;
            p.total = apc_it->second;
            p.fraud.resize(p.total.size());
            for (std::size_t i = 0; i < p.total.size(); ++i) {
                double f = p.total[i] - p.ticketing[i];
                if (f < 0.0) {
                    f = 0.0;
                    ++result.diagnostics.apc_fraud_floored_stops;
                }
                p.fraud[i] = f;
            }
            result.profiles.push_back(std::move(p));
        } else {
            result.profiles.push_back(unify_course(course, ticketing[c], resolver));
        }
    }
    return result;
}

} // namespace uniocc
