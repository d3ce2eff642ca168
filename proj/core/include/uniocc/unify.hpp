#pragma once

#include <map>
#include <string>
#include <vector>

#include "uniocc/config.hpp"
#include "uniocc/fraud_rates.hpp"
#include "uniocc/geostat.hpp"
#include "uniocc/ingest.hpp"
#include "uniocc/od_reconstruct.hpp"
#include "uniocc/types.hpp"

namespace uniocc {

enum class RateSource { mean_rate, kriged };

struct ResolvedRate {
    double rate = 0.0;
    RateSource source = RateSource::mean_rate;
};

// Looks up the (station, line) mean rate; falls back to the kriged rate at
// the station's location.
class RateResolver {
public:
    RateResolver(const FraudRateTable& table, const GeostatFit& fit,
                 const std::unordered_map<std::string, Station>& stations);

    ResolvedRate resolve(const std::string& station_id, const std::string& line_id) const;

private:
    const FraudRateTable& table_;
    const GeostatFit& fit_;
    const std::unordered_map<std::string, Station>& stations_;
    mutable std::map<std::string, double> kriged_cache_;
};

// Applies fraud[i] = ticketing[i] * R_i, total[i] = ticketing[i] * (1 + R_i)
// to a course without APC data.
OccupancyProfile unify_course(const Course& course, const OccupancyProfile& ticketing,
                              const RateResolver& resolver);

struct PipelineDiagnostics {
    RatioDiagnostics ratios;
    std::size_t apc_fraud_floored_stops = 0; // measured occupancy below ticketing
};

struct PipelineResult {
    std::vector<ReconstructedTrip> trips;
    std::vector<OccupancyProfile> profiles; // one per course, roster order
    FraudRateTable table;
    GeostatFit geostat;
    PipelineDiagnostics diagnostics;
};

struct PipelineOptions {
    OdConfig od;
    std::size_t min_courses = 1;
    GeostatOptions geostat;

    static PipelineOptions from(const Config& c);
};

// Full chain: O/D reconstruction, ticketing profiles, mean fraud rates,
// variogram fit and kriging, unification of every non-covered course.
// Throws NoCoveredCourses when the dataset has no APC coverage at all.
PipelineResult run_pipeline(const NetworkDataset& dataset, const PipelineOptions& opt);

} // namespace uniocc
