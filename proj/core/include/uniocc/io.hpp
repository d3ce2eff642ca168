#pragma once

#include <string>
#include <vector>

#include "uniocc/eval.hpp"
#include "uniocc/fraud_rates.hpp"
#include "uniocc/geostat.hpp"
#include "uniocc/ingest.hpp"
#include "uniocc/od_reconstruct.hpp"
#include "uniocc/unify.hpp"

namespace uniocc {

// All writers emit deterministic output: fixed column order, fixed float
// formatting, rows in a canonical order.

std::string format_number(double v);

void write_rejects(const std::string& path, const std::vector<RejectedRow>& rejects);
void write_coverage(const std::string& path, const std::vector<LineCoverage>& rows);
void write_trips(const std::string& path, const NetworkDataset& dataset,
                 const std::vector<ReconstructedTrip>& trips);
void write_fraud_rates(const std::string& path, const FraudRateTable& table);
void write_variogram(const std::string& path, const VariogramModel& model);
void write_training_points(const std::string& path, const std::vector<TrainingPoint>& points);
void write_occupancies(const std::string& path, const NetworkDataset& dataset,
                       const std::vector<OccupancyProfile>& profiles);
void write_eval_report(const std::string& path, const EvalReport& report);
void write_sweep(const std::string& path, const std::vector<SweepPoint>& series);

struct FraudMapOptions {
    std::size_t grid_cols = 200;
    std::size_t grid_rows = 200;
    double bbox_inflate = 0.10; // fraction of each bbox side
};

// Regular grid of kriged rates over the inflated station bounding box
// (projected km), written as x,y,rate rows.
void write_fraud_map(const std::string& path, const GeostatFit& fit,
                     const std::vector<Station>& stations, const FraudMapOptions& opt = {});

// GeoJSON FeatureCollection of station markers tagged covered/uncovered.
void write_stations_geojson(const std::string& path, const NetworkDataset& dataset,
                            const FraudRateTable& table, const GeostatFit& fit);

} // namespace uniocc
