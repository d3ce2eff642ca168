#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uniocc/types.hpp"

namespace uniocc {

struct TrainingPoint {
    double x = 0.0; // km east of the network centroid
    double y = 0.0; // km north of the network centroid
    double value = 0.0; // fraud rate clipped to [0, 1]
};

// Exponential variogram gamma(h) = nugget + sill * (1 - exp(-h / range_km)).
struct VariogramModel {
    double nugget = 0.0;
    double sill = 0.0;
    double range_km = 1.0;
    bool degenerate = false;

    double gamma(double h) const;
};

struct VariogramBin {
    double h_mid = 0.0;
    double gamma_hat = 0.0;
    std::size_t pair_count = 0;
};

struct Centroid {
    double lon0 = 0.0;
    double lat0 = 0.0;
};

// Local equirectangular projection around the centroid, in km.
std::pair<double, double> project(double lon, double lat, const Centroid& c);

Centroid centroid_of(const std::vector<Station>& stations);

// Matheron estimator, equal-width bins over (0, max_dist_km]; empty bins
// are omitted. Requires at least two points.
std::vector<VariogramBin> empirical_variogram(const std::vector<TrainingPoint>& points,
                                              std::size_t n_bins,
                                              double max_dist_km);

// Weighted least squares over the bins (weights = pair counts), box
// constraints nugget,sill >= 0 and range in [0.1, 10] * max_dist_km.
// Deterministic multi-start grid followed by coordinate descent.
// All-zero bins yield a pure-nugget model flagged degenerate.
VariogramModel fit_exponential(const std::vector<VariogramBin>& bins, double max_dist_km);

struct KrigePrediction {
    double rate = 0.0;     // clamped to [0, 1]
    double raw = 0.0;      // before clamping
    double variance = 0.0; // kriging variance
    Eigen::VectorXd weights;
};

// Ordinary kriging over a fixed training set. The augmented system matrix is
// factorized once at construction; queries only back-substitute.
class KrigingModel {
public:
    KrigingModel(std::vector<TrainingPoint> points, VariogramModel variogram);

    const std::vector<TrainingPoint>& points() const { return points_; }
    const VariogramModel& variogram() const { return variogram_; }

    KrigePrediction predict(double x, double y) const;

private:
    void factorize();

    std::vector<TrainingPoint> points_;
    VariogramModel variogram_;
    Eigen::FullPivLU<Eigen::MatrixXd> lu_;
};

// Fits the whole chain: project stations, variogram, exponential fit, model.
struct GeostatFit {
    Centroid centroid;
    std::vector<VariogramBin> bins;
    VariogramModel variogram;
    std::shared_ptr<const KrigingModel> model;
};

struct GeostatOptions {
    std::size_t variogram_bins = 12;
    double max_dist_fraction = 0.5; // of the training point diameter
};

/// station_values: one rate per station (values are clipped to [0,1] here).
GeostatFit fit_geostat(const std::vector<Station>& stations,
                       const std::map<std::string, double>& station_values,
                       const GeostatOptions& opt = {});

// Kriged rate per station, each in [0, 1].
std::map<std::string, double> rates_for_uncovered_stations(const GeostatFit& fit,
                                                           const std::vector<Station>& stations);

} // namespace uniocc
