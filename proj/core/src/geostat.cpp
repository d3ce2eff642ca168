#include "uniocc/geostat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uniocc/errors.hpp"

namespace uniocc {

namespace {

constexpr double kKmPerDegLon = 111.32; // at the equator, scaled by cos(lat)
constexpr double kKmPerDegLat = 110.57;

double dist(const TrainingPoint& a, const TrainingPoint& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

} // namespace

double VariogramModel::gamma(double h) const {
    // variogram convention: gamma(0) = 0, with the nugget as the h->0+ limit
    if (h <= 0.0) return 0.0;
    return nugget + sill * (1.0 - std::exp(-h / range_km));
}

std::pair<double, double> project(double lon, double lat, const Centroid& c) {
    double x = (lon - c.lon0) * std::cos(c.lat0 * M_PI / 180.0) * kKmPerDegLon;
    double y = (lat - c.lat0) * kKmPerDegLat;
    return {x, y};
}

Centroid centroid_of(const std::vector<Station>& stations) {
    Centroid c;
    if (stations.empty()) return c;
    for (const auto& s : stations) {
        c.lon0 += s.lon;
        c.lat0 += s.lat;
    }
    c.lon0 /= static_cast<double>(stations.size());
    c.lat0 /= static_cast<double>(stations.size());
    return c;
}

std::vector<VariogramBin> empirical_variogram(const std::vector<TrainingPoint>& points,
                                              std::size_t n_bins,
                                              double max_dist_km) {
    if (points.size() < 2)
        throw TooFewPoints("empirical variogram needs at least 2 points");
    if (n_bins == 0 || max_dist_km <= 0.0)
        throw Error("empirical variogram needs n_bins > 0 and max_dist_km > 0");

    std::vector<double> sums(n_bins, 0.0);
    std::vector<std::size_t> counts(n_bins, 0);
    const double width = max_dist_km / static_cast<double>(n_bins);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            double h = dist(points[i], points[j]);
            if (h > max_dist_km) continue;
            auto bin = std::min(static_cast<std::size_t>(h / width), n_bins - 1);
            double d = points[i].value - points[j].value;
            sums[bin] += d * d;
            counts[bin] += 1;
        }
    }

    std::vector<VariogramBin> bins;
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (counts[b] == 0) continue;
        bins.push_back(VariogramBin{(static_cast<double>(b) + 0.5) * width,
                                    sums[b] / (2.0 * static_cast<double>(counts[b])),
                                    counts[b]});
    }
    return bins;
}

namespace {

double wls_objective(const std::vector<VariogramBin>& bins, double nugget, double sill,
                     double range) {
    double obj = 0.0;
    for (const auto& b : bins) {
        double g = nugget + sill * (1.0 - std::exp(-b.h_mid / range));
        double r = b.gamma_hat - g;
        obj += static_cast<double>(b.pair_count) * r * r;
    }
    return obj;
}

// Closed-form weighted least squares for (nugget, sill) at fixed range,
// clamped to the nonnegative orthant.
std::pair<double, double> solve_linear(const std::vector<VariogramBin>& bins, double range) {
    double sw = 0, swg = 0, swgg = 0, swy = 0, swgy = 0;
    for (const auto& b : bins) {
        double w = static_cast<double>(b.pair_count);
        double g = 1.0 - std::exp(-b.h_mid / range);
        sw += w;
        swg += w * g;
        swgg += w * g * g;
        swy += w * b.gamma_hat;
        swgy += w * g * b.gamma_hat;
    }
    double det = sw * swgg - swg * swg;
    double nugget, sill;
    if (std::abs(det) > 1e-14 * sw * std::max(swgg, 1e-300)) {
        nugget = (swy * swgg - swg * swgy) / det;
        sill = (sw * swgy - swg * swy) / det;
    } else {
        nugget = swy / sw;
        sill = 0.0;
    }
    if (nugget >= 0.0 && sill >= 0.0) return {nugget, sill};

    // clamp to the boundary: best of sill=0 and nugget=0
    double n0 = std::max(0.0, swy / sw);
    double obj_n = wls_objective(bins, n0, 0.0, range);
    double s0 = swgg > 0.0 ? std::max(0.0, swgy / swgg) : 0.0;
    double obj_s = wls_objective(bins, 0.0, s0, range);
    if (obj_n <= obj_s) return {n0, 0.0};
    return {0.0, s0};
}

double golden_range(const std::vector<VariogramBin>& bins, double nugget, double sill,
                    double lo, double hi) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = wls_objective(bins, nugget, sill, c);
    double fd = wls_objective(bins, nugget, sill, d);
    while (b - a > 1e-9) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = wls_objective(bins, nugget, sill, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = wls_objective(bins, nugget, sill, d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

VariogramModel fit_exponential(const std::vector<VariogramBin>& bins, double max_dist_km) {
    if (bins.size() < 3)
        throw TooFewPoints("exponential fit needs at least 3 populated bins");

    double gmax = 0.0;
    for (const auto& b : bins) gmax = std::max(gmax, b.gamma_hat);
    if (gmax <= 0.0)
        return VariogramModel{0.0, 0.0, max_dist_km, true}; // flat field

    const double r_lo = 0.1 * max_dist_km;
    const double r_hi = 10.0 * max_dist_km;

    VariogramModel best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int in = 0; in < 5; ++in) {
        for (int is = 0; is < 5; ++is) {
            for (int ir = 0; ir < 5; ++ir) {
                double nugget = gmax * in / 4.0;
                double sill = gmax * is / 4.0;
                double range = r_lo + (r_hi - r_lo) * ir / 4.0;
                // coordinate descent: exact (nugget, sill) at fixed range,
                // golden-section line search on the range
                double prev = wls_objective(bins, nugget, sill, range);
                for (int iter = 0; iter < 200; ++iter) {
                    std::tie(nugget, sill) = solve_linear(bins, range);
                    range = golden_range(bins, nugget, sill, r_lo, r_hi);
                    double obj = wls_objective(bins, nugget, sill, range);
                    if (prev - obj < 1e-16 * (1.0 + obj)) {
                        prev = obj;
                        break;
                    }
                    prev = obj;
                }
                if (prev < best_obj) {
                    best_obj = prev;
                    best = VariogramModel{nugget, sill, range, false};
                }
            }
        }
    }
    return best;
}

KrigingModel::KrigingModel(std::vector<TrainingPoint> points, VariogramModel variogram)
    : points_(std::move(points)), variogram_(variogram) {
    if (points_.empty())
        throw TooFewPoints("kriging needs at least one training point");
    try {
        factorize();
    } catch (const SingularSystem&) {
        // merge duplicate locations (average their values) and retry once
        std::vector<TrainingPoint> merged;
        std::vector<std::size_t> counts;
        for (const auto& p : points_) {
            bool found = false;
            for (std::size_t i = 0; i < merged.size(); ++i) {
                if (merged[i].x == p.x && merged[i].y == p.y) {
                    merged[i].value += p.value;
                    counts[i] += 1;
                    found = true;
                    break;
                }
            }
            if (!found) {
                merged.push_back(p);
                counts.push_back(1);
            }
        }
        for (std::size_t i = 0; i < merged.size(); ++i)
            merged[i].value /= static_cast<double>(counts[i]);
        points_ = std::move(merged);
        factorize();
    }
}

void KrigingModel::factorize() {
    const auto n = static_cast<Eigen::Index>(points_.size());
    if (variogram_.sill == 0.0 && variogram_.nugget == 0.0) return; // flat model, no system

    Eigen::MatrixXd a(n + 1, n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            a(i, j) = variogram_.gamma(dist(points_[static_cast<std::size_t>(i)],
                                            points_[static_cast<std::size_t>(j)]));
        a(i, n) = 1.0;
        a(n, i) = 1.0;
    }
    a(n, n) = 0.0;
    lu_.compute(a);
    if (!lu_.isInvertible())
        throw SingularSystem("ordinary kriging system is singular (duplicate locations?)");
}

KrigePrediction KrigingModel::predict(double x, double y) const {
    const auto n = static_cast<Eigen::Index>(points_.size());
    KrigePrediction out;

    if (variogram_.sill == 0.0 && variogram_.nugget == 0.0) {
        // flat variogram: every weighting is equivalent, use the plain mean
        double mean = 0.0;
        for (const auto& p : points_) mean += p.value;
        mean /= static_cast<double>(points_.size());
        out.raw = mean;
        out.rate = std::clamp(mean, 0.0, 1.0);
        out.variance = 0.0;
        out.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
        return out;
    }

    Eigen::VectorXd rhs(n + 1);
    TrainingPoint q{x, y, 0.0};
    for (Eigen::Index i = 0; i < n; ++i)
        rhs(i) = variogram_.gamma(dist(points_[static_cast<std::size_t>(i)], q));
    rhs(n) = 1.0;

    Eigen::VectorXd sol = lu_.solve(rhs);
    out.weights = sol.head(n);
    double mu = sol(n);
    double raw = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        raw += out.weights(i) * points_[static_cast<std::size_t>(i)].value;
    out.raw = raw;
    out.rate = std::clamp(raw, 0.0, 1.0);
    out.variance = out.weights.dot(rhs.head(n)) + mu;
    return out;
}

GeostatFit fit_geostat(const std::vector<Station>& stations,
                       const std::map<std::string, double>& station_values,
                       const GeostatOptions& opt) {
    if (station_values.empty())
        throw TooFewPoints("no station rates to fit a geostatistical model on");

    GeostatFit fit;
    fit.centroid = centroid_of(stations);

    std::unordered_map<std::string, const Station*> by_id;
    for (const auto& s : stations) by_id[s.station_id] = &s;

    std::vector<TrainingPoint> points;
    for (const auto& [station_id, value] : station_values) {
        auto it = by_id.find(station_id);
        if (it == by_id.end())
            throw ReferentialError("rate refers to unknown station " + station_id);
        auto [x, y] = project(it->second->lon, it->second->lat, fit.centroid);
        points.push_back(TrainingPoint{x, y, std::clamp(value, 0.0, 1.0)});
    }

    double diameter = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            diameter = std::max(diameter, dist(points[i], points[j]));

    if (points.size() >= 2 && diameter > 0.0) {
        double max_dist = diameter * opt.max_dist_fraction;
        fit.bins = empirical_variogram(points, opt.variogram_bins, max_dist);
        if (fit.bins.size() >= 3) {
            fit.variogram = fit_exponential(fit.bins, max_dist);
        } else {
            fit.variogram = VariogramModel{0.0, 0.0, max_dist, true};
        }
    } else {
        fit.variogram = VariogramModel{0.0, 0.0, 1.0, true};
    }
    fit.model = std::make_shared<KrigingModel>(std::move(points), fit.variogram);
    return fit;
}

std::map<std::string, double> rates_for_uncovered_stations(const GeostatFit& fit,
                                                           const std::vector<Station>& stations) {
    std::map<std::string, double> out;
    for (const auto& s : stations) {
        auto [x, y] = project(s.lon, s.lat, fit.centroid);
        out[s.station_id] = fit.model->predict(x, y).rate;
    }
    return out;
}

} // namespace uniocc
