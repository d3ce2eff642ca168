#include "uniocc/od_reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "uniocc/errors.hpp"
#include "uniocc/occupancy.hpp"

namespace uniocc {

double haversine_m(double lon1, double lat1, double lon2, double lat2) {
    constexpr double kEarthRadiusM = 6371000.0;
    constexpr double kDeg = M_PI / 180.0;
    double dlat = (lat2 - lat1) * kDeg;
    double dlon = (lon2 - lon1) * kDeg;
    double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
               std::cos(lat1 * kDeg) * std::cos(lat2 * kDeg) *
                   std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

OdConfig OdConfig::from(const Config& c) {
    OdConfig cfg;
    cfg.walk_radius_m = c.get_double("walk_radius_m", 800.0);
    cfg.rng_seed = c.get_u64("rng_seed", 42);
    return cfg;
}

namespace {

int seq_on_course(const Course& course, const std::string& station_id) {
    for (const auto& s : course.stops)
        if (s.station_id == station_id) return s.seq;
    return 0;
}

// Downstream stop of `course` closest to `target`; 0 when none within radius.
int nearest_downstream(const NetworkDataset& ds, const Course& course, int boarding_seq,
                       const Station& target, double walk_radius_m) {
    int best_seq = 0;
    double best_dist = walk_radius_m;
    for (const auto& s : course.stops) {
        if (s.seq <= boarding_seq) continue;
        const Station& st = ds.stations.at(s.station_id);
        double d = haversine_m(st.lon, st.lat, target.lon, target.lat);
        if (d <= best_dist) {
            best_dist = d;
            best_seq = s.seq;
        }
    }
    return best_seq;
}

double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

std::vector<ReconstructedTrip> chain_trips(const NetworkDataset& dataset,
                                           double walk_radius_m) {
    // (card_id, service_date) -> validation indices, ordered by timestamp
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_card_day;
    for (std::size_t i = 0; i < dataset.validations.size(); ++i) {
        const auto& v = dataset.validations[i];
        if (!v.card_id) continue;
        const Course& course = dataset.course(v.course_id);
        by_card_day[{*v.card_id, course.key.service_date}].push_back(i);
    }

    std::vector<ReconstructedTrip> trips;
    for (auto& [key, indices] : by_card_day) {
        std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
            const auto& va = dataset.validations[a];
            const auto& vb = dataset.validations[b];
            if (va.timestamp != vb.timestamp) return va.timestamp < vb.timestamp;
            return a < b;
        });
        const std::size_t m = indices.size();
        for (std::size_t k = 0; k < m; ++k) {
            const auto& v = dataset.validations[indices[k]];
            const Course& course = dataset.course(v.course_id);
            int boarding_seq = seq_on_course(course, v.station_id);
            if (boarding_seq == 0) continue;
            // next boarding station, wrapping to the day's first boarding
            const auto& next = dataset.validations[indices[(k + 1) % m]];
            const Station& target = dataset.stations.at(next.station_id);
            int alighting_seq =
                nearest_downstream(dataset, course, boarding_seq, target, walk_radius_m);
            if (alighting_seq == 0) continue;
            trips.push_back(ReconstructedTrip{
                indices[k], v.card_id, v.course_id, boarding_seq, alighting_seq,
                k + 1 < m ? OdMethod::chained : OdMethod::chained_daywrap});
        }
    }
    return trips;
}

std::vector<ReconstructedTrip> fallback_alightings(const NetworkDataset& dataset,
                                                   const std::vector<ReconstructedTrip>& chained,
                                                   std::uint64_t rng_seed) {
    // empirical alighting distribution per (line, direction), conditioned on
    // the boarding stop; an unconditional marginal backs up thin rows
    struct Hist {
        std::vector<std::vector<double>> by_boarding; // [boarding-1][alight-1]
        std::vector<double> marginal;                 // [alight-1]
    };
    std::map<std::pair<std::string, std::string>, Hist> hist;
    std::set<std::size_t> chained_indices;
    for (const auto& t : chained) {
        chained_indices.insert(t.validation_index);
        const Course& course = dataset.course(t.course_id);
        auto key = std::make_pair(course.key.line_id,
                                  std::string(to_string(course.key.direction)));
        auto& h = hist[key];
        if (h.marginal.size() < course.stops.size()) {
            h.marginal.resize(course.stops.size(), 0.0);
            h.by_boarding.resize(course.stops.size(),
                                 std::vector<double>(course.stops.size(), 0.0));
        }
        h.marginal[static_cast<std::size_t>(t.alighting_seq) - 1] += 1.0;
        h.by_boarding[static_cast<std::size_t>(t.boarding_seq) - 1]
                     [static_cast<std::size_t>(t.alighting_seq) - 1] += 1.0;
    }

    // deterministic order: by (course_id, boarding station seq, index)
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < dataset.validations.size(); ++i)
        if (!chained_indices.count(i)) pending.push_back(i);
    std::sort(pending.begin(), pending.end(), [&](std::size_t a, std::size_t b) {
        const auto& va = dataset.validations[a];
        const auto& vb = dataset.validations[b];
        if (va.course_id != vb.course_id) return va.course_id < vb.course_id;
        if (va.timestamp != vb.timestamp) return va.timestamp < vb.timestamp;
        return a < b;
    });

    std::mt19937_64 rng(rng_seed);
    std::vector<ReconstructedTrip> trips;
    for (std::size_t idx : pending) {
        const auto& v = dataset.validations[idx];
        const Course& course = dataset.course(v.course_id);
        int boarding_seq = seq_on_course(course, v.station_id);
        if (boarding_seq == 0 || boarding_seq >= static_cast<int>(course.stops.size()))
            continue;
        auto key = std::make_pair(course.key.line_id,
                                  std::string(to_string(course.key.direction)));
        const int n = static_cast<int>(course.stops.size());

        const std::vector<double>* weights = nullptr;
        double total = 0.0;
        auto h_it = hist.find(key);
        if (h_it != hist.end()) {
            // conditional row first, whole-line marginal when it is empty
            for (const auto* cand :
                 {&h_it->second.by_boarding[static_cast<std::size_t>(boarding_seq) - 1],
                  &h_it->second.marginal}) {
                total = 0.0;
                for (int s = boarding_seq + 1; s <= n; ++s)
                    total += (*cand)[static_cast<std::size_t>(s) - 1];
                if (total > 0.0) {
                    weights = cand;
                    break;
                }
            }
        }

        int alighting_seq;
        OdMethod method;
        double u = next_unit(rng);
        if (weights != nullptr) {
            method = OdMethod::fallback_proportional;
            double threshold = u * total;
            double acc = 0.0;
            alighting_seq = n;
            for (int s = boarding_seq + 1; s <= n; ++s) {
                acc += (*weights)[static_cast<std::size_t>(s) - 1];
                if (acc > threshold) {
                    alighting_seq = s;
                    break;
                }
            }
        } else {
            method = OdMethod::fallback_uniform;
            int span = n - boarding_seq;
            alighting_seq = boarding_seq + 1 + std::min(span - 1, static_cast<int>(u * span));
        }
        trips.push_back(ReconstructedTrip{idx, v.card_id, v.course_id, boarding_seq,
                                          alighting_seq, method});
    }
    return trips;
}

OccupancyProfile ticketing_profile(const Course& course,
                                   const std::vector<ReconstructedTrip>& trips) {
    const std::size_t n = course.stops.size();
    std::vector<double> boardings(n, 0.0), alightings(n, 0.0);
    for (const auto& t : trips) {
        if (t.course_id != course.key.course_id) continue;
        boardings[static_cast<std::size_t>(t.boarding_seq) - 1] += 1.0;
        alightings[static_cast<std::size_t>(t.alighting_seq) - 1] += 1.0;
    }
    OccupancyProfile profile;
    profile.course = course.key;
    profile.ticketing = occupancy_from_flows(boardings, alightings);
    profile.alightings_ticketing = std::move(alightings);
    return profile;
}

std::vector<ReconstructedTrip> reconstruct_trips(const NetworkDataset& dataset,
                                                 const OdConfig& cfg) {
    auto trips = chain_trips(dataset, cfg.walk_radius_m);
    auto extra = fallback_alightings(dataset, trips, cfg.rng_seed);
    trips.insert(trips.end(), extra.begin(), extra.end());
    std::sort(trips.begin(), trips.end(), [](const ReconstructedTrip& a, const ReconstructedTrip& b) {
        if (a.course_id != b.course_id) return a.course_id < b.course_id;
        if (a.boarding_seq != b.boarding_seq) return a.boarding_seq < b.boarding_seq;
        return a.validation_index < b.validation_index;
    });
    return trips;
}

} // namespace uniocc
