#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uniocc/config.hpp"

namespace uniocc {

struct FraudBump {
    double x = 0.0; // km from centroid
    double y = 0.0;
    double amplitude = 0.0; // in [0, 0.5]
    double width_km = 1.0;
};

// Smooth spatial fraud-probability field, capped at 0.5.
struct FraudField {
    std::vector<FraudBump> bumps;
    double base = 0.0;

    double probability(double x_km, double y_km) const;
};

struct SynthScenario {
    int n_lines = 4;
    int stops_per_line = 10;
    int courses_per_line_per_day = 20;
    int n_days = 7;
    double boarding_rate = 6.0; // Poisson lambda per stop
    double coverage = 0.3;      // fraction of courses with APC
    FraudField field;
    std::uint64_t rng_seed = 42;

    double stop_spacing_km = 1.0;
    double alight_decay_km = 3.0;
    double round_trip_prob = 0.7; // card holders making an out-and-back pair
    bool apc_noise = false;       // symmetric +-1 count noise

    static SynthScenario from(const Config& c);
    void validate() const; // throws InvalidScenario
};

struct SynthTruth {
    // course_id -> true occupancy per seq
    std::map<std::string, std::vector<double>> occupancy;
    // station_id -> fraud probability p
    std::map<std::string, double> field;
};

// Writes the ingest file set (stations/routes/courses/afc/apc .csv) plus
// truth_occupancy.csv, truth_field.csv and truth_trips.csv into out_dir.
// Same seed, same files, byte for byte.
SynthTruth generate(const SynthScenario& scenario, const std::string& out_dir);

// The quantity the mean-rate estimator targets under independent
// per-passenger fraud: p / (1 - p) at each station.
std::map<std::string, double> oracle_rates(const SynthTruth& truth);

} // namespace uniocc
