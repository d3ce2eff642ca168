#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uniocc/ingest.hpp"
#include "uniocc/unify.hpp"

namespace uniocc {

// sum |ref - est| / sum |ref|. Throws ZeroReference when sum |ref| == 0.
double wmape(const std::vector<double>& reference, const std::vector<double>& estimate);

// Accumulates entries across several courses before dividing.
class WmapeAccumulator {
public:
    void add(const std::vector<double>& reference, const std::vector<double>& estimate);
    void add(double reference, double estimate);
    double value() const; // throws ZeroReference on empty/zero reference
    std::size_t n_entries() const { return n_; }

private:
    double abs_err_ = 0.0;
    double abs_ref_ = 0.0;
    std::size_t n_ = 0;
};

// 0 = Monday .. 6 = Sunday, from an ISO yyyy-mm-dd date.
int day_of_week(const std::string& iso_date);

struct ContextKey {
    std::string line_id;
    Direction direction = Direction::outbound;
    std::string station_id;
    int day_of_week = 0;      // 0..6
    int quarter_hour = 0;     // 0..95
};

// Occupancy baseline: mean over historical APC-covered courses sharing the
// context features, with a fallback chain on key misses
// (drop quarter-hour, then day-of-week, then (line, direction, station)).
class ContextualAverage {
public:
    // train only on APC-covered courses; profiles carry measured totals.
    ContextualAverage(const NetworkDataset& dataset,
                      const std::vector<const OccupancyProfile*>& training,
                      long nominal_hop_s = 120);

    // Per-stop predictions; nullopt when no fallback level has data
    // (the line has no covered training course). When the course itself is
    // part of the training set, pass its training totals via exclude_totals
    // to score it leave-one-out instead of against its own memorized value.
    std::optional<std::vector<double>> predict(const Course& course,
                                               const std::vector<double>* exclude_totals =
                                                   nullptr) const;

private:
    struct Sums { double sum = 0.0; std::size_t n = 0; };
    std::map<std::string, Sums> full_;      // full key
    std::map<std::string, Sums> no_qh_;     // quarter-hour dropped
    std::map<std::string, Sums> no_dow_;    // day-of-week dropped too
    long hop_s_;
};

struct EvalRow {
    std::string method;
    std::string scope;
    double wmape = 0.0;
    std::size_t n_entries = 0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    std::vector<std::string> skipped; // lines whose training set was emptied

    const EvalRow* find(const std::string& method, const std::string& scope) const;
};

// Removes APC from a random 30% of covered courses, refits the mean-rate
// model on the rest and scores the reconstruction of the held-out courses
// against their APC occupancy, alongside the contextual-average baseline.
EvalReport holdout_30(const NetworkDataset& dataset, const PipelineOptions& opt,
                      std::uint64_t seed);

// For each covered line, fits kriging on the other lines' station rates and
// scores kriged-only reconstruction of that line's covered courses.
EvalReport leave_line_out(const NetworkDataset& dataset, const PipelineOptions& opt);

struct SweepPoint {
    double coverage = 0.0; // remaining covered fraction of the line
    double wmape = 0.0;
    std::size_t n_removed = 0;
};

// On a (near) fully covered line, removes one covered course at a time in a
// seeded random order, refits the mean-rate model on the remainder and
// scores the removed courses, down to a single remaining covered course.
std::vector<SweepPoint> coverage_sweep(const NetworkDataset& dataset,
                                       const std::string& line_id,
                                       const PipelineOptions& opt,
                                       std::uint64_t seed);

} // namespace uniocc
