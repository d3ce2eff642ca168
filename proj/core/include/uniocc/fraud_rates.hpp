#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "uniocc/ingest.hpp"
#include "uniocc/types.hpp"

namespace uniocc {

struct FraudRateEntry {
    double rate = 0.0; // >= 0 after aggregation
    std::size_t n_courses = 0;
};

struct FraudRateTable {
    // (station_id, line_id) -> aggregated rate
    std::map<std::pair<std::string, std::string>, FraudRateEntry> entries;

    const FraudRateEntry* find(const std::string& station_id, const std::string& line_id) const;
};

struct RatioDiagnostics {
    std::size_t skipped_zero_denominator = 0;
    std::size_t floored_negative_rates = 0;
};

// Per-stop fraud ratios (O_i - O_i^V) / O_i^V of one APC-covered course.
// Absent where the ticketing occupancy is zero and at the final stop.
std::vector<std::optional<double>> course_fraud_ratios(const std::vector<double>& apc_occupancy,
                                                       const std::vector<double>& ticketing_occupancy,
                                                       RatioDiagnostics* diag = nullptr);

struct CourseRatios {
    std::string course_id;
    std::vector<std::optional<double>> ratios; // per seq
};

// Mean per-(station, line) fraud rate over APC-covered courses. Negative
// means are floored at zero after averaging. Entries with fewer than
// min_courses contributing ratios are dropped.
FraudRateTable mean_fraud_rates(const NetworkDataset& dataset,
                                const std::vector<CourseRatios>& ratios,
                                std::size_t min_courses = 1,
                                RatioDiagnostics* diag = nullptr);

} // namespace uniocc
