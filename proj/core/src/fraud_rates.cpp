#include "uniocc/fraud_rates.hpp"

#include "uniocc/errors.hpp"

namespace uniocc {

const FraudRateEntry* FraudRateTable::find(const std::string& station_id,
                                           const std::string& line_id) const {
    auto it = entries.find({station_id, line_id});
    return it == entries.end() ? nullptr : &it->second;
}

std::vector<std::optional<double>> course_fraud_ratios(const std::vector<double>& apc_occupancy,
                                                       const std::vector<double>& ticketing_occupancy,
                                                       RatioDiagnostics* diag) {
    if (apc_occupancy.size() != ticketing_occupancy.size())
        throw LengthMismatch("APC/ticketing occupancy length mismatch");
    const std::size_t n = apc_occupancy.size();
    std::vector<std::optional<double>> ratios(n);
    for (std::size_t i = 0; i + 1 < n; ++i) { // final stop: both occupancies 0 by definition
        if (ticketing_occupancy[i] > 0.0) {
            ratios[i] = (apc_occupancy[i] - ticketing_occupancy[i]) / ticketing_occupancy[i];
        } else if (diag) {
            ++diag->skipped_zero_denominator;
        }
    }
    return ratios;
}

FraudRateTable mean_fraud_rates(const NetworkDataset& dataset,
                                const std::vector<CourseRatios>& ratios,
                                std::size_t min_courses,
                                RatioDiagnostics* diag) {
    if (ratios.empty())
        throw NoCoveredCourses("no APC-covered courses to learn fraud rates from");

    struct Acc { double sum = 0.0; std::size_t n = 0; };
    std::map<std::pair<std::string, std::string>, Acc> acc;
    for (const auto& cr : ratios) {
        const Course& course = dataset.course(cr.course_id);
        for (std::size_t i = 0; i < cr.ratios.size() && i < course.stops.size(); ++i) {
            if (!cr.ratios[i]) continue;
            auto& a = acc[{course.stops[i].station_id, course.key.line_id}];
            a.sum += *cr.ratios[i];
            a.n += 1;
        }
    }

    FraudRateTable table;
    for (const auto& [key, a] : acc) {
        if (a.n < min_courses) continue;
        double mean = a.sum / static_cast<double>(a.n);
        if (mean < 0.0) {
            mean = 0.0;
            if (diag) ++diag->floored_negative_rates;
        }
        table.entries[key] = FraudRateEntry{mean, a.n};
    }
    return table;
}

} // namespace uniocc
