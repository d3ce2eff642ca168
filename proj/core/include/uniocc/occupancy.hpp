#pragma once

#include <string>
#include <vector>

#include "uniocc/types.hpp"

namespace uniocc {

// Running load profile from per-stop boardings and alightings:
// O[i] = sum_{j<=i} (Y[j] - Z[j]).
// Requires equal lengths N >= 2, Z[0] == 0, Y[N-1] == 0.
// Throws NegativeOccupancy if any prefix sum goes below zero.
std::vector<double> occupancy_from_flows(const std::vector<double>& boardings,
                                         const std::vector<double>& alightings);

struct ApcOccupancyResult {
    std::vector<double> occupancy;
    // One note per stop where a measured occupancy_after disagrees with the
    // value derived from the boarding/alighting flows.
    std::vector<std::string> discrepancy_notes;
};

// Occupancy of a fully APC-equipped course. Measured occupancy_after wins
// over the flow-derived value; disagreements are reported, not corrected.
ApcOccupancyResult apc_occupancy(const std::vector<StopEvent>& stops);

} // namespace uniocc
