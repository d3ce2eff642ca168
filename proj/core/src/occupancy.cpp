#include "uniocc/occupancy.hpp"

#include <cmath>

#include "uniocc/errors.hpp"

namespace uniocc {

std::optional<Direction> direction_from_string(const std::string& s) {
    if (s == "outbound") return Direction::outbound;
    if (s == "inbound") return Direction::inbound;
    return std::nullopt;
}

std::vector<double> occupancy_from_flows(const std::vector<double>& boardings,
                                         const std::vector<double>& alightings) {
    if (boardings.size() != alightings.size())
        throw LengthMismatch("boardings/alightings length mismatch: " +
                             std::to_string(boardings.size()) + " vs " +
                             std::to_string(alightings.size()));
    const std::size_t n = boardings.size();
    if (n < 2) throw LengthMismatch("course needs at least 2 stops");

    std::vector<double> occupancy(n);
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        running += boardings[i] - alightings[i];
        if (running < 0.0)
            throw NegativeOccupancy("negative occupancy " + std::to_string(running) +
                                    " after stop " + std::to_string(i + 1));
        occupancy[i] = running;
    }
    return occupancy;
}

ApcOccupancyResult apc_occupancy(const std::vector<StopEvent>& stops) {
    const std::size_t n = stops.size();
    if (n < 2) throw LengthMismatch("course needs at least 2 stops");
    for (const auto& s : stops) {
        if (!s.apc || !s.apc->usable())
            throw MissingApc("stop seq " + std::to_string(s.seq) + " lacks a usable APC measure");
    }

    // Measured occupancy_after wins; the running value is re-anchored on it
    // so courses mixing occupancy-only and flow-only stops still resolve.
    ApcOccupancyResult result;
    result.occupancy.resize(n);
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const ApcMeasure& m = *stops[i].apc;
        std::optional<double> derived;
        if (m.boardings && m.alightings) {
            double d = running + static_cast<double>(*m.boardings) -
                       static_cast<double>(*m.alightings);
            if (!m.occupancy_after && d < 0.0)
                throw NegativeOccupancy("negative occupancy " + std::to_string(d) +
                                        " after stop " + std::to_string(stops[i].seq));
            derived = d;
        }
        if (m.occupancy_after) {
            double measured = static_cast<double>(*m.occupancy_after);
            if (derived && std::abs(*derived - measured) > 0.5) {
                result.discrepancy_notes.push_back(
                    "seq " + std::to_string(stops[i].seq) + ": measured occupancy " +
                    std::to_string(static_cast<long>(measured)) +
                    " differs from flow-derived " +
                    std::to_string(static_cast<long>(*derived)));
            }
            running = measured;
        } else {
            running = *derived;
        }
        result.occupancy[i] = running;
    }
    return result;
}

} // namespace uniocc
