#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uniocc/config.hpp"
#include "uniocc/ingest.hpp"
#include "uniocc/types.hpp"

namespace uniocc {

enum class OdMethod { chained, chained_daywrap, fallback_proportional, fallback_uniform };

inline const char* to_string(OdMethod m) {
    switch (m) {
        case OdMethod::chained: return "chained";
        case OdMethod::chained_daywrap: return "chained_daywrap";
        case OdMethod::fallback_proportional: return "fallback_proportional";
        default: return "fallback_uniform";
    }
}

struct ReconstructedTrip {
    std::size_t validation_index = 0; // into dataset.validations
    std::optional<std::string> card_id;
    std::string course_id;
    int boarding_seq = 0;
    int alighting_seq = 0; // > boarding_seq
    OdMethod method = OdMethod::chained;
};

// Great-circle distance in meters.
double haversine_m(double lon1, double lat1, double lon2, double lat2);

// Links consecutive validations of each smart card within one service day.
// The alighting of trip k is the downstream stop of course k closest to the
// boarding station of trip k+1, accepted when within walk_radius_m. The last
// validation of the day chains back to the day's first boarding station.
// Validations that cannot be chained are left for fallback_alightings.
std::vector<ReconstructedTrip> chain_trips(const NetworkDataset& dataset,
                                           double walk_radius_m);

// Assigns the remaining validations an alighting drawn from the empirical
// distribution of chained alightings over downstream stops of the same
// (line, direction), conditioned on the boarding stop; the unconditional
// distribution backs up boarding stops without history, and uniform over
// downstream stops covers lines with no chained trips at all.
std::vector<ReconstructedTrip> fallback_alightings(const NetworkDataset& dataset,
                                                   const std::vector<ReconstructedTrip>& chained,
                                                   std::uint64_t rng_seed);

// Ticketing flows and occupancy of one course from its reconstructed trips.
// fraud/total are left empty; unify fills them.
OccupancyProfile ticketing_profile(const Course& course,
                                   const std::vector<ReconstructedTrip>& trips);

struct OdConfig {
    double walk_radius_m = 800.0;
    std::uint64_t rng_seed = 42;

    static OdConfig from(const Config& c);
};

// chain_trips + fallback_alightings over the whole dataset.
std::vector<ReconstructedTrip> reconstruct_trips(const NetworkDataset& dataset,
                                                 const OdConfig& cfg);

} // namespace uniocc
