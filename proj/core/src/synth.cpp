#include "uniocc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "uniocc/errors.hpp"
#include "uniocc/geostat.hpp"

namespace uniocc {

namespace {

constexpr double kLon0 = 2.0;
constexpr double kLat0 = 47.0;
constexpr long kHopS = 120;       // nominal inter-stop travel time
constexpr long kMinDwellS = 600;  // earliest return boarding after arrival

double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Knuth's method; portable across standard libraries unlike
// std::poisson_distribution.
int sample_poisson(std::mt19937_64& rng, double lambda) {
    double limit = std::exp(-lambda);
    double p = 1.0;
    int k = 0;
    do {
        ++k;
        p *= next_unit(rng);
    } while (p > limit);
    return k - 1;
}

std::string date_plus_days(int days) {
    // civil-from-days round trip on the fixed base date
    int y = 2024;
    unsigned m = 3, d = 4;
    long z;
    {
        int yy = y - (m <= 2);
        const int era = (yy >= 0 ? yy : yy - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(yy - era * 400);
        const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        z = era * 146097L + static_cast<long>(doe) - 719468L;
    }
    z += days + 719468L;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    long yy = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned dd = doy - (153 * mp + 2) / 5 + 1;
    const unsigned mm = mp < 10 ? mp + 3 : mp - 9;
    yy += mm <= 2;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04ld-%02u-%02u", yy, mm, dd);
    return buf;
}

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

struct SynthStation {
    std::string id;
    double x, y; // km from centroid
    double lon, lat;
    double p; // fraud probability
};

struct SynthCourse {
    std::string id;
    int line = 0; // 0-based
    Direction dir = Direction::outbound;
    int day = 0;
    long start = 0;
};

struct Trip {
    int course = 0; // index into courses
    int b_seq = 0;
    int a_seq = 0;
    bool fraud = false;
    long card = -1; // -1: anonymous
};

} // namespace

double FraudField::probability(double x_km, double y_km) const {
    double p = base;
    for (const auto& b : bumps) {
        double dx = x_km - b.x, dy = y_km - b.y;
        p += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.width_km * b.width_km));
    }
    return std::min(p, 0.5);
}

SynthScenario SynthScenario::from(const Config& c) {
    SynthScenario s;
    s.n_lines = static_cast<int>(c.get_long("n_lines", s.n_lines));
    s.stops_per_line = static_cast<int>(c.get_long("stops_per_line", s.stops_per_line));
    s.courses_per_line_per_day =
        static_cast<int>(c.get_long("courses_per_line_per_day", s.courses_per_line_per_day));
    s.n_days = static_cast<int>(c.get_long("n_days", s.n_days));
    s.boarding_rate = c.get_double("boarding_rate", s.boarding_rate);
    s.coverage = c.get_double("coverage", s.coverage);
    s.rng_seed = c.get_u64("rng_seed", s.rng_seed);
    s.stop_spacing_km = c.get_double("stop_spacing_km", s.stop_spacing_km);
    s.alight_decay_km = c.get_double("alight_decay_km", s.alight_decay_km);
    s.round_trip_prob = c.get_double("round_trip_prob", s.round_trip_prob);
    s.apc_noise = c.get_long("apc_noise", 0) != 0;
    s.field.base = c.get_double("fraud_base", 0.05);
    // fraud_bumps = x:y:amplitude:width|x:y:amplitude:width|...
    std::string bumps = c.get("fraud_bumps", "");
    std::stringstream ss(bumps);
    std::string part;
    while (std::getline(ss, part, '|')) {
        if (part.empty()) continue;
        FraudBump b;
        if (std::sscanf(part.c_str(), "%lf:%lf:%lf:%lf", &b.x, &b.y, &b.amplitude,
                        &b.width_km) != 4)
            throw InvalidScenario("malformed fraud_bumps entry: " + part);
        s.field.bumps.push_back(b);
    }
    s.validate();
    return s;
}

void SynthScenario::validate() const {
    if (n_lines < 1 || stops_per_line < 2 || courses_per_line_per_day < 1 || n_days < 1)
        throw InvalidScenario("all scenario counts must be >= 1 (stops >= 2)");
    if (coverage < 0.0 || coverage > 1.0)
        throw InvalidScenario("coverage must be in [0, 1]");
    if (boarding_rate <= 0.0 || stop_spacing_km <= 0.0 || alight_decay_km <= 0.0)
        throw InvalidScenario("rates and distances must be positive");
    if (round_trip_prob < 0.0 || round_trip_prob > 1.0)
        throw InvalidScenario("round_trip_prob must be in [0, 1]");
    if (field.base < 0.0)
        throw InvalidScenario("fraud_base must be >= 0");
    for (const auto& b : field.bumps)
        if (b.amplitude < 0.0 || b.amplitude > 0.5 || b.width_km <= 0.0)
            throw InvalidScenario("bump amplitude must be in [0, 0.5], width > 0");
}

SynthTruth generate(const SynthScenario& sc, const std::string& out_dir) {
    sc.validate();
    std::filesystem::create_directories(out_dir);
    std::mt19937_64 rng(sc.rng_seed);

    const int L = sc.n_lines, S = sc.stops_per_line;
    Centroid centroid{kLon0, kLat0};
    const double coslat = std::cos(kLat0 * M_PI / 180.0);

    // radial network: line k at angle 2*pi*k/L, stops marching outward
    std::vector<std::vector<SynthStation>> stations(L);
    for (int k = 0; k < L; ++k) {
        double angle = 2.0 * M_PI * k / L;
        for (int j = 1; j <= S; ++j) {
            SynthStation st;
            st.id = "L" + std::to_string(k + 1) + "S" + std::to_string(j);
            st.x = j * sc.stop_spacing_km * std::cos(angle);
            st.y = j * sc.stop_spacing_km * std::sin(angle);
            st.lon = centroid.lon0 + st.x / (111.32 * coslat);
            st.lat = centroid.lat0 + st.y / 110.57;
            st.p = sc.field.probability(st.x, st.y);
            stations[k].push_back(st);
        }
    }

    std::vector<SynthCourse> courses;
    const int cpld = sc.courses_per_line_per_day;
    for (int d = 0; d < sc.n_days; ++d) {
        for (int k = 0; k < L; ++k) {
            for (int i = 0; i < cpld; ++i) {
                SynthCourse c;
                c.line = k;
                c.dir = i % 2 == 0 ? Direction::outbound : Direction::inbound;
                c.day = d;
                c.start = 6 * 3600 + static_cast<long>(i) * (16 * 3600 / cpld);
                c.id = "L" + std::to_string(k + 1) + "-D" + std::to_string(d + 1) + "-C" +
                       std::to_string(i + 1);
                courses.push_back(std::move(c));
            }
        }
    }

    // station id / fraud probability at a 1-based outbound position
    auto station_at = [&](int line, Direction dir, int seq) -> const SynthStation& {
        int j = dir == Direction::outbound ? seq : S + 1 - seq;
        return stations[line][static_cast<std::size_t>(j) - 1];
    };

    // earliest opposite-direction course of the same line and day departing
    // after `ready`; -1 when none
    auto find_return = [&](int course_idx, long ready) -> int {
        const SynthCourse& c = courses[static_cast<std::size_t>(course_idx)];
        Direction want = c.dir == Direction::outbound ? Direction::inbound : Direction::outbound;
        int best = -1;
        long best_start = 0;
        int base = (c.day * L + c.line) * cpld; // same (day, line) block
        for (int i = base; i < base + cpld; ++i) {
            const SynthCourse& cand = courses[static_cast<std::size_t>(i)];
            if (cand.dir != want || cand.start < ready) continue;
            if (best < 0 || cand.start < best_start) {
                best = i;
                best_start = cand.start;
            }
        }
        return best;
    };

    std::vector<Trip> trips;
    long next_card = 1;
    for (int ci = 0; ci < static_cast<int>(courses.size()); ++ci) {
        const SynthCourse& c = courses[static_cast<std::size_t>(ci)];
        for (int seq = 1; seq < S; ++seq) {
            const SynthStation& board = station_at(c.line, c.dir, seq);
            int n_boarders = sample_poisson(rng, sc.boarding_rate);
            for (int b = 0; b < n_boarders; ++b) {
                bool fraud = next_unit(rng) < board.p;

                // alighting: categorical over downstream stops, weights
                // decaying with distance
                double total_w = 0.0;
                for (int j = seq + 1; j <= S; ++j)
                    total_w += std::exp(-(j - seq) * sc.stop_spacing_km / sc.alight_decay_km);
                double threshold = next_unit(rng) * total_w;
                int a_seq = S;
                double acc = 0.0;
                for (int j = seq + 1; j <= S; ++j) {
                    acc += std::exp(-(j - seq) * sc.stop_spacing_km / sc.alight_decay_km);
                    if (acc > threshold) {
                        a_seq = j;
                        break;
                    }
                }

                bool round_trip = next_unit(rng) < sc.round_trip_prob;
                int ret = -1;
                bool fraud_ret = false;
                if (round_trip) {
                    long ready = c.start + kHopS * (a_seq - 1) + kMinDwellS;
                    ret = find_return(ci, ready);
                    // fraud is decided per boarding, by the field at the
                    // boarding station of each leg
                    if (ret >= 0)
                        fraud_ret = next_unit(rng) < station_at(c.line, c.dir, a_seq).p;
                }

                // a card links the legs only when both were validated
                long card = -1;
                if (ret >= 0 && !fraud && !fraud_ret) card = next_card++;

                trips.push_back(Trip{ci, seq, a_seq, fraud, card});
                if (ret >= 0) {
                    // return leg: board where they alighted, alight where
                    // they boarded (positions mirror on the reverse route)
                    trips.push_back(Trip{ret, S + 1 - a_seq, S + 1 - seq, fraud_ret, card});
                }
            }
        }
    }

    // coverage: uniform-random subset of the roster
    std::vector<int> order(courses.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng() % i]);
    std::size_t n_covered =
        static_cast<std::size_t>(std::floor(sc.coverage * static_cast<double>(courses.size())));
    std::vector<bool> covered(courses.size(), false);
    for (std::size_t i = 0; i < n_covered; ++i) covered[static_cast<std::size_t>(order[i])] = true;

    // per-course flows
    std::vector<std::vector<long>> boardings(courses.size(), std::vector<long>(S, 0));
    std::vector<std::vector<long>> alightings(courses.size(), std::vector<long>(S, 0));
    for (const auto& t : trips) {
        boardings[static_cast<std::size_t>(t.course)][static_cast<std::size_t>(t.b_seq) - 1]++;
        alightings[static_cast<std::size_t>(t.course)][static_cast<std::size_t>(t.a_seq) - 1]++;
    }

    SynthTruth truth;
    for (std::size_t ci = 0; ci < courses.size(); ++ci) {
        std::vector<double> occ(static_cast<std::size_t>(S), 0.0);
        long running = 0;
        for (int s = 0; s < S; ++s) {
            running += boardings[ci][static_cast<std::size_t>(s)] -
                       alightings[ci][static_cast<std::size_t>(s)];
            occ[static_cast<std::size_t>(s)] = static_cast<double>(running);
        }
        truth.occupancy[courses[ci].id] = std::move(occ);
    }
    for (int k = 0; k < L; ++k)
        for (const auto& st : stations[static_cast<std::size_t>(k)])
            truth.field[st.id] = st.p;

    // ---- file output ----
    auto open = [&](const char* name) {
        std::ofstream f(out_dir + "/" + name, std::ios::binary);
        if (!f.is_open()) throw Error(std::string("cannot write ") + out_dir + "/" + name);
        return f;
    };

    {
        auto f = open("stations.csv");
        f << "station_id,name,lon,lat\n";
        for (int k = 0; k < L; ++k)
            for (const auto& st : stations[static_cast<std::size_t>(k)])
                f << st.id << ",Stop " << st.id << "," << fmt(st.lon, 6) << ","
                  << fmt(st.lat, 6) << "\n";
    }
    {
        auto f = open("routes.csv");
        f << "line_id,direction,seq,station_id\n";
        for (int k = 0; k < L; ++k) {
            for (int seq = 1; seq <= S; ++seq)
                f << "L" << k + 1 << ",outbound," << seq << ","
                  << station_at(k, Direction::outbound, seq).id << "\n";
            for (int seq = 1; seq <= S; ++seq)
                f << "L" << k + 1 << ",inbound," << seq << ","
                  << station_at(k, Direction::inbound, seq).id << "\n";
        }
    }
    {
        auto f = open("courses.csv");
        f << "course_id,line_id,direction,service_date,start_time\n";
        for (const auto& c : courses)
            f << c.id << ",L" << c.line + 1 << "," << to_string(c.dir) << ","
              << date_plus_days(c.day) << "," << c.start << "\n";
    }
    {
        auto f = open("afc.csv");
        f << "card_id,timestamp,course_id,station_id\n";
        for (const auto& t : trips) {
            if (t.fraud) continue; // fraudsters never validate
            const SynthCourse& c = courses[static_cast<std::size_t>(t.course)];
            long ts = c.start + kHopS * (t.b_seq - 1);
            f << (t.card >= 0 ? "C" + std::to_string(t.card) : "") << "," << ts << ","
              << c.id << "," << station_at(c.line, c.dir, t.b_seq).id << "\n";
        }
    }
    {
        auto f = open("apc.csv");
        f << "course_id,seq,boardings,alightings,occupancy_after\n";
        for (std::size_t ci = 0; ci < courses.size(); ++ci) {
            if (!covered[ci]) continue;
            long running = 0;
            for (int s = 0; s < S; ++s) {
                long y = boardings[ci][static_cast<std::size_t>(s)];
                long z = alightings[ci][static_cast<std::size_t>(s)];
                running += y - z;
                if (sc.apc_noise) {
                    double u = next_unit(rng);
                    long noisy = running + (u < 1.0 / 3 ? -1 : u < 2.0 / 3 ? 0 : 1);
                    f << courses[ci].id << "," << s + 1 << ",,,"
                      << std::max(0L, noisy) << "\n";
                } else {
                    f << courses[ci].id << "," << s + 1 << "," << y << "," << z << ","
                      << running << "\n";
                }
            }
        }
    }
    {
        auto f = open("truth_occupancy.csv");
        f << "course_id,seq,occupancy\n";
        for (const auto& c : courses) {
            const auto& occ = truth.occupancy.at(c.id);
            for (int s = 0; s < S; ++s)
                f << c.id << "," << s + 1 << ","
                  << static_cast<long>(occ[static_cast<std::size_t>(s)]) << "\n";
        }
    }
    {
        auto f = open("truth_field.csv");
        f << "station_id,fraud_probability\n";
        for (int k = 0; k < L; ++k)
            for (const auto& st : stations[static_cast<std::size_t>(k)])
                f << st.id << "," << fmt(st.p, 6) << "\n";
    }
    {
        auto f = open("truth_trips.csv");
        f << "card_id,course_id,boarding_seq,alighting_seq,fraud\n";
        for (const auto& t : trips)
            f << (t.card >= 0 ? "C" + std::to_string(t.card) : "") << ","
              << courses[static_cast<std::size_t>(t.course)].id << "," << t.b_seq << ","
              << t.a_seq << "," << (t.fraud ? 1 : 0) << "\n";
    }
    return truth;
}

std::map<std::string, double> oracle_rates(const SynthTruth& truth) {
    std::map<std::string, double> out;
    for (const auto& [station_id, p] : truth.field)
        out[station_id] = p / (1.0 - p);
    return out;
}

} // namespace uniocc
