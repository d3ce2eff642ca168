#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "uniocc/csv.hpp"
#include "uniocc/errors.hpp"
#include "uniocc/ingest.hpp"
#include "uniocc/synth.hpp"
#include "test_support.hpp"

using namespace uniocc;
using testsupport::read_file;

namespace {

SynthScenario small_scenario() {
    SynthScenario sc;
    sc.n_lines = 2;
    sc.stops_per_line = 6;
    sc.courses_per_line_per_day = 8;
    sc.n_days = 2;
    sc.boarding_rate = 3.0;
    sc.coverage = 0.25;
    sc.field.base = 0.1;
    sc.rng_seed = 99;
    return sc;
}

const char* kFiles[] = {"stations.csv", "routes.csv",  "courses.csv",
                        "afc.csv",      "apc.csv",     "truth_occupancy.csv",
                        "truth_field.csv", "truth_trips.csv"};

} // namespace

TEST_CASE("fraud field is capped at one half") {
    FraudField f;
    f.base = 0.2;
    f.bumps.push_back({0, 0, 0.5, 2.0});
    CHECK(f.probability(0, 0) == 0.5);
    CHECK(f.probability(50, 50) == doctest::Approx(0.2));
    CHECK(f.probability(4, 0) < 0.5);
}

TEST_CASE("same seed writes byte-identical files") {
    auto d1 = testsupport::unique_tmp_dir("synth_a");
    auto d2 = testsupport::unique_tmp_dir("synth_b");
    generate(small_scenario(), d1);
    generate(small_scenario(), d2);
    for (const char* name : kFiles) {
        auto a = read_file(d1 + "/" + std::string(name));
        CHECK(!a.empty());
        CHECK(a == read_file(d2 + "/" + std::string(name)));
    }
}

TEST_CASE("different seeds diverge") {
    auto d1 = testsupport::unique_tmp_dir("synth_s1");
    auto d2 = testsupport::unique_tmp_dir("synth_s2");
    auto sc = small_scenario();
    generate(sc, d1);
    sc.rng_seed = 100;
    generate(sc, d2);
    CHECK(read_file(d1 + "/afc.csv") != read_file(d2 + "/afc.csv"));
}

TEST_CASE("generated files load with zero rejects") {
    auto dir = testsupport::unique_tmp_dir("synth_load");
    generate(small_scenario(), dir);
    auto ds = load_network(InputPaths::in_dir(dir), Config{});
    CHECK(ds.rejects.empty());
    CHECK(ds.courses.size() == 2 * 8 * 2);
    CHECK(ds.stations.size() == 2 * 6);
}

TEST_CASE("coverage subset size and exact APC occupancy") {
    auto dir = testsupport::unique_tmp_dir("synth_cov");
    auto sc = small_scenario();
    auto truth = generate(sc, dir);
    auto ds = load_network(InputPaths::in_dir(dir), Config{});

    auto n_courses = 2 * 8 * 2;
    CHECK(ds.apc_coverage.size() ==
          static_cast<std::size_t>(std::floor(sc.coverage * n_courses)));

    // noiseless APC reproduces the true occupancy on every covered course
    for (const auto& c : ds.courses) {
        if (!ds.apc_coverage.count(c.key.course_id)) continue;
        const auto& occ = truth.occupancy.at(c.key.course_id);
        for (std::size_t s = 0; s < c.stops.size(); ++s) {
            REQUIRE(c.stops[s].apc.has_value());
            CHECK(static_cast<double>(*c.stops[s].apc->occupancy_after) == occ[s]);
        }
        CHECK(occ.back() == 0.0);
    }
}

TEST_CASE("fraudulent passengers never appear in the fare data") {
    auto dir = testsupport::unique_tmp_dir("synth_fraud");
    auto sc = small_scenario();
    sc.field.base = 0.3;
    auto truth = generate(sc, dir);
    auto ds = load_network(InputPaths::in_dir(dir), Config{});

    // per-course truth boardings including fraud, from truth_trips.csv
    std::map<std::string, long> true_boarders, fraud_boarders;
    std::ifstream f(dir + "/truth_trips.csv");
    std::vector<std::string> row;
    csv::read_record(f, row);
    while (csv::read_record(f, row)) {
        true_boarders[row[1]]++;
        if (row[4] == "1") fraud_boarders[row[1]]++;
    }

    long fraud_total = 0;
    for (const auto& c : ds.courses) {
        long afc = 0;
        for (const auto& s : c.stops) afc += s.boardings_afc;
        CHECK(afc == true_boarders[c.key.course_id] - fraud_boarders[c.key.course_id]);
        fraud_total += fraud_boarders[c.key.course_id];
    }
    CHECK(fraud_total > 0);
    (void)truth;
}

TEST_CASE("oracle rates are the odds of the field probability") {
    SynthTruth truth;
    truth.field = {{"a", 0.0}, {"b", 0.2}, {"c", 0.5}};
    auto rates = oracle_rates(truth);
    CHECK(rates["a"] == 0.0);
    CHECK(rates["b"] == doctest::Approx(0.25));
    CHECK(rates["c"] == doctest::Approx(1.0));
}

TEST_CASE("scenario validation rejects bad parameters") {
    SynthScenario sc;
    sc.stops_per_line = 1;
    CHECK_THROWS_AS(sc.validate(), InvalidScenario);
    sc = SynthScenario{};
    sc.coverage = 1.5;
    CHECK_THROWS_AS(sc.validate(), InvalidScenario);
    sc = SynthScenario{};
    sc.field.bumps.push_back({0, 0, 0.9, 1.0});
    CHECK_THROWS_AS(sc.validate(), InvalidScenario);
    CHECK_NOTHROW(SynthScenario{}.validate());
}

TEST_CASE("scenario parses from a config file") {
    auto dir = testsupport::unique_tmp_dir("synth_cfg");
    testsupport::write_file(dir + "/scenario.conf",
                            "n_lines = 3\n"
                            "stops_per_line = 12\n"
                            "coverage = 0.4\n"
                            "fraud_base = 0.02\n"
                            "fraud_bumps = 1.5:-2:0.25:3|0:4:0.1:2\n");
    auto sc = SynthScenario::from(Config::from_file(dir + "/scenario.conf"));
    CHECK(sc.n_lines == 3);
    CHECK(sc.stops_per_line == 12);
    CHECK(sc.coverage == 0.4);
    CHECK(sc.field.base == 0.02);
    REQUIRE(sc.field.bumps.size() == 2);
    CHECK(sc.field.bumps[0].x == 1.5);
    CHECK(sc.field.bumps[0].y == -2.0);
    CHECK(sc.field.bumps[1].amplitude == 0.1);
}

TEST_CASE("malformed bump specification throws") {
    Config c;
    c.set("fraud_bumps", "1:2:0.1");
    CHECK_THROWS_AS(SynthScenario::from(c), InvalidScenario);
}
