#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "uniocc/errors.hpp"
#include "uniocc/ingest.hpp"
#include "test_support.hpp"

using namespace uniocc;
using testsupport::write_file;

namespace {

// 1 line, 3 stations, 2 courses, 5 validations
std::string make_fixture(const std::string& extra_afc = "",
                         const std::string& apc = "course_id,seq,boardings,alightings,occupancy_after\n") {
    auto dir = testsupport::unique_tmp_dir("ingest");
    write_file(dir + "/stations.csv",
               "station_id,name,lon,lat\n"
               "s1,First,2.0,47.0\n"
               "s2,Second,2.01,47.0\n"
               "s3,Third,2.02,47.0\n");
    write_file(dir + "/routes.csv",
               "line_id,direction,seq,station_id\n"
               "L1,outbound,1,s1\nL1,outbound,2,s2\nL1,outbound,3,s3\n");
    write_file(dir + "/courses.csv",
               "course_id,line_id,direction,service_date,start_time\n"
               "c1,L1,outbound,2024-03-04,28800\n"
               "c2,L1,outbound,2024-03-04,30600\n");
    write_file(dir + "/afc.csv",
               "card_id,timestamp,course_id,station_id\n"
               "A,28800,c1,s1\n"
               "A,28920,c1,s2\n"
               ",28810,c1,s1\n"
               "B,30600,c2,s1\n"
               ",30720,c2,s2\n" +
                   extra_afc);
    write_file(dir + "/apc.csv", apc);
    return dir;
}

} // namespace

TEST_CASE("minimal fixture loads and aggregates boardings") {
    auto dir = make_fixture();
    auto ds = load_network(InputPaths::in_dir(dir), Config{});
    CHECK(ds.courses.size() == 2);
    CHECK(ds.validations.size() == 5);
    long total = 0;
    for (const auto& c : ds.courses)
        for (const auto& s : c.stops) total += s.boardings_afc;
    CHECK(total == 5);
    CHECK(ds.rejects.empty());
}

TEST_CASE("validation at an unknown station is rejected, load continues") {
    auto dir = make_fixture(",28830,c1,s9\n");
    auto ds = load_network(InputPaths::in_dir(dir), Config{});
    CHECK(ds.validations.size() == 5);
    REQUIRE(ds.rejects.size() == 1);
    CHECK(ds.rejects[0].file == "afc.csv");
    CHECK(ds.rejects[0].reason.find("s9") != std::string::npos);
}

TEST_CASE("validation at the final stop is rejected") {
    auto dir = make_fixture(",28900,c1,s3\n");
    auto ds = load_network(InputPaths::in_dir(dir), Config{});
    CHECK(ds.validations.size() == 5);
    CHECK(ds.rejects.size() == 1);
}

TEST_CASE("timestamp outside the schedule window is rejected") {
    auto dir = make_fixture(",50000,c1,s1\n");
    auto ds = load_network(InputPaths::in_dir(dir), Config{});
    CHECK(ds.validations.size() == 5);
    REQUIRE(ds.rejects.size() == 1);
    CHECK(ds.rejects[0].reason.find("window") != std::string::npos);
}

TEST_CASE("course with APC on 2 of 3 stops is not covered") {
    auto dir = make_fixture("",
                            "course_id,seq,boardings,alightings,occupancy_after\n"
                            "c1,1,,,5\nc1,2,,,6\n"
                            "c2,1,,,4\nc2,2,,,4\nc2,3,,,0\n");
    auto ds = load_network(InputPaths::in_dir(dir), Config{});
    CHECK(ds.apc_coverage.count("c1") == 0);
    CHECK(ds.apc_coverage.count("c2") == 1);
}

TEST_CASE("missing column raises SchemaError") {
    auto dir = make_fixture();
    write_file(dir + "/stations.csv", "station_id,name,lon\ns1,First,2.0\n");
    CHECK_THROWS_AS(load_network(InputPaths::in_dir(dir), Config{}), SchemaError);
}

TEST_CASE("empty roster raises EmptyDataset") {
    auto dir = make_fixture();
    write_file(dir + "/courses.csv", "course_id,line_id,direction,service_date,start_time\n");
    CHECK_THROWS_AS(load_network(InputPaths::in_dir(dir), Config{}), EmptyDataset);
}

TEST_CASE("boardings equal accepted validations per course") {
    auto dir = make_fixture(",28830,c1,s9\n"); // one reject mixed in
    auto ds = load_network(InputPaths::in_dir(dir), Config{});
    for (const auto& c : ds.courses) {
        long boarded = 0;
        for (const auto& s : c.stops) boarded += s.boardings_afc;
        long accepted = static_cast<long>(
            std::count_if(ds.validations.begin(), ds.validations.end(),
                          [&](const ValidationRecord& v) { return v.course_id == c.key.course_id; }));
        CHECK(boarded == accepted);
    }
}

TEST_CASE("loading is deterministic") {
    auto dir = make_fixture();
    auto a = load_network(InputPaths::in_dir(dir), Config{});
    auto b = load_network(InputPaths::in_dir(dir), Config{});
    REQUIRE(a.courses.size() == b.courses.size());
    for (std::size_t i = 0; i < a.courses.size(); ++i) {
        CHECK(a.courses[i].key.course_id == b.courses[i].key.course_id);
        for (std::size_t s = 0; s < a.courses[i].stops.size(); ++s)
            CHECK(a.courses[i].stops[s].boardings_afc == b.courses[i].stops[s].boardings_afc);
    }
}

TEST_CASE("coverage summary ratios") {
    auto dir = make_fixture("",
                            "course_id,seq,boardings,alightings,occupancy_after\n"
                            "c2,1,,,4\nc2,2,,,4\nc2,3,,,0\n");
    auto ds = load_network(InputPaths::in_dir(dir), Config{});
    auto summary = coverage_summary(ds);
    REQUIRE(summary.size() == 1);
    CHECK(summary[0].n_courses == 2);
    CHECK(summary[0].n_covered == 1);
    CHECK(summary[0].ratio == doctest::Approx(0.5));
    CHECK_FALSE(summary[0].kriging_only);
}

TEST_CASE("line with zero covered courses is flagged kriging-only") {
    auto dir = make_fixture();
    auto ds = load_network(InputPaths::in_dir(dir), Config{});
    auto summary = coverage_summary(ds);
    REQUIRE(summary.size() == 1);
    CHECK(summary[0].ratio == 0.0);
    CHECK(summary[0].kriging_only);
}

TEST_CASE("quoted CSV fields with commas survive") {
    auto dir = make_fixture();
    write_file(dir + "/stations.csv",
               "station_id,name,lon,lat\n"
               "s1,\"First, the gate\",2.0,47.0\n"
               "s2,Second,2.01,47.0\n"
               "s3,Third,2.02,47.0\n");
    auto ds = load_network(InputPaths::in_dir(dir), Config{});
    CHECK(ds.stations.at("s1").name == "First, the gate");
}
