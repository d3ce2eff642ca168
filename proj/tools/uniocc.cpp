// Command-line front end: synthetic data generation, the unification
// pipeline, the evaluation protocols and the fraud-map export.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uniocc/config.hpp"
#include "uniocc/errors.hpp"
#include "uniocc/eval.hpp"
#include "uniocc/io.hpp"
#include "uniocc/synth.hpp"
#include "uniocc/unify.hpp"

namespace {

struct CommonArgs {
    std::string data_dir;
    std::string out_dir = ".";
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

uniocc::Config load_config(const CommonArgs& args) {
    uniocc::Config cfg;
    if (!args.config_path.empty()) cfg = uniocc::Config::from_file(args.config_path);
    if (args.seed) cfg.set("rng_seed", std::to_string(*args.seed));
    return cfg;
}

uniocc::NetworkDataset load_dataset(const CommonArgs& args, const uniocc::Config& cfg) {
    auto paths = uniocc::InputPaths::in_dir(args.data_dir);
    return uniocc::load_network(paths, cfg);
}

void ensure_out(const CommonArgs& args) {
    std::filesystem::create_directories(args.out_dir);
}

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_data = true) {
    if (needs_data)
        cmd->add_option("--data", args.data_dir, "input directory with the network CSV files")
            ->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--config", args.config_path, "key=value config file");
    cmd->add_option("--seed", args.seed, "RNG seed (overrides config rng_seed)");
}

void run_full_pipeline(const CommonArgs& args) {
    ensure_out(args);
    auto cfg = load_config(args);
    auto dataset = load_dataset(args, cfg);
    auto opt = uniocc::PipelineOptions::from(cfg);
    auto result = uniocc::run_pipeline(dataset, opt);

    const std::string& out = args.out_dir;
    uniocc::write_rejects(out + "/rejects.csv", dataset.rejects);
    uniocc::write_trips(out + "/trips.csv", dataset, result.trips);
    uniocc::write_fraud_rates(out + "/fraud_rates.csv", result.table);
    uniocc::write_variogram(out + "/variogram.csv", result.geostat.variogram);
    uniocc::write_training_points(out + "/training_points.csv", result.geostat.model->points());
    uniocc::write_occupancies(out + "/occupancies.csv", dataset, result.profiles);
    std::cout << "unified " << result.profiles.size() << " courses ("
              << dataset.apc_coverage.size() << " APC-covered), "
              << result.table.entries.size() << " mean-rate entries\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"unified occupancy toolkit: fuse fare-validation and passenger-counting "
                 "data into complete per-course occupancy with a spatial fraud model"};
    app.require_subcommand(1);

    CommonArgs args;

    std::string scenario_path;
    auto* synth = app.add_subcommand("synth", "generate a synthetic network with ground truth");
    synth->add_option("--scenario", scenario_path, "scenario key=value file")->required();
    add_common(synth, args, false);

    auto* ingest = app.add_subcommand("ingest", "parse and validate the input files");
    add_common(ingest, args);

    auto* reconstruct = app.add_subcommand("reconstruct", "O/D reconstruction (trips.csv)");
    add_common(reconstruct, args);

    auto* rates = app.add_subcommand("rates", "mean fraud rates per station and line");
    add_common(rates, args);

    auto* krige = app.add_subcommand("krige", "fit the variogram and kriging model");
    add_common(krige, args);

    auto* unify = app.add_subcommand("unify", "run the full unification pipeline");
    add_common(unify, args);

    std::string protocol;
    auto* evaluate = app.add_subcommand("evaluate", "run an evaluation protocol");
    evaluate->add_option("--protocol", protocol, "holdout30 or leavelineout")
        ->required()
        ->check(CLI::IsMember({"holdout30", "leavelineout"}));
    add_common(evaluate, args);

    std::string sweep_line;
    auto* sweep = app.add_subcommand("sweep", "coverage sweep on a fully covered line");
    sweep->add_option("--line", sweep_line, "line id")->required();
    add_common(sweep, args);

    std::size_t resolution = 200;
    auto* fraudmap = app.add_subcommand("fraudmap", "export the kriged fraud-rate raster");
    fraudmap->add_option("--resolution", resolution, "grid cells per axis (default 200)");
    add_common(fraudmap, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) {
            ensure_out(args);
            auto cfg = uniocc::Config::from_file(scenario_path);
            if (args.seed) cfg.set("rng_seed", std::to_string(*args.seed));
            auto scenario = uniocc::SynthScenario::from(cfg);
            uniocc::generate(scenario, args.out_dir);
            std::cout << "wrote synthetic network to " << args.out_dir << "\n";
        } else if (ingest->parsed()) {
            ensure_out(args);
            auto cfg = load_config(args);
            auto dataset = load_dataset(args, cfg);
            std::string reject_path = cfg.get("reject_log_path", args.out_dir + "/rejects.csv");
            uniocc::write_rejects(reject_path, dataset.rejects);
            uniocc::write_coverage(args.out_dir + "/coverage_summary.csv",
                                   uniocc::coverage_summary(dataset));
            std::cout << dataset.courses.size() << " courses, "
                      << dataset.validations.size() << " validations, "
                      << dataset.apc_coverage.size() << " APC-covered, "
                      << dataset.rejects.size() << " rejected rows\n";
        } else if (reconstruct->parsed()) {
            ensure_out(args);
            auto cfg = load_config(args);
            auto dataset = load_dataset(args, cfg);
            auto trips = uniocc::reconstruct_trips(dataset, uniocc::OdConfig::from(cfg));
            uniocc::write_trips(args.out_dir + "/trips.csv", dataset, trips);
            std::cout << trips.size() << " trips reconstructed\n";
        } else if (rates->parsed() || krige->parsed()) {
            ensure_out(args);
            auto cfg = load_config(args);
            auto dataset = load_dataset(args, cfg);
            auto opt = uniocc::PipelineOptions::from(cfg);
            auto result = uniocc::run_pipeline(dataset, opt);
            if (rates->parsed()) {
                uniocc::write_fraud_rates(args.out_dir + "/fraud_rates.csv", result.table);
                std::cout << result.table.entries.size() << " mean-rate entries\n";
            } else {
                uniocc::write_variogram(args.out_dir + "/variogram.csv",
                                        result.geostat.variogram);
                uniocc::write_training_points(args.out_dir + "/training_points.csv",
                                              result.geostat.model->points());
                std::cout << "variogram nugget=" << result.geostat.variogram.nugget
                          << " sill=" << result.geostat.variogram.sill
                          << " range_km=" << result.geostat.variogram.range_km << "\n";
            }
        } else if (unify->parsed()) {
            run_full_pipeline(args);
        } else if (evaluate->parsed()) {
            ensure_out(args);
            auto cfg = load_config(args);
            auto dataset = load_dataset(args, cfg);
            auto opt = uniocc::PipelineOptions::from(cfg);
            uniocc::EvalReport report;
            if (protocol == "holdout30")
                report = uniocc::holdout_30(dataset, opt, cfg.get_u64("rng_seed", 42));
            else
                report = uniocc::leave_line_out(dataset, opt);
            uniocc::write_eval_report(args.out_dir + "/eval_report.csv", report);
            for (const auto& row : report.rows)
                std::cout << row.method << " " << row.scope << " wMAPE="
                          << row.wmape << " (" << row.n_entries << " entries)\n";
        } else if (sweep->parsed()) {
            ensure_out(args);
            auto cfg = load_config(args);
            auto dataset = load_dataset(args, cfg);
            auto opt = uniocc::PipelineOptions::from(cfg);
            auto series = uniocc::coverage_sweep(dataset, sweep_line, opt,
                                                 cfg.get_u64("rng_seed", 42));
            uniocc::write_sweep(args.out_dir + "/sweep.csv", series);
            std::cout << series.size() << " sweep points written\n";
        } else if (fraudmap->parsed()) {
            ensure_out(args);
            auto cfg = load_config(args);
            auto dataset = load_dataset(args, cfg);
            auto opt = uniocc::PipelineOptions::from(cfg);
            auto result = uniocc::run_pipeline(dataset, opt);
            std::vector<uniocc::Station> stations;
            for (const auto& [_, s] : dataset.stations) stations.push_back(s);
            std::sort(stations.begin(), stations.end(),
                      [](const uniocc::Station& a, const uniocc::Station& b) {
                          return a.station_id < b.station_id;
                      });
            uniocc::FraudMapOptions map_opt;
            map_opt.grid_cols = resolution;
            map_opt.grid_rows = resolution;
            uniocc::write_fraud_map(args.out_dir + "/fraudmap.csv", result.geostat, stations,
                                    map_opt);
            uniocc::write_stations_geojson(args.out_dir + "/stations.geojson", dataset,
                                           result.table, result.geostat);
            std::cout << "fraud map and station GeoJSON written\n";
        }
    } catch (const uniocc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
