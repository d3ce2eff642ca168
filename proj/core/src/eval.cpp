#include "uniocc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "uniocc/errors.hpp"
#include "uniocc/occupancy.hpp"

namespace uniocc {

double wmape(const std::vector<double>& reference, const std::vector<double>& estimate) {
    if (reference.size() != estimate.size())
        throw LengthMismatch("wMAPE inputs differ in shape");
    WmapeAccumulator acc;
    acc.add(reference, estimate);
    return acc.value();
}

void WmapeAccumulator::add(const std::vector<double>& reference,
                           const std::vector<double>& estimate) {
    if (reference.size() != estimate.size())
        throw LengthMismatch("wMAPE inputs differ in shape");
    for (std::size_t i = 0; i < reference.size(); ++i) add(reference[i], estimate[i]);
}

void WmapeAccumulator::add(double reference, double estimate) {
    abs_err_ += std::abs(reference - estimate);
    abs_ref_ += std::abs(reference);
    ++n_;
}

double WmapeAccumulator::value() const {
    if (abs_ref_ <= 0.0)
        throw ZeroReference("wMAPE reference sums to zero");
    return abs_err_ / abs_ref_;
}

int day_of_week(const std::string& iso_date) {
    if (iso_date.size() != 10 || iso_date[4] != '-' || iso_date[7] != '-')
        throw Error("bad ISO date: " + iso_date);
    int y = std::stoi(iso_date.substr(0, 4));
    unsigned m = static_cast<unsigned>(std::stoi(iso_date.substr(5, 2)));
    unsigned d = static_cast<unsigned>(std::stoi(iso_date.substr(8, 2)));
    // days since 1970-01-01 (civil calendar)
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    long days = era * 146097L + static_cast<long>(doe) - 719468L;
    return static_cast<int>(((days % 7) + 7 + 3) % 7); // 1970-01-01 was a Thursday
}

namespace {

std::string ctx_key(const Course& course, const std::string& station_id, int level,
                    long hop_s, int seq) {
    std::string key = course.key.line_id;
    key += '|';
    key += to_string(course.key.direction);
    key += '|';
    key += station_id;
    if (level <= 1) {
        key += '|';
        key += std::to_string(day_of_week(course.key.service_date));
    }
    if (level == 0) {
        long t = course.key.start_time_s + hop_s * (seq - 1);
        key += '|';
        key += std::to_string((t / 900) % 96);
    }
    return key;
}

} // namespace

ContextualAverage::ContextualAverage(const NetworkDataset& dataset,
                                     const std::vector<const OccupancyProfile*>& training,
                                     long nominal_hop_s)
    : hop_s_(nominal_hop_s) {
    for (const OccupancyProfile* p : training) {
        const Course& course = dataset.course(p->course.course_id);
        for (std::size_t i = 0; i < course.stops.size() && i < p->total.size(); ++i) {
            int seq = course.stops[i].seq;
            const std::string& st = course.stops[i].station_id;
            double v = p->total[i];
            for (int level = 0; level <= 2; ++level) {
                auto& s = (level == 0 ? full_ : level == 1 ? no_qh_ : no_dow_)
                              [ctx_key(course, st, level, hop_s_, seq)];
                s.sum += v;
                s.n += 1;
            }
        }
    }
}

std::optional<std::vector<double>> ContextualAverage::predict(
    const Course& course, const std::vector<double>* exclude_totals) const {
    std::vector<double> out(course.stops.size(), 0.0);
    for (std::size_t i = 0; i < course.stops.size(); ++i) {
        const std::string& st = course.stops[i].station_id;
        bool hit = false;
        for (int level = 0; level <= 2 && !hit; ++level) {
            const auto& m = level == 0 ? full_ : level == 1 ? no_qh_ : no_dow_;
            auto it = m.find(ctx_key(course, st, level, hop_s_, course.stops[i].seq));
            if (it == m.end()) continue;
            double sum = it->second.sum;
            std::size_t n = it->second.n;
            if (exclude_totals && i < exclude_totals->size() && n > 0) {
                sum -= (*exclude_totals)[i];
                n -= 1;
            }
            if (n > 0) {
                out[i] = sum / static_cast<double>(n);
                hit = true;
            }
        }
        if (!hit) return std::nullopt; // the line has no covered training course
    }
    return out;
}

const EvalRow* EvalReport::find(const std::string& method, const std::string& scope) const {
    for (const auto& r : rows)
        if (r.method == method && r.scope == scope) return &r;
    return nullptr;
}

namespace {

// Ticketing profiles, APC occupancies and per-course ratios computed once;
// evaluation protocols then only re-aggregate over training subsets.
struct Prepared {
    std::vector<OccupancyProfile> ticketing; // by course index
    std::unordered_map<std::string, std::vector<double>> apc; // covered courses
    std::vector<CourseRatios> ratios;                          // covered courses
};

Prepared prepare(const NetworkDataset& dataset, const PipelineOptions& opt) {
    Prepared prep;
    auto trips = reconstruct_trips(dataset, opt.od);
    std::unordered_map<std::string, std::vector<ReconstructedTrip>> by_course;
    for (const auto& t : trips) by_course[t.course_id].push_back(t);
    static const std::vector<ReconstructedTrip> kNoTrips;
    prep.ticketing.reserve(dataset.courses.size());
    for (const auto& course : dataset.courses) {
        auto it = by_course.find(course.key.course_id);
        prep.ticketing.push_back(
            ticketing_profile(course, it == by_course.end() ? kNoTrips : it->second));
    }
    for (std::size_t c = 0; c < dataset.courses.size(); ++c) {
        const Course& course = dataset.courses[c];
        if (!dataset.apc_coverage.count(course.key.course_id)) continue;
        auto apc = apc_occupancy(course.stops);
        prep.ratios.push_back(CourseRatios{
            course.key.course_id,
            course_fraud_ratios(apc.occupancy, prep.ticketing[c].ticketing, nullptr)});
        prep.apc[course.key.course_id] = std::move(apc.occupancy);
    }
    return prep;
}

FraudRateTable table_from(const NetworkDataset& dataset, const Prepared& prep,
                          const std::unordered_set<std::string>& training_ids,
                          std::size_t min_courses) {
    std::vector<CourseRatios> subset;
    for (const auto& cr : prep.ratios)
        if (training_ids.count(cr.course_id)) subset.push_back(cr);
    return mean_fraud_rates(dataset, subset, min_courses);
}

GeostatFit geostat_from(const NetworkDataset& dataset, const FraudRateTable& table,
                        const GeostatOptions& opt) {
    std::map<std::string, std::pair<double, std::size_t>> per_station;
    for (const auto& [key, entry] : table.entries) {
        auto& acc = per_station[key.first];
        acc.first += entry.rate;
        acc.second += 1;
    }
    std::map<std::string, double> values;
    for (const auto& [id, acc] : per_station)
        values[id] = acc.first / static_cast<double>(acc.second);
    std::vector<Station> stations;
    stations.reserve(dataset.stations.size());
    for (const auto& [_, s] : dataset.stations) stations.push_back(s);
    std::sort(stations.begin(), stations.end(),
              [](const Station& a, const Station& b) { return a.station_id < b.station_id; });
    return fit_geostat(stations, values, opt);
}

std::vector<std::string> sorted_covered(const NetworkDataset& dataset) {
    std::vector<std::string> ids(dataset.apc_coverage.begin(), dataset.apc_coverage.end());
    std::sort(ids.begin(), ids.end());
    return ids;
}

// portable Fisher-Yates
void seeded_shuffle(std::vector<std::string>& v, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng() % i]);
}

std::vector<const OccupancyProfile*> measured_profiles(
    const NetworkDataset& dataset, const Prepared& prep,
    const std::unordered_set<std::string>& ids, std::vector<OccupancyProfile>& storage) {
    storage.clear();
    storage.reserve(ids.size());
    for (std::size_t c = 0; c < dataset.courses.size(); ++c) {
        const auto& id = dataset.courses[c].key.course_id;
        if (!ids.count(id)) continue;
        OccupancyProfile p;
        p.course = dataset.courses[c].key;
        p.total = prep.apc.at(id);
        storage.push_back(std::move(p));
    }
    std::vector<const OccupancyProfile*> out;
    out.reserve(storage.size());
    for (const auto& p : storage) out.push_back(&p);
    return out;
}

} // namespace

EvalReport holdout_30(const NetworkDataset& dataset, const PipelineOptions& opt,
                      std::uint64_t seed) {
    if (dataset.apc_coverage.empty())
        throw NoCoveredCourses("holdout evaluation needs APC coverage");

    Prepared prep = prepare(dataset, opt);

    auto ids = sorted_covered(dataset);
    seeded_shuffle(ids, seed);
    std::size_t n_held = static_cast<std::size_t>(std::floor(0.3 * static_cast<double>(ids.size())));
    if (n_held == 0 && ids.size() > 1) n_held = 1;
    std::unordered_set<std::string> held(ids.begin(), ids.begin() + static_cast<long>(n_held));
    std::unordered_set<std::string> training;
    for (std::size_t i = n_held; i < ids.size(); ++i) training.insert(ids[i]);
    if (training.empty())
        throw NoCoveredCourses("holdout removal left no training course");

    FraudRateTable table = table_from(dataset, prep, training, opt.min_courses);
    GeostatFit fit = geostat_from(dataset, table, opt.geostat);
    RateResolver resolver(table, fit, dataset.stations);

    // lines whose covered training set was emptied are reported, not scored
    std::unordered_set<std::string> trained_lines;
    for (const auto& id : training) trained_lines.insert(dataset.course(id).key.line_id);

    std::vector<OccupancyProfile> storage;
    ContextualAverage baseline(dataset, measured_profiles(dataset, prep, training, storage));

    EvalReport report;
    std::unordered_set<std::string> skipped_lines;
    WmapeAccumulator acc_rate, acc_ctx;
    for (std::size_t c = 0; c < dataset.courses.size(); ++c) {
        const Course& course = dataset.courses[c];
        if (!held.count(course.key.course_id)) continue;
        if (!trained_lines.count(course.key.line_id)) {
            skipped_lines.insert(course.key.line_id);
            continue;
        }
        const auto& truth = prep.apc.at(course.key.course_id);
        auto unified = unify_course(course, prep.ticketing[c], resolver);
        acc_rate.add(truth, unified.total);
        if (auto ctx = baseline.predict(course)) acc_ctx.add(truth, *ctx);
    }

    report.rows.push_back({"mean_fraud_rate", "holdout30", acc_rate.value(), acc_rate.n_entries()});
    report.rows.push_back({"contextual_average", "holdout30", acc_ctx.value(), acc_ctx.n_entries()});
    report.skipped.assign(skipped_lines.begin(), skipped_lines.end());
    std::sort(report.skipped.begin(), report.skipped.end());
    return report;
}

EvalReport leave_line_out(const NetworkDataset& dataset, const PipelineOptions& opt) {
    std::unordered_set<std::string> covered_lines;
    for (const auto& id : dataset.apc_coverage)
        covered_lines.insert(dataset.course(id).key.line_id);
    if (covered_lines.size() < 2)
        throw TooFewLines("leave-line-out needs at least 2 covered lines");

    Prepared prep = prepare(dataset, opt);

    std::unordered_set<std::string> all_covered(dataset.apc_coverage.begin(),
                                                dataset.apc_coverage.end());
    std::vector<OccupancyProfile> storage;
    ContextualAverage baseline(dataset, measured_profiles(dataset, prep, all_covered, storage));

    std::vector<std::string> lines(covered_lines.begin(), covered_lines.end());
    std::sort(lines.begin(), lines.end());

    EvalReport report;
    WmapeAccumulator all_kriged, all_ctx;
    FraudRateTable empty_table; // forces every station onto the kriged path
    for (const auto& line : lines) {
        std::unordered_set<std::string> training;
        for (const auto& id : all_covered)
            if (dataset.course(id).key.line_id != line) training.insert(id);

        FraudRateTable table = table_from(dataset, prep, training, opt.min_courses);
        GeostatFit fit = geostat_from(dataset, table, opt.geostat);
        RateResolver resolver(empty_table, fit, dataset.stations);

        WmapeAccumulator acc;
        for (std::size_t c = 0; c < dataset.courses.size(); ++c) {
            const Course& course = dataset.courses[c];
            if (course.key.line_id != line || !all_covered.count(course.key.course_id)) continue;
            const auto& truth = prep.apc.at(course.key.course_id);
            auto unified = unify_course(course, prep.ticketing[c], resolver);
            acc.add(truth, unified.total);
            all_kriged.add(truth, unified.total);
            // the baseline saw this course in training; score it leave-one-out
            if (auto ctx = baseline.predict(course, &truth)) all_ctx.add(truth, *ctx);
        }
        report.rows.push_back({"geospatial", line, acc.value(), acc.n_entries()});
    }
    report.rows.push_back({"geospatial", "all", all_kriged.value(), all_kriged.n_entries()});
    report.rows.push_back({"contextual_average", "all", all_ctx.value(), all_ctx.n_entries()});
    return report;
}

std::vector<SweepPoint> coverage_sweep(const NetworkDataset& dataset,
                                       const std::string& line_id,
                                       const PipelineOptions& opt,
                                       std::uint64_t seed) {
    std::vector<std::string> line_covered;
    std::size_t line_total = 0;
    for (const auto& course : dataset.courses) {
        if (course.key.line_id != line_id) continue;
        ++line_total;
        if (dataset.apc_coverage.count(course.key.course_id))
            line_covered.push_back(course.key.course_id);
    }
    if (line_total == 0)
        throw ReferentialError("unknown line " + line_id);
    if (line_covered.size() < 3 ||
        static_cast<double>(line_covered.size()) < 0.9 * static_cast<double>(line_total))
        throw NotCoveredEnough("coverage sweep needs a (near) fully covered line");

    Prepared prep = prepare(dataset, opt);
    std::sort(line_covered.begin(), line_covered.end());
    seeded_shuffle(line_covered, seed);

    std::unordered_map<std::string, std::size_t> course_idx;
    for (std::size_t c = 0; c < dataset.courses.size(); ++c)
        course_idx[dataset.courses[c].key.course_id] = c;

    std::vector<SweepPoint> series;
    const std::size_t n = line_covered.size();
    for (std::size_t k = 1; k + 1 <= n; ++k) { // leave at least one covered course
        std::unordered_set<std::string> training(dataset.apc_coverage.begin(),
                                                 dataset.apc_coverage.end());
        for (std::size_t i = 0; i < k; ++i) training.erase(line_covered[i]);

        FraudRateTable table = table_from(dataset, prep, training, opt.min_courses);

        // stations of this line missing from the table fall back to the
        // line mean, then to the global mean
        double line_sum = 0.0, global_sum = 0.0;
        std::size_t line_n = 0, global_n = 0;
        for (const auto& [key, e] : table.entries) {
            global_sum += e.rate;
            ++global_n;
            if (key.second == line_id) {
                line_sum += e.rate;
                ++line_n;
            }
        }
        double line_mean = line_n ? line_sum / static_cast<double>(line_n)
                                  : (global_n ? global_sum / static_cast<double>(global_n) : 0.0);

        WmapeAccumulator acc;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t c = course_idx.at(line_covered[i]);
            const Course& course = dataset.courses[c];
            const auto& truth = prep.apc.at(course.key.course_id);
            const auto& ticketing = prep.ticketing[c].ticketing;
            std::vector<double> est(ticketing.size(), 0.0);
            for (std::size_t s = 0; s + 1 < ticketing.size(); ++s) {
                const FraudRateEntry* e = table.find(course.stops[s].station_id, line_id);
                double rate = e ? e->rate : line_mean;
                est[s] = ticketing[s] * (1.0 + rate);
            }
            acc.add(truth, est);
        }
        series.push_back(SweepPoint{
            static_cast<double>(n - k) / static_cast<double>(line_total), acc.value(), k});
    }
    return series;
}

} // namespace uniocc
