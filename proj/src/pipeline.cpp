#include "hometrend/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "hometrend/errors.hpp"
#include "hometrend/io.hpp"
#include "hometrend/seeding.hpp"

namespace hometrend {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kStagingName = ".hometrend-staging";

// Runs fn(i) for i in [0, n) on a small worker pool. Results are stored by
// index, so the outcome does not depend on scheduling. The exception of the
// lowest failing index is rethrown.
template <typename Fn>
auto parallel_map(std::size_t n, Fn fn) {
    using Result = decltype(fn(std::size_t{}));
    std::vector<std::optional<Result>> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_workers =
        std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<Result> out;
    out.reserve(n);
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
}

std::vector<fs::path> list_csv(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw InputError(fmt::format("'{}' is not a directory", dir.string()));
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

std::string month_key(std::optional<unsigned> month) {
    return month ? fmt::format("month{:02d}", *month) : "annual";
}

// Annual series followed by the 12 calendar-month series.
struct PeriodSeries {
    std::optional<unsigned> month;
    AnnualSeries series;
};

std::vector<PeriodSeries> period_series(const DailySeries& daily, const CompletenessPolicy& policy) {
    const auto monthly = aggregate_monthly(daily, policy);
    std::vector<PeriodSeries> out;
    out.push_back({std::nullopt, aggregate_annual(monthly, policy)});
    for (unsigned m = 1; m <= 12; ++m) out.push_back({m, calendar_month_series(monthly, m)});
    return out;
}

struct Warnings {
    std::vector<json> items;
    void add(std::string station, std::string what) {
        items.push_back({{"station", std::move(station)}, {"warning", std::move(what)}});
    }
};

class Run {
public:
    Run(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log) {}

    void execute(Stage stage) {
        const auto wall_start = std::chrono::system_clock::now();
        const auto t0 = std::chrono::steady_clock::now();

        fs::create_directories(cfg_.output_dir);
        staging_ = cfg_.output_dir / kStagingName;
        fs::remove_all(staging_);
        fs::create_directories(staging_);

        try {
            stations_meta_ = io::load_metadata_csv(cfg_.metadata_csv);
            record_input(cfg_.metadata_csv);
            if (stage == Stage::QC || stage == Stage::ALL) run_qc_stage();
            if (stage == Stage::HOMOGENEITY || stage == Stage::ALL) run_homogeneity_stage();
            if (stage == Stage::HOMOGENIZE || stage == Stage::ALL) run_homogenize_stage();
            if (stage == Stage::TRENDS || stage == Stage::ALL) run_trends_stage();

            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            write_manifest(wall_start, elapsed);
            commit();
        } catch (...) {
            std::error_code ec;
            fs::remove_all(staging_, ec);
            throw;
        }
    }

private:
    const RunConfig& cfg_;
    std::ostream& log_;
    fs::path staging_;
    std::vector<StationMeta> stations_meta_;
    std::vector<io::StationData> clean_;
    std::vector<io::StationData> homogenized_;
    bool have_clean_ = false;
    bool have_homogenized_ = false;
    std::vector<std::string> stages_run_;
    json stations_ = json::object();
    json inputs_ = json::object();
    Warnings warnings_;

    std::ofstream open_artifact(const fs::path& rel) {
        const fs::path p = staging_ / rel;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
        return out;
    }

    void write_json(const fs::path& rel, const json& j) { open_artifact(rel) << j.dump(2) << '\n'; }

    void record_input(const fs::path& p) { inputs_[p.string()] = io::sha256_file(p); }

    json& station_entry(const std::string& id) {
        auto& s = stations_[id];
        if (s.is_null()) s = {{"effective_n", json::object()}, {"seeds", json::object()}};
        return s;
    }

    void require_metadata(const std::string& id) const {
        const bool known = std::any_of(stations_meta_.begin(), stations_meta_.end(),
                                       [&](const StationMeta& m) { return m.station_id == id; });
        if (!known) throw InputError(fmt::format("station '{}' is missing from the metadata", id));
    }

    std::vector<io::StationData> load_dir(const fs::path& dir) {
        std::vector<io::StationData> out;
        std::map<std::string, fs::path> seen;
        for (const auto& file : list_csv(dir)) {
            auto data = io::load_station_csv(file);
            if (data.station_id.empty()) {
                warnings_.add(file.filename().string(), "empty station file skipped");
                continue;
            }
            if (auto [it, fresh] = seen.emplace(data.station_id, file); !fresh)
                throw InputError(fmt::format("station '{}' appears in both '{}' and '{}'",
                                             data.station_id, it->second.string(), file.string()));
            out.push_back(std::move(data));
        }
        return out;
    }

    const std::vector<io::StationData>& clean() {
        if (!have_clean_) {
            const fs::path dir = cfg_.output_dir / "clean";
            if (!fs::is_directory(dir))
                throw InputError(fmt::format("'{}' not found; run the qc stage first", dir.string()));
            clean_ = load_dir(dir);
            have_clean_ = true;
        }
        return clean_;
    }

    void run_qc_stage() {
        stages_run_.push_back("qc");
        std::vector<io::StationData> raw;
        for (const auto& file : list_csv(cfg_.stations_dir)) {
            record_input(file);
        }
        raw = load_dir(cfg_.stations_dir);
        if (raw.empty()) throw InputError("no station files found");
        for (const auto& s : raw) require_metadata(s.station_id);

        auto results = parallel_map(raw.size(), [&](std::size_t i) {
            return qc::run_qc(raw[i].tmax, raw[i].tmin, cfg_.qc);
        });

        auto csv = open_artifact("qc_report.csv");
        io::write_qc_csv_header(csv);
        json reports = json::array();
        clean_.clear();
        for (auto& r : results) {
            io::write_qc_csv_rows(csv, r.report);
            reports.push_back(io::qc_report_json(r.report));
            auto out = open_artifact(fs::path("clean") / (r.report.station_id + ".csv"));
            io::write_station_csv(out, r.tmax, r.tmin);
            clean_.push_back({r.report.station_id, std::move(r.tmax), std::move(r.tmin)});
        }
        write_json("qc_report.json", reports);
        have_clean_ = true;
        log_ << fmt::format("qc: {} stations\n", clean_.size());
    }

    struct StationBattery {
        std::vector<io::HomogeneityRow> rows;
        json effective_n = json::object();
        json seeds = json::object();
        std::vector<std::string> warnings;
    };

    StationBattery battery_for(const io::StationData& st) const {
        StationBattery out;
        const auto dtr = dtr_daily(st.tmax, st.tmin);
        for (const auto& ps : period_series(dtr, cfg_.completeness)) {
            const std::string key = "DTR/" + month_key(ps.month);
            auto series = homogeneity::TestSeries::from_annual(
                ps.series, fmt::format("{}/{}", st.station_id, key));
            out.effective_n[key] = {{"n", series.size()}, {"dropped", series.n_dropped}};
            if (series.size() < cfg_.tests.min_n) {
                out.warnings.push_back(fmt::format("{}: n = {} below min_n {}; homogeneity tests skipped",
                                                   key, series.size(), cfg_.tests.min_n));
                continue;
            }
            try {
                auto battery = homogeneity::run_battery(series, cfg_.n_sims, cfg_.seed,
                                                        cfg_.homogeneity_alpha, cfg_.tests);
                json seeds = json::object();
                for (const auto& r : battery.results)
                    seeds[std::string(homogeneity::to_string(r.test))] = r.seed;
                out.seeds[key] = seeds;
                out.rows.push_back({st.station_id, ps.month, battery});
            } catch (const DegenerateSeriesError& e) {
                out.warnings.push_back(fmt::format("{}: {}; homogeneity tests skipped", key, e.what()));
            }
        }
        return out;
    }

    void run_homogeneity_stage() {
        stages_run_.push_back("homogeneity");
        const auto& stations = clean();
        auto results = parallel_map(stations.size(),
                                    [&](std::size_t i) { return battery_for(stations[i]); });

        std::vector<io::HomogeneityRow> annual;
        std::vector<io::HomogeneityRow> monthly;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& id = stations[i].station_id;
            auto& entry = station_entry(id);
            entry["effective_n"]["homogeneity"] = results[i].effective_n;
            entry["seeds"]["homogeneity"] = results[i].seeds;
            for (auto& w : results[i].warnings) warnings_.add(id, w);
            for (auto& row : results[i].rows) (row.month ? monthly : annual).push_back(row);
        }
        auto a = open_artifact("homogeneity_annual.csv");
        io::write_homogeneity_csv(a, annual, false);
        auto m = open_artifact("homogeneity_monthly.csv");
        io::write_homogeneity_csv(m, monthly, true);
        log_ << fmt::format("homogeneity: {} annual, {} monthly batteries\n", annual.size(),
                            monthly.size());
    }

    struct StationHomogenized {
        std::optional<io::StationData> data;
        json breaks = json::object();
        json plans = json::object();
        json seeds = json::object();
        std::vector<std::string> warnings;
        fs::path reference;
    };

    StationHomogenized homogenize_station(const io::StationData& st) const {
        StationHomogenized out;
        out.reference = cfg_.reference_dir / (st.station_id + ".csv");
        if (!fs::exists(out.reference)) {
            out.warnings.push_back("no reference series; homogenization skipped");
            return out;
        }
        const auto ref = io::load_station_csv(out.reference);
        io::StationData adjusted{st.station_id, st.tmax, st.tmin};
        for (auto var : {Variable::TMAX, Variable::TMIN}) {
            const std::string name(to_string(var));
            const auto& cand = var == Variable::TMAX ? st.tmax : st.tmin;
            auto reference = var == Variable::TMAX ? ref.tmax : ref.tmin;
            reference.station_id = st.station_id;

            homogenize::DetectOptions opts = cfg_.homogenize;
            opts.test = cfg_.tests;
            opts.seed = derive_seed(cfg_.seed, fmt::format("{}/{}/breaks", st.station_id, name));
            out.seeds[name] = opts.seed;
            try {
                auto outcome = homogenize::homogenize_daily(cand, reference, cfg_.completeness, opts);
                out.breaks[name] = io::break_set_json(outcome.result.breaks);
                out.plans[name] = io::plan_json(outcome.result.plan);
                (var == Variable::TMAX ? adjusted.tmax : adjusted.tmin) =
                    std::move(outcome.result.series);
            } catch (const InputError& e) {
                out.warnings.push_back(fmt::format("{}: {}; homogenization skipped", name, e.what()));
                return out;
            }
        }
        out.data = std::move(adjusted);
        return out;
    }

    void run_homogenize_stage() {
        stages_run_.push_back("homogenize");
        if (cfg_.reference_dir.empty()) throw InputError("input.reference_dir is required");
        const auto& stations = clean();
        auto results = parallel_map(stations.size(),
                                    [&](std::size_t i) { return homogenize_station(stations[i]); });

        json breaks = json::object();
        json plans = json::object();
        homogenized_.clear();
        for (std::size_t i = 0; i < results.size(); ++i) {
            auto& r = results[i];
            const auto& id = stations[i].station_id;
            for (auto& w : r.warnings) warnings_.add(id, w);
            if (fs::exists(r.reference)) record_input(r.reference);
            if (!r.data) continue;
            station_entry(id)["seeds"]["homogenize"] = r.seeds;
            breaks[id] = r.breaks;
            plans[id] = r.plans;
            auto out = open_artifact(fs::path("homogenized") / (id + ".csv"));
            io::write_station_csv(out, r.data->tmax, r.data->tmin);
            write_json(fs::path("homogenized") / (id + ".provenance.json"),
                       {{"station", id},
                        {"reference", r.reference.string()},
                        {"reference_sha256", io::sha256_file(r.reference)},
                        {"seeds", r.seeds},
                        {"breaks", r.breaks},
                        {"adjustments", r.plans}});
            homogenized_.push_back(std::move(*r.data));
        }
        write_json("breaks.json", breaks);
        write_json("adjustments.json", plans);
        have_homogenized_ = true;
        log_ << fmt::format("homogenize: {} stations adjusted\n", homogenized_.size());
    }

    const std::vector<io::StationData>& homogenized() {
        if (!have_homogenized_) {
            const fs::path dir = cfg_.output_dir / "homogenized";
            if (fs::is_directory(dir)) {
                homogenized_ = load_dir(dir);
            } else {
                warnings_.add("*", "no homogenized series found; homogenized trends skipped");
            }
            have_homogenized_ = true;
        }
        return homogenized_;
    }

    struct StationTrends {
        std::vector<io::TrendRow> rows;
        json effective_n = json::object();
        std::vector<std::string> warnings;
    };

    StationTrends trends_for(const io::StationData& st, const std::string& dataset) const {
        StationTrends out;
        const DailySeries dtr = dtr_daily(st.tmax, st.tmin);
        for (const DailySeries* daily : {&st.tmax, &st.tmin, &dtr}) {
            for (const auto& ps : period_series(*daily, cfg_.completeness)) {
                const auto timed = trend::TimedSeries::from_annual(ps.series);
                const std::string key = fmt::format("{}/{}/{}", dataset, to_string(daily->variable),
                                                    month_key(ps.month));
                out.effective_n[key] = timed.size();
                try {
                    out.rows.push_back({st.station_id, daily->variable, dataset, ps.month,
                                        trend::trend_test(timed, cfg_.trend_alpha, cfg_.hamed_rao)});
                } catch (const TooShortError& e) {
                    out.warnings.push_back(fmt::format("{}: {}; trend skipped", key, e.what()));
                }
            }
        }
        return out;
    }

    void run_trends_stage() {
        stages_run_.push_back("trends");
        struct Job {
            const io::StationData* station;
            std::string dataset;
        };
        std::vector<Job> jobs;
        const auto& original = clean();
        const auto& adjusted = homogenized();
        // Station-major order: original then homogenized for each station.
        for (const auto& st : original) {
            jobs.push_back({&st, "original"});
            for (const auto& h : adjusted)
                if (h.station_id == st.station_id) jobs.push_back({&h, "homogenized"});
        }
        auto results = parallel_map(jobs.size(), [&](std::size_t i) {
            return trends_for(*jobs[i].station, jobs[i].dataset);
        });

        std::vector<io::TrendRow> annual;
        std::vector<io::TrendRow> monthly;
        std::vector<io::TrendRow> all;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& id = jobs[i].station->station_id;
            auto& entry = station_entry(id);
            for (auto& [k, v] : results[i].effective_n.items()) entry["effective_n"]["trends"][k] = v;
            for (auto& w : results[i].warnings) warnings_.add(id, w);
            for (auto& row : results[i].rows) {
                (row.month ? monthly : annual).push_back(row);
                all.push_back(row);
            }
        }
        auto a = open_artifact("trends_annual.csv");
        io::write_trend_csv(a, annual);
        auto m = open_artifact("trends_monthly.csv");
        io::write_trend_csv(m, monthly);
        write_json("trends.geojson", io::export_geojson(all, stations_meta_));
        log_ << fmt::format("trends: {} annual, {} monthly rows\n", annual.size(), monthly.size());
    }

    void write_manifest(std::chrono::system_clock::time_point started, double elapsed) {
        json artifacts = json::object();
        for (const auto& entry : fs::recursive_directory_iterator(staging_)) {
            if (!entry.is_regular_file()) continue;
            artifacts[fs::relative(entry.path(), staging_).generic_string()] =
                io::sha256_file(entry.path());
        }
        const std::time_t t = std::chrono::system_clock::to_time_t(started);
        std::tm utc{};
        gmtime_r(&t, &utc);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);

        json manifest{{"tool", "hometrend"},
                      {"version", kToolVersion},
                      {"stages", stages_run_},
                      {"config", cfg_.to_json()},
                      {"run_seed", cfg_.seed},
                      {"started_utc", stamp},
                      {"wall_clock_seconds", elapsed},
                      {"stations", stations_},
                      {"warnings", warnings_.items},
                      {"inputs", inputs_},
                      {"artifacts", artifacts}};
        write_json("manifest.json", manifest);
    }

    // Moves every staged file into the output directory, replacing older copies.
    void commit() {
        std::vector<fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(staging_))
            if (entry.is_regular_file()) files.push_back(entry.path());
        for (const auto& src : files) {
            const fs::path dst = cfg_.output_dir / fs::relative(src, staging_);
            fs::create_directories(dst.parent_path());
            fs::rename(src, dst);
        }
        fs::remove_all(staging_);
    }
};

}  // namespace

int run_pipeline(const RunConfig& config, Stage stage, std::ostream& log) {
    try {
        config.validate();
        Run run(config, log);
        run.execute(stage);
        return static_cast<int>(ExitCode::OK);
    } catch (const InputError& e) {
        log << "input error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::INPUT_ERROR);
    } catch (const std::exception& e) {
        log << "internal error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::INTERNAL_ERROR);
    }
}

}  // namespace hometrend
