#include "hometrend/fixture.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "hometrend/errors.hpp"
#include "hometrend/io.hpp"
#include "hometrend/series.hpp"

namespace hometrend {

namespace fs = std::filesystem;

namespace {

struct SiteSpec {
    const char* id;
    const char* name;
    double lat;
    double lon;
    double elev;
    const char* zone;
    double tmax_base;
    double tmin_base;
    double tmax_trend;  // C per year
    double tmin_trend;
    bool tmin_shift;
    bool corrupt;
};

constexpr SiteSpec kSites[] = {
    {"SYN1", "Synthetic North", 9.40, -0.85, 183.0, "Savannah", 34.0, 22.0, 0.02, 0.04, false, false},
    {"SYN2", "Synthetic Forest", 6.72, -1.60, 287.0, "Forest", 31.0, 21.5, 0.015, 0.03, true, false},
    {"SYN3", "Synthetic Coast", 5.60, -0.17, 68.0, "Coastal", 30.0, 23.0, 0.01, 0.035, false, true},
};

double round1(double v) { return std::round(v * 10.0) / 10.0; }

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputError(fmt::format("cannot write '{}'", p.string()));
    out << text;
}

}  // namespace

void write_synthetic_fixture(const fs::path& dir, std::uint64_t seed) {
    const Date start = make_date(1983, 1, 1);
    const Date end = make_date(2021, 12, 31);
    const Date shift_from = make_date(2001, 1, 1);

    std::string meta = "station_id,name,lat,lon,elev,zone\n";
    std::uint64_t site_index = 0;
    for (const auto& site : kSites) {
        meta += fmt::format("{},{},{},{},{},{}\n", site.id, site.name, site.lat, site.lon, site.elev,
                            site.zone);

        std::mt19937_64 rng(seed * 1000 + site_index++);
        std::normal_distribution<double> unit(0.0, 1.0);
        std::uniform_real_distribution<double> u01(0.0, 1.0);

        DailySeries tmax{site.id, Variable::TMAX, {}};
        DailySeries tmin{site.id, Variable::TMIN, {}};
        DailySeries rmax{site.id, Variable::TMAX, {}};
        DailySeries rmin{site.id, Variable::TMIN, {}};

        double weather = 0.0;
        for (Date d = start; d <= end; d += std::chrono::days{1}) {
            const double t = static_cast<double>((d - start).count()) / 365.25;
            const double phase = 2.0 * std::numbers::pi * (t - std::floor(t));
            weather = 0.6 * weather + 0.8 * unit(rng);
            const double cmax = site.tmax_base + 2.5 * std::cos(phase - 1.1) + site.tmax_trend * t + weather;
            const double cmin = site.tmin_base + 1.2 * std::cos(phase - 1.4) + site.tmin_trend * t + 0.5 * weather;

            double smin = cmin + 0.4 * unit(rng);
            if (site.tmin_shift && d >= shift_from) smin += 1.0;
            std::optional<double> hi = round1(cmax + 0.4 * unit(rng));
            std::optional<double> lo = round1(smin);
            if (u01(rng) < 0.01) hi.reset();
            if (u01(rng) < 0.01) lo.reset();
            tmax.records.emplace(d, hi);
            tmin.records.emplace(d, lo);
            rmax.records.emplace(d, round1(cmax - 0.5 + 0.3 * unit(rng)));
            rmin.records.emplace(d, round1(cmin + 0.3 + 0.3 * unit(rng)));
        }

        if (site.corrupt) {
            // Swapped pair, digit reversal, decimal shift, a frozen week.
            const Date swapped = make_date(1990, 3, 14);
            tmax.records[swapped] = 23.1;
            tmin.records[swapped] = 32.1;
            tmax.records[make_date(1995, 7, 2)] = 63.0;
            tmin.records[make_date(2004, 11, 20)] = 2.4;
            for (int k = 0; k < 6; ++k) tmax.records[make_date(2010, 5, 3) + std::chrono::days{k}] = 31.2;
        }

        std::ostringstream station_csv;
        io::write_station_csv(station_csv, tmax, tmin);
        write_file(dir / "stations" / fmt::format("{}.csv", site.id), station_csv.str());
        std::ostringstream reference_csv;
        io::write_station_csv(reference_csv, rmax, rmin);
        write_file(dir / "reference" / fmt::format("{}.csv", site.id), reference_csv.str());
    }
    write_file(dir / "stations_meta.csv", meta);
    write_file(dir / "run.ini",
               "[input]\n"
               "stations_dir = stations\n"
               "metadata = stations_meta.csv\n"
               "reference_dir = reference\n"
               "\n[output]\n"
               "dir = out\n"
               "\n[homogeneity]\n"
               "alpha = 0.05\n"
               "n_sims = 20000\n"
               "seed = 0\n"
               "\n[homogenize]\n"
               "alpha = 0.05\n"
               "min_segment_len = 60\n"
               "n_sims = 2000\n"
               "\n[trend]\n"
               "alpha = 0.05\n"
               "lag_rule = significant\n");
}

}  // namespace hometrend
