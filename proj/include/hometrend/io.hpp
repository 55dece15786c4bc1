#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hometrend/homogeneity.hpp"
#include "hometrend/homogenize.hpp"
#include "hometrend/qc.hpp"
#include "hometrend/series.hpp"
#include "hometrend/trend.hpp"

namespace hometrend::io {

// Daily Tmax/Tmin records of one station as read from `station_id,date,tmax,tmin`.
struct StationData {
    std::string station_id;
    DailySeries tmax;
    DailySeries tmin;
};

/// Parses the daily schema. Empty fields and `NA` are missing. Throws InputError
/// on malformed dates, non-numeric values, mixed station ids, or duplicate dates
/// (all offending dates are listed).
[[nodiscard]] StationData parse_station_csv(std::istream& in, std::string_view source);
[[nodiscard]] StationData load_station_csv(const std::filesystem::path& path);
void write_station_csv(std::ostream& out, const DailySeries& tmax, const DailySeries& tmin);

/// `station_id,name,lat,lon,elev,zone`
[[nodiscard]] std::vector<StationMeta> parse_metadata_csv(std::istream& in, std::string_view source);
[[nodiscard]] std::vector<StationMeta> load_metadata_csv(const std::filesystem::path& path);

// Number formatting shared by every table: 6 significant digits, p-values 4.
[[nodiscard]] std::string fmt_value(double v);
[[nodiscard]] std::string fmt_p(double p);

void write_qc_csv_header(std::ostream& out);
void write_qc_csv_rows(std::ostream& out, const qc::QCReport& report);
[[nodiscard]] nlohmann::json qc_report_json(const qc::QCReport& report);

struct HomogeneityRow {
    std::string station;
    std::optional<unsigned> month;  // absent for the annual series
    homogeneity::HomogeneityBattery battery;
};

void write_homogeneity_csv(std::ostream& out, const std::vector<HomogeneityRow>& rows,
                           bool monthly);

struct TrendRow {
    std::string station;
    Variable variable = Variable::TMAX;
    std::string dataset;  // "original" or "homogenized"
    std::optional<unsigned> month;  // absent for annual
    trend::TrendResult result;

    [[nodiscard]] std::string period() const;
};

void write_trend_csv(std::ostream& out, const std::vector<TrendRow>& rows);

[[nodiscard]] nlohmann::json break_set_json(const homogenize::BreakSet& breaks);
[[nodiscard]] nlohmann::json plan_json(const homogenize::AdjustmentPlan& plan);

/// FeatureCollection with one Point per trend row, coordinates [lon, lat].
/// Throws InputError naming any station id missing from the metadata.
[[nodiscard]] nlohmann::json export_geojson(const std::vector<TrendRow>& rows,
                                            const std::vector<StationMeta>& stations);

/// Lower-case hex SHA-256 of a file's bytes.
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

}  // namespace hometrend::io
