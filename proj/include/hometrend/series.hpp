#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hometrend {

using Date = std::chrono::sys_days;

enum class Variable { TMAX, TMIN, DTR };

[[nodiscard]] std::string_view to_string(Variable v);
[[nodiscard]] Variable variable_from_string(std::string_view s);

// ISO-8601 civil date helpers ("YYYY-MM-DD").
[[nodiscard]] Date make_date(int year, unsigned month, unsigned day);
[[nodiscard]] std::optional<Date> parse_iso_date(std::string_view text);
[[nodiscard]] std::string format_iso_date(Date d);
[[nodiscard]] int year_of(Date d);
[[nodiscard]] unsigned month_of(Date d);
[[nodiscard]] unsigned days_in_month(int year, unsigned month);

struct StationMeta {
    std::string station_id;
    std::string name;
    double latitude = 0.0;
    double longitude = 0.0;
    std::optional<double> elevation;
    std::optional<std::string> zone;

    // Throws InputError when coordinates are out of range.
    void validate() const;
};

// Date-indexed daily values in degrees C. An entry holding std::nullopt is an
// explicit missing observation; dates absent from the map are also missing.
struct DailySeries {
    std::string station_id;
    Variable variable = Variable::TMAX;
    std::map<Date, std::optional<double>> records;

    [[nodiscard]] std::size_t present_count() const;
};

struct MonthlyEntry {
    int year = 0;
    unsigned month = 1;
    std::optional<double> mean;
    unsigned n_present = 0;
    unsigned n_expected = 0;
};

struct MonthlySeries {
    std::string station_id;
    Variable variable = Variable::TMAX;
    std::vector<MonthlyEntry> entries;  // chronological, one per calendar month
};

struct AnnualEntry {
    int year = 0;
    std::optional<double> mean;
    unsigned n_months_present = 0;
};

struct AnnualSeries {
    std::string station_id;
    Variable variable = Variable::TMAX;
    std::vector<AnnualEntry> entries;
};

struct CompletenessPolicy {
    unsigned max_missing_days_per_month = 10;
    unsigned max_consecutive_missing_days = 4;
    bool require_all_months_for_annual = true;
};

/// Daily Tmax - Tmin over the union of dates; missing when either side is missing.
/// Throws InputError on station mismatch or wrong variable tags.
[[nodiscard]] DailySeries dtr_daily(const DailySeries& tmax, const DailySeries& tmin);

/// Calendar-month means for every month between the first and last recorded date.
/// Days absent from the map count as missing. A month whose missing days or
/// longest missing stretch exceeds the policy keeps its entry with no mean.
[[nodiscard]] MonthlySeries aggregate_monthly(const DailySeries& daily,
                                              const CompletenessPolicy& policy);

/// Unweighted mean of the monthly means of each year.
[[nodiscard]] AnnualSeries aggregate_annual(const MonthlySeries& monthly,
                                            const CompletenessPolicy& policy);

/// One entry per year holding the given calendar month's mean.
[[nodiscard]] AnnualSeries calendar_month_series(const MonthlySeries& monthly, unsigned month);

}  // namespace hometrend
