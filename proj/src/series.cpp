#include "hometrend/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "hometrend/errors.hpp"

namespace hometrend {

namespace chr = std::chrono;

std::string_view to_string(Variable v) {
    switch (v) {
        case Variable::TMAX: return "TMAX";
        case Variable::TMIN: return "TMIN";
        case Variable::DTR: return "DTR";
    }
    return "?";
}

Variable variable_from_string(std::string_view s) {
    if (s == "TMAX") return Variable::TMAX;
    if (s == "TMIN") return Variable::TMIN;
    if (s == "DTR") return Variable::DTR;
    throw InputError(fmt::format("unknown variable '{}'", s));
}

Date make_date(int year, unsigned month, unsigned day) {
    const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    if (!ymd.ok()) throw InputError(fmt::format("invalid date {}-{}-{}", year, month, day));
    return Date{ymd};
}

std::optional<Date> parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int value = 0;
        const char* first = text.data() + pos;
        const char* last = first + len;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last) return std::nullopt;
        return value;
    };
    const auto y = field(0, 4);
    const auto m = field(5, 2);
    const auto d = field(8, 2);
    if (!y || !m || !d || *m < 1 || *d < 1) return std::nullopt;
    const chr::year_month_day ymd{chr::year{*y}, chr::month{static_cast<unsigned>(*m)},
                                  chr::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

std::string format_iso_date(Date d) {
    const chr::year_month_day ymd{d};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

int year_of(Date d) { return static_cast<int>(chr::year_month_day{d}.year()); }

unsigned month_of(Date d) { return static_cast<unsigned>(chr::year_month_day{d}.month()); }

unsigned days_in_month(int year, unsigned month) {
    const chr::year_month_day_last last{chr::year{year}, chr::month_day_last{chr::month{month}}};
    return static_cast<unsigned>(last.day());
}

void StationMeta::validate() const {
    if (!(latitude >= -90.0 && latitude <= 90.0))
        throw InputError(fmt::format("station {}: latitude {} out of range", station_id, latitude));
    if (!(longitude >= -180.0 && longitude <= 180.0))
        throw InputError(
            fmt::format("station {}: longitude {} out of range", station_id, longitude));
}

std::size_t DailySeries::present_count() const {
    return static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(), [](const auto& kv) { return kv.second.has_value(); }));
}

DailySeries dtr_daily(const DailySeries& tmax, const DailySeries& tmin) {
    if (tmax.station_id != tmin.station_id)
        throw InputError(fmt::format("DTR station mismatch: '{}' vs '{}'", tmax.station_id,
                                     tmin.station_id));
    if (tmax.variable != Variable::TMAX || tmin.variable != Variable::TMIN)
        throw InputError("DTR requires TMAX and TMIN series");

    DailySeries out{tmax.station_id, Variable::DTR, {}};
    for (const auto& [date, hi] : tmax.records) {
        const auto it = tmin.records.find(date);
        std::optional<double> value;
        if (hi && it != tmin.records.end() && it->second) value = *hi - *it->second;
        out.records.emplace(date, value);
    }
    for (const auto& [date, lo] : tmin.records) out.records.try_emplace(date, std::nullopt);
    return out;
}

MonthlySeries aggregate_monthly(const DailySeries& daily, const CompletenessPolicy& policy) {
    MonthlySeries out{daily.station_id, daily.variable, {}};
    if (daily.records.empty()) return out;

    const chr::year_month_day first{daily.records.begin()->first};
    const chr::year_month_day last{daily.records.rbegin()->first};
    chr::year_month ym{first.year(), first.month()};
    const chr::year_month end{last.year(), last.month()};

    for (; ym <= end; ym += chr::months{1}) {
        const int year = static_cast<int>(ym.year());
        const unsigned month = static_cast<unsigned>(ym.month());
        const unsigned n_days = days_in_month(year, month);
        const Date start = make_date(year, month, 1);

        double sum = 0.0;
        unsigned present = 0;
        unsigned run = 0;
        unsigned longest_gap = 0;
        auto it = daily.records.lower_bound(start);
        for (unsigned k = 0; k < n_days; ++k) {
            const Date day = start + chr::days{k};
            if (it != daily.records.end() && it->first == day) {
                if (it->second) {
                    sum += *it->second;
                    ++present;
                    run = 0;
                } else {
                    longest_gap = std::max(longest_gap, ++run);
                }
                ++it;
            } else {
                longest_gap = std::max(longest_gap, ++run);
            }
        }

        MonthlyEntry entry{year, month, std::nullopt, present, n_days};
        const unsigned missing = n_days - present;
        if (present > 0 && missing <= policy.max_missing_days_per_month &&
            longest_gap <= policy.max_consecutive_missing_days)
            entry.mean = sum / present;
        out.entries.push_back(entry);
    }
    return out;
}

AnnualSeries aggregate_annual(const MonthlySeries& monthly, const CompletenessPolicy& policy) {
    AnnualSeries out{monthly.station_id, monthly.variable, {}};
    auto it = monthly.entries.begin();
    while (it != monthly.entries.end()) {
        const int year = it->year;
        double sum = 0.0;
        unsigned present = 0;
        for (; it != monthly.entries.end() && it->year == year; ++it) {
            if (it->mean) {
                sum += *it->mean;
                ++present;
            }
        }
        AnnualEntry entry{year, std::nullopt, present};
        const bool complete = present == 12;
        if (present > 0 && (complete || !policy.require_all_months_for_annual))
            entry.mean = sum / present;
        out.entries.push_back(entry);
    }
    return out;
}

AnnualSeries calendar_month_series(const MonthlySeries& monthly, unsigned month) {
    if (month < 1 || month > 12)
        throw InputError(fmt::format("calendar month {} outside 1..12", month));
    AnnualSeries out{monthly.station_id, monthly.variable, {}};
    for (const auto& e : monthly.entries) {
        if (e.month != month) continue;
        out.entries.push_back({e.year, e.mean, e.mean ? 1u : 0u});
    }
    return out;
}

}  // namespace hometrend
