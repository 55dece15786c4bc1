#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "hometrend/errors.hpp"
#include "hometrend/series.hpp"

using namespace hometrend;

namespace {

DailySeries daily(Variable v, std::string id = "ST1") { return {std::move(id), v, {}}; }

void fill_month(DailySeries& s, int year, unsigned month, double value) {
    for (unsigned d = 1; d <= days_in_month(year, month); ++d) s.records[make_date(year, month, d)] = value;
}

}  // namespace

TEST(Dates, ParseAndFormatRoundTrip) {
    const auto d = parse_iso_date("1990-02-28");
    ASSERT_TRUE(d);
    EXPECT_EQ(format_iso_date(*d), "1990-02-28");
    EXPECT_EQ(year_of(*d), 1990);
    EXPECT_EQ(month_of(*d), 2u);
    EXPECT_FALSE(parse_iso_date("1990-02-30"));
    EXPECT_FALSE(parse_iso_date("1990/02/01"));
    EXPECT_FALSE(parse_iso_date("90-02-01"));
    EXPECT_EQ(days_in_month(2000, 2), 29u);
    EXPECT_EQ(days_in_month(1900, 2), 28u);
}

TEST(StationMeta, RejectsOutOfRangeCoordinates) {
    StationMeta m{"ST1", "x", 91.0, 0.0, {}, {}};
    EXPECT_THROW(m.validate(), InputError);
    m.latitude = 5.0;
    m.longitude = -181.0;
    EXPECT_THROW(m.validate(), InputError);
    m.longitude = -0.2;
    EXPECT_NO_THROW(m.validate());
}

TEST(DtrDaily, SubtractsAndPropagatesMissing) {
    auto hi = daily(Variable::TMAX);
    auto lo = daily(Variable::TMIN);
    const auto d1 = make_date(1990, 1, 1);
    const auto d2 = make_date(1990, 1, 2);
    const auto d3 = make_date(1990, 1, 3);
    const auto d4 = make_date(1990, 1, 4);
    hi.records[d1] = 35.0;
    lo.records[d1] = 25.0;
    hi.records[d2] = 30.0;
    lo.records[d2] = std::nullopt;
    hi.records[d3] = 20.0;
    lo.records[d3] = 20.0;
    lo.records[d4] = 21.0;  // only in Tmin

    const auto dtr = dtr_daily(hi, lo);
    EXPECT_EQ(dtr.variable, Variable::DTR);
    EXPECT_DOUBLE_EQ(*dtr.records.at(d1), 10.0);
    EXPECT_FALSE(dtr.records.at(d2));
    EXPECT_DOUBLE_EQ(*dtr.records.at(d3), 0.0);
    ASSERT_TRUE(dtr.records.count(d4));
    EXPECT_FALSE(dtr.records.at(d4));
}

TEST(DtrDaily, StationMismatchIsInputError) {
    auto hi = daily(Variable::TMAX, "A");
    auto lo = daily(Variable::TMIN, "B");
    EXPECT_THROW((void)dtr_daily(hi, lo), InputError);
    EXPECT_THROW((void)dtr_daily(daily(Variable::TMIN), daily(Variable::TMIN)), InputError);
}

TEST(DtrDaily, SelfDifferenceIsZero) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(10.0, 40.0);
    auto hi = daily(Variable::TMAX);
    for (unsigned d = 1; d <= 31; ++d) hi.records[make_date(1991, 5, d)] = u(rng);
    auto lo = hi;
    lo.variable = Variable::TMIN;
    for (const auto& [date, v] : dtr_daily(hi, lo).records) EXPECT_EQ(*v, 0.0);
}

TEST(AggregateMonthly, ConstantJanuary) {
    auto s = daily(Variable::TMAX);
    fill_month(s, 1990, 1, 20.0);
    const auto m = aggregate_monthly(s, {});
    ASSERT_EQ(m.entries.size(), 1u);
    EXPECT_DOUBLE_EQ(*m.entries[0].mean, 20.0);
    EXPECT_EQ(m.entries[0].n_present, 31u);
    EXPECT_EQ(m.entries[0].n_expected, 31u);
}

TEST(AggregateMonthly, TooManyMissingDaysRejectsMonth) {
    auto s = daily(Variable::TMAX);
    fill_month(s, 1990, 1, 20.0);
    // Keep every other day for the first 30 days: 15 present, no 2-day gap.
    for (unsigned d = 2; d <= 30; d += 2) s.records[make_date(1990, 1, d)] = std::nullopt;
    s.records[make_date(1990, 1, 31)] = std::nullopt;
    CompletenessPolicy p;
    p.max_missing_days_per_month = 10;
    const auto m = aggregate_monthly(s, p);
    ASSERT_EQ(m.entries.size(), 1u);
    EXPECT_FALSE(m.entries[0].mean);
    EXPECT_EQ(m.entries[0].n_present, 15u);
}

TEST(AggregateMonthly, ConsecutiveGapRule) {
    auto s = daily(Variable::TMAX);
    fill_month(s, 1990, 4, 25.0);
    for (unsigned d = 10; d < 15; ++d) s.records.erase(make_date(1990, 4, d));  // 5-day hole
    const auto strict = aggregate_monthly(s, {});
    EXPECT_FALSE(strict.entries[0].mean);
    CompletenessPolicy loose;
    loose.max_consecutive_missing_days = 5;
    EXPECT_DOUBLE_EQ(*aggregate_monthly(s, loose).entries[0].mean, 25.0);
}

TEST(AggregateMonthly, FebruaryOneToTwentyEight) {
    auto s = daily(Variable::TMIN);
    for (unsigned d = 1; d <= 28; ++d) s.records[make_date(1990, 2, d)] = static_cast<double>(d);
    // 28*29/2 / 28
    EXPECT_DOUBLE_EQ(*aggregate_monthly(s, {}).entries[0].mean, 14.5);
}

TEST(AggregateMonthly, EmptyInput) {
    EXPECT_TRUE(aggregate_monthly(daily(Variable::TMAX), {}).entries.empty());
}

TEST(AggregateMonthly, PermutationInsensitiveWithinMonth) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(15.0, 35.0);
    std::vector<double> vals(30);
    for (auto& v : vals) v = std::round(u(rng) * 10.0) / 10.0;
    auto a = daily(Variable::TMAX);
    auto b = daily(Variable::TMAX);
    auto shuffled = vals;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (unsigned d = 1; d <= 30; ++d) {
        a.records[make_date(1990, 6, d)] = vals[d - 1];
        b.records[make_date(1990, 6, d)] = shuffled[d - 1];
    }
    EXPECT_NEAR(*aggregate_monthly(a, {}).entries[0].mean, *aggregate_monthly(b, {}).entries[0].mean,
                1e-12);
}

TEST(AggregateMonthly, SpansMissingMonths) {
    auto s = daily(Variable::TMAX);
    fill_month(s, 1990, 1, 20.0);
    fill_month(s, 1990, 3, 22.0);
    const auto m = aggregate_monthly(s, {});
    ASSERT_EQ(m.entries.size(), 3u);
    EXPECT_EQ(m.entries[1].month, 2u);
    EXPECT_FALSE(m.entries[1].mean);
    EXPECT_EQ(m.entries[1].n_present, 0u);
    EXPECT_EQ(m.entries[1].n_expected, 28u);
}

TEST(AggregateAnnual, ConstantAndOneToTwelve) {
    MonthlySeries m{"ST1", Variable::DTR, {}};
    for (unsigned k = 1; k <= 12; ++k) m.entries.push_back({1990, k, 25.0, 28, 28});
    for (unsigned k = 1; k <= 12; ++k) m.entries.push_back({1991, k, static_cast<double>(k), 28, 28});
    const auto a = aggregate_annual(m, {});
    ASSERT_EQ(a.entries.size(), 2u);
    EXPECT_DOUBLE_EQ(*a.entries[0].mean, 25.0);
    EXPECT_DOUBLE_EQ(*a.entries[1].mean, 6.5);
    EXPECT_EQ(a.entries[1].n_months_present, 12u);
}

TEST(AggregateAnnual, StrictPolicyNeedsAllMonths) {
    MonthlySeries m{"ST1", Variable::DTR, {}};
    for (unsigned k = 1; k <= 12; ++k)
        m.entries.push_back({1990, k, k == 7 ? std::nullopt : std::optional<double>(10.0), 30, 30});
    EXPECT_FALSE(aggregate_annual(m, {}).entries[0].mean);
    CompletenessPolicy lenient;
    lenient.require_all_months_for_annual = false;
    const auto a = aggregate_annual(m, lenient);
    EXPECT_DOUBLE_EQ(*a.entries[0].mean, 10.0);
    EXPECT_EQ(a.entries[0].n_months_present, 11u);
}

TEST(AggregateAnnual, MeanOfMonthlyMeansNotDailyMean) {
    // One complete non-leap year where each month's value is its length, so
    // the day-weighted mean differs from the mean of monthly means.
    auto s = daily(Variable::TMAX);
    for (unsigned k = 1; k <= 12; ++k) fill_month(s, 1990, k, static_cast<double>(days_in_month(1990, k)));
    const auto monthly = aggregate_monthly(s, {});
    const auto annual = aggregate_annual(monthly, {});
    double month_mean = 0.0;
    for (const auto& e : monthly.entries) month_mean += *e.mean;
    month_mean /= 12.0;
    double day_mean = 0.0;
    for (const auto& [d, v] : s.records) day_mean += *v;
    day_mean /= static_cast<double>(s.records.size());
    EXPECT_NEAR(*annual.entries[0].mean, month_mean, 1e-12);
    EXPECT_GT(std::abs(*annual.entries[0].mean - day_mean), 1e-3);
}

TEST(CalendarMonthSeries, SelectsOneMonthPerYear) {
    MonthlySeries m{"ST1", Variable::DTR, {}};
    for (int y = 1983; y <= 2021; ++y)
        for (unsigned k = 1; k <= 12; ++k)
            m.entries.push_back({y, k, y % 5 == 0 && k == 1 ? std::nullopt
                                                             : std::optional<double>(y + k / 100.0),
                                 31, 31});
    const auto jan = calendar_month_series(m, 1);
    ASSERT_EQ(jan.entries.size(), 39u);
    std::size_t present = 0;
    for (const auto& e : jan.entries) present += e.mean.has_value();
    std::size_t expected = 0;
    for (const auto& e : m.entries) expected += e.month == 1 && e.mean;
    EXPECT_EQ(present, expected);
    EXPECT_THROW((void)calendar_month_series(m, 13), InputError);
    EXPECT_THROW((void)calendar_month_series(m, 0), InputError);
}

TEST(CalendarMonthSeries, OnlyJuneData) {
    MonthlySeries m{"ST1", Variable::TMAX, {}};
    for (int y = 2000; y < 2005; ++y) m.entries.push_back({y, 6, 30.0 + y - 2000, 30, 30});
    const auto june = calendar_month_series(m, 6);
    ASSERT_EQ(june.entries.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(*june.entries[i].mean, *m.entries[i].mean);
    EXPECT_TRUE(calendar_month_series(m, 7).entries.empty());
}
