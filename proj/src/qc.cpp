#include "hometrend/qc.hpp"

#include <cmath>
#include <iterator>

#include <fmt/format.h>

#include "hometrend/errors.hpp"

namespace hometrend::qc {

namespace {

// Values are recorded at 0.1 degree resolution; compare in tenths.
long tenths(double v) { return std::lround(v * 10.0); }

Target target_of(Variable v) {
    switch (v) {
        case Variable::TMAX: return Target::TMAX;
        case Variable::TMIN: return Target::TMIN;
        case Variable::DTR: break;
    }
    throw InputError("quality control applies to TMAX and TMIN only");
}

QCFlag value_flag(Date date, Check check, Target target, double value, Action action) {
    QCFlag f;
    f.date = date;
    f.check = check;
    f.target = target;
    f.action = action;
    if (target == Target::TMAX)
        f.original_tmax = value;
    else
        f.original_tmin = value;
    return f;
}

}  // namespace

void QCConfig::validate() const {
    if (!std::isfinite(tmax_upper) || !std::isfinite(tmin_lower) ||
        !std::isfinite(interdiurnal_limit))
        throw InputError("QC limits must be finite");
    if (max_identical_run < 1) throw InputError("max_identical_run must be >= 1");
}

std::string_view to_string(Check c) {
    switch (c) {
        case Check::ORDER: return "ORDER";
        case Check::TMAX_HIGH: return "TMAX_HIGH";
        case Check::TMIN_LOW: return "TMIN_LOW";
        case Check::STEP: return "STEP";
        case Check::PERSISTENCE: return "PERSISTENCE";
    }
    return "?";
}

std::string_view to_string(Action a) {
    switch (a) {
        case Action::SWAPPED: return "SWAPPED";
        case Action::SET_MISSING: return "SET_MISSING";
        case Action::FLAG_ONLY: return "FLAG_ONLY";
    }
    return "?";
}

std::string_view to_string(Target t) {
    switch (t) {
        case Target::TMAX: return "TMAX";
        case Target::TMIN: return "TMIN";
        case Target::BOTH: return "BOTH";
    }
    return "?";
}

void QCReport::add(QCFlag flag) {
    ++counts[static_cast<std::size_t>(flag.check)];
    flags.push_back(flag);
}

void QCReport::append(const std::vector<QCFlag>& more) {
    for (const auto& f : more) add(f);
}

OrderResult check_order(const DailySeries& tmax, const DailySeries& tmin, const QCConfig& cfg) {
    if (tmax.station_id != tmin.station_id)
        throw InputError(fmt::format("order check station mismatch: '{}' vs '{}'",
                                     tmax.station_id, tmin.station_id));
    OrderResult out{tmax, tmin, {}};
    for (auto& [date, hi] : out.tmax.records) {
        auto it = out.tmin.records.find(date);
        if (!hi || it == out.tmin.records.end() || !it->second) continue;
        auto& lo = it->second;
        if (!(*lo > *hi)) continue;

        QCFlag f;
        f.date = date;
        f.check = Check::ORDER;
        f.target = Target::BOTH;
        f.original_tmax = *hi;
        f.original_tmin = *lo;
        const bool swap_ok = cfg.auto_swap && !(*lo > cfg.tmax_upper) && !(*hi < cfg.tmin_lower);
        if (swap_ok) {
            std::swap(*hi, *lo);
            f.action = Action::SWAPPED;
        } else {
            hi.reset();
            lo.reset();
            f.action = Action::SET_MISSING;
        }
        out.flags.push_back(f);
    }
    return out;
}

SeriesResult check_thresholds(const DailySeries& series, const QCConfig& cfg) {
    const Target target = target_of(series.variable);
    SeriesResult out{series, {}};
    for (auto& [date, value] : out.series.records) {
        if (!value) continue;
        if (target == Target::TMAX && *value > cfg.tmax_upper) {
            out.flags.push_back(
                value_flag(date, Check::TMAX_HIGH, target, *value, Action::SET_MISSING));
            value.reset();
        } else if (target == Target::TMIN && *value < cfg.tmin_lower) {
            out.flags.push_back(
                value_flag(date, Check::TMIN_LOW, target, *value, Action::SET_MISSING));
            value.reset();
        }
    }
    return out;
}

std::vector<QCFlag> check_interdiurnal(const DailySeries& series, const QCConfig& cfg) {
    const Target target = target_of(series.variable);
    std::vector<QCFlag> flags;
    const auto& recs = series.records;
    for (auto it = recs.begin(); it != recs.end(); ++it) {
        auto next = std::next(it);
        if (next == recs.end()) break;
        if (!it->second || !next->second) continue;
        if (next->first - it->first != std::chrono::days{1}) continue;
        // 1e-9 absorbs binary rounding of decimal inputs such as 34.3 - 24.3.
        if (std::abs(*next->second - *it->second) > cfg.interdiurnal_limit + 1e-9) {
            flags.push_back(value_flag(it->first, Check::STEP, target, *it->second,
                                       Action::FLAG_ONLY));
            flags.push_back(value_flag(next->first, Check::STEP, target, *next->second,
                                       Action::FLAG_ONLY));
        }
    }
    return flags;
}

SeriesResult check_persistence(const DailySeries& series, const QCConfig& cfg) {
    const Target target = target_of(series.variable);
    SeriesResult out{series, {}};
    auto& recs = out.series.records;

    auto close_run = [&](auto first, auto last, unsigned length) {
        if (length <= cfg.max_identical_run) return;
        QCFlag f = value_flag(first->first, Check::PERSISTENCE, target, *first->second,
                              Action::SET_MISSING);
        f.run_length = length;
        out.flags.push_back(f);
        for (auto it = first; it != last; ++it) it->second.reset();
    };

    auto run_start = recs.end();
    unsigned run_length = 0;
    for (auto it = recs.begin(); it != recs.end(); ++it) {
        if (!it->second) {
            if (run_start != recs.end()) close_run(run_start, it, run_length);
            run_start = recs.end();
            run_length = 0;
            continue;
        }
        const bool extends = run_start != recs.end() &&
                             it->first - std::prev(it)->first == std::chrono::days{1} &&
                             tenths(*it->second) == tenths(*run_start->second);
        if (extends) {
            ++run_length;
        } else {
            if (run_start != recs.end()) close_run(run_start, it, run_length);
            run_start = it;
            run_length = 1;
        }
    }
    if (run_start != recs.end()) close_run(run_start, recs.end(), run_length);
    return out;
}

QCResult run_qc(const DailySeries& tmax, const DailySeries& tmin, const QCConfig& cfg) {
    cfg.validate();
    QCResult result;
    result.report.station_id = tmax.station_id;

    auto ordered = check_order(tmax, tmin, cfg);
    result.report.append(ordered.flags);

    auto hi = check_thresholds(ordered.tmax, cfg);
    auto lo = check_thresholds(ordered.tmin, cfg);
    result.report.append(hi.flags);
    result.report.append(lo.flags);

    auto hi_run = check_persistence(hi.series, cfg);
    auto lo_run = check_persistence(lo.series, cfg);
    result.report.append(hi_run.flags);
    result.report.append(lo_run.flags);

    result.report.append(check_interdiurnal(hi_run.series, cfg));
    result.report.append(check_interdiurnal(lo_run.series, cfg));

    result.tmax = std::move(hi_run.series);
    result.tmin = std::move(lo_run.series);
    return result;
}

}  // namespace hometrend::qc
