#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "hometrend/errors.hpp"
#include "hometrend/pipeline.hpp"

namespace hometrend {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

std::string_view sigma_name(homogeneity::SigmaDivisor d) {
    return d == homogeneity::SigmaDivisor::POPULATION ? "population" : "sample";
}

homogeneity::SigmaDivisor sigma_from(const std::string& s) {
    if (s == "population") return homogeneity::SigmaDivisor::POPULATION;
    if (s == "sample") return homogeneity::SigmaDivisor::SAMPLE;
    throw InputError(fmt::format("sigma divisor must be 'population' or 'sample', got '{}'", s));
}

std::string_view lag_rule_name(trend::LagRule r) {
    switch (r) {
        case trend::LagRule::SIGNIFICANT: return "significant";
        case trend::LagRule::ALL: return "all";
        case trend::LagRule::FIRST_K: return "first_k";
    }
    return "?";
}

trend::LagRule lag_rule_from(const std::string& s) {
    if (s == "significant") return trend::LagRule::SIGNIFICANT;
    if (s == "all") return trend::LagRule::ALL;
    if (s == "first_k") return trend::LagRule::FIRST_K;
    throw InputError(fmt::format("unknown lag_rule '{}'", s));
}

void check_alpha(double a, std::string_view what) {
    if (!(a > 0.0 && a < 1.0)) throw InputError(fmt::format("{} must lie in (0, 1), got {}", what, a));
}

}  // namespace

void RunConfig::validate() const {
    qc.validate();
    if (n_sims < 1000)
        throw InputError(fmt::format("homogeneity n_sims must be >= 1000, got {}", n_sims));
    if (homogenize.n_sims < 1) throw InputError("homogenize n_sims must be positive");
    if (homogenize.min_segment_len < 2) throw InputError("min_segment_len must be >= 2");
    if (tests.min_n < 2) throw InputError("min_n must be >= 2");
    check_alpha(homogeneity_alpha, "homogeneity alpha");
    check_alpha(homogenize.alpha, "homogenize alpha");
    check_alpha(trend_alpha, "trend alpha");
    if (!(hamed_rao.factor_floor > 0.0)) throw InputError("factor_floor must be positive");
    if (stations_dir.empty()) throw InputError("input.stations_dir is required");
    if (metadata_csv.empty()) throw InputError("input.metadata is required");
    if (output_dir.empty()) throw InputError("output directory is required");
}

nlohmann::json RunConfig::to_json() const {
    return {
        {"input",
         {{"stations_dir", stations_dir.string()},
          {"metadata", metadata_csv.string()},
          {"reference_dir", reference_dir.string()}}},
        {"output", {{"dir", output_dir.string()}}},
        {"qc",
         {{"tmax_upper", qc.tmax_upper},
          {"tmin_lower", qc.tmin_lower},
          {"interdiurnal_limit", qc.interdiurnal_limit},
          {"max_identical_run", qc.max_identical_run},
          {"auto_swap", qc.auto_swap}}},
        {"completeness",
         {{"max_missing_days_per_month", completeness.max_missing_days_per_month},
          {"max_consecutive_missing_days", completeness.max_consecutive_missing_days},
          {"require_all_months_for_annual", completeness.require_all_months_for_annual}}},
        {"homogeneity",
         {{"alpha", homogeneity_alpha},
          {"n_sims", n_sims},
          {"seed", seed},
          {"min_n", tests.min_n},
          {"snht_sigma", sigma_name(tests.snht_sigma)},
          {"buishand_sigma", sigma_name(tests.buishand_sigma)}}},
        {"homogenize",
         {{"alpha", homogenize.alpha},
          {"min_segment_len", homogenize.min_segment_len},
          {"n_sims", homogenize.n_sims}}},
        {"trend",
         {{"alpha", trend_alpha},
          {"lag_rule", lag_rule_name(hamed_rao.lag_rule)},
          {"first_k", hamed_rao.first_k},
          {"detrend", hamed_rao.detrend},
          {"factor_floor", hamed_rao.factor_floor}}},
    };
}

RunConfig load_config(const fs::path& path) {
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw InputError(fmt::format("config '{}': {}", path.string(), e.what()));
    }

    const fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) -> fs::path {
        if (p.empty()) return {};
        fs::path q(p);
        return q.is_absolute() ? q : base / q;
    };

    RunConfig c;
    try {
        c.stations_dir = resolve(tree.get<std::string>("input.stations_dir", ""));
        c.metadata_csv = resolve(tree.get<std::string>("input.metadata", ""));
        c.reference_dir = resolve(tree.get<std::string>("input.reference_dir", ""));
        c.output_dir = resolve(tree.get<std::string>("output.dir", ""));

        c.qc.tmax_upper = tree.get("qc.tmax_upper", c.qc.tmax_upper);
        c.qc.tmin_lower = tree.get("qc.tmin_lower", c.qc.tmin_lower);
        c.qc.interdiurnal_limit = tree.get("qc.interdiurnal_limit", c.qc.interdiurnal_limit);
        c.qc.max_identical_run = tree.get("qc.max_identical_run", c.qc.max_identical_run);
        c.qc.auto_swap = tree.get("qc.auto_swap", c.qc.auto_swap);

        auto& cp = c.completeness;
        cp.max_missing_days_per_month =
            tree.get("completeness.max_missing_days_per_month", cp.max_missing_days_per_month);
        cp.max_consecutive_missing_days =
            tree.get("completeness.max_consecutive_missing_days", cp.max_consecutive_missing_days);
        cp.require_all_months_for_annual = tree.get("completeness.require_all_months_for_annual",
                                                    cp.require_all_months_for_annual);

        c.homogeneity_alpha = tree.get("homogeneity.alpha", c.homogeneity_alpha);
        c.n_sims = tree.get("homogeneity.n_sims", c.n_sims);
        c.seed = tree.get("homogeneity.seed", c.seed);
        c.tests.min_n = tree.get("homogeneity.min_n", c.tests.min_n);
        c.tests.snht_sigma = sigma_from(tree.get<std::string>("homogeneity.snht_sigma", "population"));
        c.tests.buishand_sigma =
            sigma_from(tree.get<std::string>("homogeneity.buishand_sigma", "sample"));

        c.homogenize.alpha = tree.get("homogenize.alpha", c.homogenize.alpha);
        c.homogenize.min_segment_len =
            tree.get("homogenize.min_segment_len", c.homogenize.min_segment_len);
        c.homogenize.n_sims = tree.get("homogenize.n_sims", c.homogenize.n_sims);

        c.trend_alpha = tree.get("trend.alpha", c.trend_alpha);
        c.hamed_rao.lag_rule = lag_rule_from(tree.get<std::string>("trend.lag_rule", "significant"));
        c.hamed_rao.first_k = tree.get("trend.first_k", c.hamed_rao.first_k);
        c.hamed_rao.detrend = tree.get("trend.detrend", c.hamed_rao.detrend);
        c.hamed_rao.factor_floor = tree.get("trend.factor_floor", c.hamed_rao.factor_floor);
    } catch (const pt::ptree_error& e) {
        throw InputError(fmt::format("config '{}': {}", path.string(), e.what()));
    }
    return c;
}

std::optional<Stage> stage_from_string(std::string_view verb) {
    if (verb == "qc") return Stage::QC;
    if (verb == "homogeneity") return Stage::HOMOGENEITY;
    if (verb == "homogenize") return Stage::HOMOGENIZE;
    if (verb == "trends") return Stage::TRENDS;
    if (verb == "all") return Stage::ALL;
    return std::nullopt;
}

}  // namespace hometrend
