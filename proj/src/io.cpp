#include "hometrend/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <openssl/evp.h>

#include "hometrend/errors.hpp"

namespace hometrend::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::optional<double> parse_number(std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

std::optional<double> parse_value(std::string_view field, std::string_view source,
                                  std::size_t line_no, std::string_view column) {
    if (field.empty() || field == "NA") return std::nullopt;
    auto v = parse_number(field);
    if (!v)
        throw InputError(fmt::format("{}:{}: non-numeric {} value '{}'", source, line_no, column,
                                     field));
    return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
    return in;
}

std::string fmt_optional(const std::optional<double>& v) { return v ? fmt_value(*v) : "NA"; }

// Shortest text that parses back to the same double.
std::string fmt_exact(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : "NA"; }

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

StationData parse_station_csv(std::istream& in, std::string_view source) {
    StationData out;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> duplicates;

    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty()) continue;
        const auto fields = split(view);
        if (line_no == 1 && fields[0] == "station_id") continue;
        if (fields.size() != 4)
            throw InputError(fmt::format("{}:{}: expected 4 fields, got {}", source, line_no,
                                         fields.size()));
        if (fields[0].empty())
            throw InputError(fmt::format("{}:{}: empty station_id", source, line_no));
        if (out.station_id.empty()) {
            out.station_id = std::string(fields[0]);
        } else if (fields[0] != out.station_id) {
            throw InputError(fmt::format("{}:{}: station '{}' differs from '{}'", source, line_no,
                                         fields[0], out.station_id));
        }
        const auto date = parse_iso_date(fields[1]);
        if (!date)
            throw InputError(fmt::format("{}:{}: malformed date '{}'", source, line_no, fields[1]));
        const auto hi = parse_value(fields[2], source, line_no, "tmax");
        const auto lo = parse_value(fields[3], source, line_no, "tmin");
        if (!out.tmax.records.emplace(*date, hi).second) {
            duplicates.push_back(format_iso_date(*date));
            continue;
        }
        out.tmin.records.emplace(*date, lo);
    }
    if (!duplicates.empty())
        throw InputError(fmt::format("{}: duplicate dates: {}", source, fmt::join(duplicates, ", ")));
    out.tmax.station_id = out.tmin.station_id = out.station_id;
    out.tmax.variable = Variable::TMAX;
    out.tmin.variable = Variable::TMIN;
    return out;
}

StationData load_station_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_station_csv(in, path.string());
}

void write_station_csv(std::ostream& out, const DailySeries& tmax, const DailySeries& tmin) {
    out << "station_id,date,tmax,tmin\n";
    std::set<Date> dates;
    for (const auto& kv : tmax.records) dates.insert(kv.first);
    for (const auto& kv : tmin.records) dates.insert(kv.first);
    for (Date d : dates) {
        std::optional<double> hi;
        std::optional<double> lo;
        if (auto it = tmax.records.find(d); it != tmax.records.end()) hi = it->second;
        if (auto it = tmin.records.find(d); it != tmin.records.end()) lo = it->second;
        out << tmax.station_id << ',' << format_iso_date(d) << ',' << fmt_exact(hi) << ','
            << fmt_exact(lo) << '\n';
    }
}

std::vector<StationMeta> parse_metadata_csv(std::istream& in, std::string_view source) {
    std::vector<StationMeta> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty()) continue;
        const auto f = split(view);
        if (line_no == 1 && f[0] == "station_id") continue;
        if (f.size() != 6)
            throw InputError(fmt::format("{}:{}: expected 6 fields, got {}", source, line_no, f.size()));
        StationMeta m;
        m.station_id = std::string(f[0]);
        m.name = std::string(f[1]);
        const auto lat = parse_number(f[2]);
        const auto lon = parse_number(f[3]);
        if (!lat || !lon)
            throw InputError(fmt::format("{}:{}: bad coordinates", source, line_no));
        m.latitude = *lat;
        m.longitude = *lon;
        if (!f[4].empty() && f[4] != "NA") {
            m.elevation = parse_number(f[4]);
            if (!m.elevation)
                throw InputError(fmt::format("{}:{}: bad elevation '{}'", source, line_no, f[4]));
        }
        if (!f[5].empty()) m.zone = std::string(f[5]);
        m.validate();
        if (!seen.insert(m.station_id).second)
            throw InputError(fmt::format("{}: station '{}' listed twice", source, m.station_id));
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<StationMeta> load_metadata_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_metadata_csv(in, path.string());
}

std::string fmt_value(double v) { return fmt::format("{:.6g}", v); }

std::string fmt_p(double p) { return fmt::format("{:.4g}", p); }

void write_qc_csv_header(std::ostream& out) {
    out << "station,date,check,variable,original,action\n";
}

void write_qc_csv_rows(std::ostream& out, const qc::QCReport& report) {
    for (const auto& f : report.flags) {
        std::string original;
        switch (f.target) {
            case qc::Target::TMAX: original = fmt_optional(f.original_tmax); break;
            case qc::Target::TMIN: original = fmt_optional(f.original_tmin); break;
            case qc::Target::BOTH:
                original = fmt_optional(f.original_tmax) + "|" + fmt_optional(f.original_tmin);
                break;
        }
        if (f.check == qc::Check::PERSISTENCE) original += fmt::format(" x{}", f.run_length);
        out << report.station_id << ',' << format_iso_date(f.date) << ',' << qc::to_string(f.check)
            << ',' << qc::to_string(f.target) << ',' << original << ','
            << qc::to_string(f.action) << '\n';
    }
}

nlohmann::json qc_report_json(const qc::QCReport& report) {
    nlohmann::json flags = nlohmann::json::array();
    for (const auto& f : report.flags) {
        nlohmann::json j{{"date", format_iso_date(f.date)},
                         {"check", qc::to_string(f.check)},
                         {"variable", qc::to_string(f.target)},
                         {"original_tmax", optional_json(f.original_tmax)},
                         {"original_tmin", optional_json(f.original_tmin)},
                         {"action", qc::to_string(f.action)}};
        if (f.check == qc::Check::PERSISTENCE) j["run_length"] = f.run_length;
        flags.push_back(std::move(j));
    }
    nlohmann::json counts = nlohmann::json::object();
    for (auto c : {qc::Check::ORDER, qc::Check::TMAX_HIGH, qc::Check::TMIN_LOW, qc::Check::STEP,
                   qc::Check::PERSISTENCE})
        counts[std::string(qc::to_string(c))] = report.count(c);
    return {{"station", report.station_id}, {"counts", counts}, {"flags", flags}};
}

void write_homogeneity_csv(std::ostream& out, const std::vector<HomogeneityRow>& rows,
                           bool monthly) {
    using homogeneity::Test;
    out << "station,";
    if (monthly) out << "month,";
    out << "U(PT),p(PT),T(SNHT),p(SNHT),V(BLRT),p(BLRT),U(BUT),p(BUT),rejects,class\n";
    for (const auto& row : rows) {
        const auto& b = row.battery;
        out << row.station << ',';
        if (monthly) out << (row.month ? std::to_string(*row.month) : std::string{}) << ',';
        for (Test t : {Test::PETTITT, Test::SNHT, Test::BLRT, Test::BUT})
            out << fmt_value(b.get(t).statistic) << ',' << fmt_p(b.get(t).p_value) << ',';
        out << b.n_rejections << ',' << homogeneity::to_string(b.station_class) << '\n';
    }
}

std::string TrendRow::period() const { return month ? std::to_string(*month) : "annual"; }

void write_trend_csv(std::ostream& out, const std::vector<TrendRow>& rows) {
    out << "station,variable,dataset,period,n,S,VarS,VarS*,Z,p,significant,sen_per_decade\n";
    for (const auto& r : rows) {
        const auto& mk = r.result.mk;
        out << r.station << ',' << to_string(r.variable) << ',' << r.dataset << ',' << r.period()
            << ',' << mk.n << ',' << mk.s << ',' << fmt_value(mk.var_s) << ','
            << fmt_value(mk.var_s_star) << ',' << fmt_value(mk.z) << ',' << fmt_p(mk.p_two_sided)
            << ',' << (mk.significant ? "true" : "false") << ','
            << fmt_value(r.result.sen.slope_per_decade) << '\n';
    }
}

nlohmann::json break_set_json(const homogenize::BreakSet& breaks) {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < breaks.breaks.size(); ++i) {
        const auto& ym = breaks.break_months[i];
        list.push_back({{"index", breaks.breaks[i]},
                        {"year", ym.year},
                        {"month", ym.month},
                        {"p_value", breaks.p_values[i]}});
    }
    return {{"method", breaks.method},
            {"alpha", breaks.alpha},
            {"min_segment_len", breaks.min_segment_len},
            {"breaks", list}};
}

nlohmann::json plan_json(const homogenize::AdjustmentPlan& plan) {
    nlohmann::json segments = nlohmann::json::array();
    for (std::size_t s = 0; s < plan.segments.size(); ++s) {
        const auto& seg = plan.segments[s];
        segments.push_back(
            {{"first", fmt::format("{:04d}-{:02d}", seg.first.year, seg.first.month)},
             {"last", fmt::format("{:04d}-{:02d}", seg.last.year, seg.last.month)},
             {"anchor", s == plan.anchor()},
             {"offsets", seg.offsets},
             {"fallback", seg.fallback}});
    }
    return {{"anchor_segment", plan.anchor()}, {"segments", segments}};
}

nlohmann::json export_geojson(const std::vector<TrendRow>& rows,
                              const std::vector<StationMeta>& stations) {
    std::map<std::string, const StationMeta*> by_id;
    for (const auto& m : stations) by_id.emplace(m.station_id, &m);

    nlohmann::json features = nlohmann::json::array();
    for (const auto& r : rows) {
        const auto it = by_id.find(r.station);
        if (it == by_id.end())
            throw InputError(fmt::format("station '{}' has no metadata coordinates", r.station));
        const StationMeta& m = *it->second;
        nlohmann::json props{{"station_id", r.station},
                             {"name", m.name},
                             {"variable", to_string(r.variable)},
                             {"dataset", r.dataset},
                             {"period", r.period()},
                             {"sen_per_decade", r.result.sen.slope_per_decade},
                             {"p", r.result.mk.p_two_sided},
                             {"significant", r.result.mk.significant},
                             {"n", r.result.mk.n}};
        features.push_back({{"type", "Feature"},
                            {"geometry",
                             {{"type", "Point"}, {"coordinates", {m.longitude, m.latitude}}}},
                            {"properties", props}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    char buf[1 << 15];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::string hex;
    for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

}  // namespace hometrend::io
