#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hometrend/homogeneity.hpp"
#include "hometrend/homogenize.hpp"
#include "hometrend/qc.hpp"
#include "hometrend/series.hpp"
#include "hometrend/trend.hpp"

namespace hometrend {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr std::string_view kConfigEnvVar = "HOMETREND_CONFIG";

enum class ExitCode : int { OK = 0, INPUT_ERROR = 2, INTERNAL_ERROR = 3 };

struct RunConfig {
    std::filesystem::path stations_dir;
    std::filesystem::path metadata_csv;
    std::filesystem::path reference_dir;
    std::filesystem::path output_dir;

    qc::QCConfig qc;
    CompletenessPolicy completeness;

    double homogeneity_alpha = 0.05;
    std::size_t n_sims = 20000;
    std::uint64_t seed = 0;
    homogeneity::TestOptions tests;

    homogenize::DetectOptions homogenize;  // its seed is derived from `seed` per series

    double trend_alpha = 0.05;
    trend::HamedRaoOptions hamed_rao;

    /// Throws InputError: n_sims < 1000, alpha outside (0,1), missing paths.
    void validate() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Reads an INI-style `key = value` file with [input], [output], [qc],
/// [completeness], [homogeneity], [homogenize] and [trend] sections.
/// Relative paths resolve against the file's directory.
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

enum class Stage { QC, HOMOGENEITY, HOMOGENIZE, TRENDS, ALL };
[[nodiscard]] std::optional<Stage> stage_from_string(std::string_view verb);

/// Runs one stage (or all) and writes its artifacts into config.output_dir.
/// Stage verbs other than ALL read the artifacts of earlier stages from the
/// output directory. Artifacts are staged and only moved into place on success.
/// Returns 0 on success, 2 on input errors, 3 on internal errors.
int run_pipeline(const RunConfig& config, Stage stage, std::ostream& log);

}  // namespace hometrend
