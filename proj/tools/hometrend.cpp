#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hometrend/errors.hpp"
#include "hometrend/fixture.hpp"
#include "hometrend/pipeline.hpp"

namespace {

struct StageOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_sims;
};

void add_stage_options(CLI::App* cmd, StageOptions& opts) {
    cmd->add_option("-c,--config", opts.config, "run configuration file (default: $HOMETREND_CONFIG)");
    cmd->add_option("-o,--out", opts.out, "output directory (overrides [output] dir)");
    cmd->add_option("-s,--seed", opts.seed, "run seed (overrides [homogeneity] seed)");
    cmd->add_option("-n,--n-sims", opts.n_sims, "Monte Carlo draws per homogeneity test");
}

int run_stage(hometrend::Stage stage, const StageOptions& opts) {
    using hometrend::ExitCode;
    std::string path = opts.config;
    if (path.empty()) {
        if (const char* env = std::getenv(hometrend::kConfigEnvVar.data())) path = env;
    }
    if (path.empty()) {
        std::cerr << "input error: no --config given and " << hometrend::kConfigEnvVar
                  << " is not set\n";
        return static_cast<int>(ExitCode::INPUT_ERROR);
    }
    hometrend::RunConfig cfg;
    try {
        cfg = hometrend::load_config(path);
    } catch (const hometrend::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::INPUT_ERROR);
    }
    if (!opts.out.empty()) cfg.output_dir = opts.out;
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.n_sims) cfg.n_sims = *opts.n_sims;
    return hometrend::run_pipeline(cfg, stage, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Station temperature QC, homogeneity, homogenization and trend analysis"};
    app.require_subcommand(1);

    StageOptions opts;
    const std::pair<const char*, const char*> verbs[] = {
        {"qc", "quality-control daily Tmax/Tmin"},
        {"homogeneity", "run the four homogeneity tests on DTR series"},
        {"homogenize", "reference-based homogenization of Tmax/Tmin"},
        {"trends", "modified Mann-Kendall trends and Sen's slopes"},
        {"all", "run every stage"},
    };
    for (const auto& [name, help] : verbs) add_stage_options(app.add_subcommand(name, help), opts);

    std::string fixture_dir;
    std::uint64_t fixture_seed = 42;
    auto* fixture = app.add_subcommand("make-fixture", "write the synthetic three-station dataset");
    fixture->add_option("-o,--out", fixture_dir, "destination directory")->required();
    fixture->add_option("-s,--seed", fixture_seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(hometrend::ExitCode::INPUT_ERROR);
    }

    if (fixture->parsed()) {
        try {
            hometrend::write_synthetic_fixture(fixture_dir, fixture_seed);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return static_cast<int>(hometrend::ExitCode::INTERNAL_ERROR);
        }
        return 0;
    }
    for (auto* sub : app.get_subcommands()) {
        if (auto stage = hometrend::stage_from_string(sub->get_name())) return run_stage(*stage, opts);
    }
    return static_cast<int>(hometrend::ExitCode::INPUT_ERROR);
}
