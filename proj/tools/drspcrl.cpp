// Command-line front end: train, sweep, verify, plot.
#include "drspcrl/experiment.hpp"
#include "drspcrl/verify.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace drspcrl;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kInvalidConfig = 2;

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out,
              const std::string& checkpoint) {
    ExperimentConfig config = load_config(config_path);
    if (seed) {
        config.seed = *seed;
    }
    if (!out.empty()) {
        config.output_dir = out;
    }
    config.validate();
    std::optional<fs::path> resume;
    if (!checkpoint.empty()) {
        resume = checkpoint;
    }
    const RunResult result = run_train(config, resume);
    std::cout << "trained " << result.rows.size() << " iterations into " << result.out_dir.string() << '\n';
    return kOk;
}

int cmd_sweep(const std::string& checkpoint, const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out) {
    std::optional<ExperimentConfig> config;
    if (!config_path.empty()) {
        config = load_config(config_path);
    }
    if (seed) {
        if (!config) {
            ExperimentConfig recorded;
            load_checkpoint(checkpoint, &recorded);
            config = recorded;
        }
        config->seed = *seed;
    }
    const fs::path out_dir = out.empty() ? fs::path(checkpoint).parent_path() / "sweep" : fs::path(out);
    const RunResult result = run_sweep(checkpoint, config, out_dir);
    std::cout << "evaluated " << result.reports.size() << " settings into " << result.out_dir.string() << '\n';
    return kOk;
}

int cmd_verify(const std::string& scope, std::optional<std::uint64_t> seed) {
    VerifyOptions options;
    if (seed) {
        options.seed = *seed;
    }
    const auto results = run_verify(scope, options);
    return print_results(results, std::cout) ? kOk : kRuntimeFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributionally robust self-paced curriculum RL"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::string checkpoint;
    std::optional<std::uint64_t> seed;

    auto* train = app.add_subcommand("train", "Train an agent and write train.csv, checkpoint.json");
    train->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    train->add_option("--seed", seed, "Master seed (overrides the config)");
    train->add_option("--out", out, "Output directory (overrides the config)");
    train->add_option("--checkpoint", checkpoint, "Resume from this checkpoint")->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep", "Perturbation sweep of a trained checkpoint");
    sweep->add_option("--checkpoint", checkpoint, "Checkpoint to evaluate")->required();
    sweep->add_option("--config", config_path, "Override the checkpoint's config")->check(CLI::ExistingFile);
    sweep->add_option("--seed", seed, "Evaluation master seed");
    sweep->add_option("--out", out, "Output directory (default: <checkpoint dir>/sweep)");

    std::string scope = "all";
    auto* verify = app.add_subcommand("verify", "Run the numerical property checks");
    verify->add_option("scope", scope, "dual, envelope, vi, scheduler, gradients or all")
        ->check(CLI::IsMember(verify_scopes()));
    verify->add_option("--seed", seed, "Seed for the random instances");

    std::string csv;
    auto* plot = app.add_subcommand("plot", "Render a train or sweep CSV as SVG");
    plot->add_option("csv", csv, "train.csv or sweep.csv")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", out, "SVG path (default: next to the CSV)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalidConfig;
    }

    try {
        if (*train) {
            return cmd_train(config_path, seed, out, checkpoint);
        }
        if (*sweep) {
            return cmd_sweep(checkpoint, config_path, seed, out);
        }
        if (*verify) {
            return cmd_verify(scope, seed);
        }
        if (*plot) {
            const fs::path svg = out.empty() ? fs::path(csv).replace_extension(".svg") : fs::path(out);
            run_plot(csv, svg);
            std::cout << "wrote " << svg.string() << '\n';
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kOk;
}
