#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "runner.hpp"

namespace {

std::optional<unsigned> threads_from_env() {
    const char* env = std::getenv("STOCHDP_THREADS");
    if (!env || !*env) return std::nullopt;
    try {
        const unsigned long n = std::stoul(env);
        if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring STOCHDP_THREADS='" << env << "'\n";
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic dynamic programming with local contraction certificates"};
    app.require_subcommand(1);

    stochdp::cli::RunRequest request;
    std::string config;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out;

    const auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config, "INI configuration or a previous report.json");
        if (config_required) opt->required();
        opt->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Random seed (overrides the configuration)");
        sub->add_option("--threads", threads, "Worker threads (overrides the configuration and STOCHDP_THREADS)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "Output directory");
    };
    add_common(app.add_subcommand("solve", "Verify the bound conditions, then solve the model"), true);
    add_common(app.add_subcommand("check", "Verify the bound conditions without solving"), true);
    add_common(app.add_subcommand("counterexample", "Markov-image jump and currency-economy residuals"), false);
    add_common(app.add_subcommand("oracle", "Compare the solver with brute force on a tiny problem"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : stochdp::cli::kConfigError;
    }

    request.command = app.get_subcommands().front()->get_name();
    const CLI::App* sub = app.get_subcommands().front();
    if (!config.empty()) request.config = config;
    if (sub->count("--seed")) request.seed = seed;
    if (sub->count("--threads")) {
        request.threads = threads;
    } else {
        request.threads = threads_from_env();
    }
    if (!out.empty()) request.out = out;

    const auto result = stochdp::cli::run(request);
    if (result.exit_code == stochdp::cli::kOk) {
        std::cout << result.status << ": wrote " << result.files.size() << " files to " << result.out_dir.string()
                  << '\n';
    } else {
        std::cerr << "error (" << result.status << "): " << result.message << '\n';
        if (!result.files.empty()) std::cerr << "report written to " << (result.out_dir / "report.json").string() << '\n';
    }
    return result.exit_code;
}
