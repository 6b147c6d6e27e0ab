#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kspv/commands.hpp"
#include "kspv/errors.hpp"

namespace {

// Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure.
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Koopman subspace geometry workbench: principal angles between a "
                 "kernel dictionary and its one-step image, exactly or via landmark "
                 "features, with pruning and prediction-error experiments"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    bool audit_exact = false;
    bool force = false;
    app.add_option("--config", config_path, "JSON config file (defaults when omitted)");
    app.add_option("--seed", seed_override, "override data.seed");
    app.add_option("--out", out_override, "override the output directory");
    app.add_flag("--audit-exact", audit_exact,
                 "recompute the exact invariance proximity of pruned results");
    app.add_flag("--force", force, "run exact diagnostics past exact.n_cap");

    auto* generate = app.add_subcommand("generate", "sample snapshot pairs");
    auto* dictionary = app.add_subcommand("dictionary", "sample kernel-section centers");
    auto* residual_sweep = app.add_subcommand(
        "residual-sweep", "orthonormality residuals of landmark factors across D");
    auto* compare_angles = app.add_subcommand(
        "compare-angles", "exact vs approximate principal angles across D");
    auto* prune = app.add_subcommand("prune", "iterative principal-vector pruning");
    auto* predict_error = app.add_subcommand(
        "predict-error", "multi-step eigenfunction prediction-error map");

    std::optional<std::string> dictionary_file;
    predict_error->add_option(
        "--dictionary-file", dictionary_file,
        "dictionary CSV to model; relative paths resolve inside the output "
        "directory (default dictionary.csv)");

    // let the global flags appear after the verb as well as before it
    for (CLI::App* sub : {generate, dictionary, residual_sweep, compare_angles, prune,
                          predict_error}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        kspv::CommandContext ctx;
        ctx.config = kspv::resolve_config(
            config_path ? std::optional<std::filesystem::path>(*config_path)
                        : std::nullopt);
        if (seed_override) ctx.config.data.seed = *seed_override;
        ctx.out_dir = out_override ? *out_override : ctx.config.out_dir;
        ctx.audit_exact = audit_exact;
        ctx.force = force;

        if (generate->parsed()) kspv::cmd_generate(ctx);
        if (dictionary->parsed()) kspv::cmd_dictionary(ctx);
        if (residual_sweep->parsed()) kspv::cmd_residual_sweep(ctx);
        if (compare_angles->parsed()) kspv::cmd_compare_angles(ctx);
        if (prune->parsed()) kspv::cmd_prune(ctx);
        if (predict_error->parsed()) {
            kspv::cmd_predict_error(
                ctx, dictionary_file
                         ? std::optional<std::filesystem::path>(*dictionary_file)
                         : std::nullopt);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
