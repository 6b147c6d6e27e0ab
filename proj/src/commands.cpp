#include "kspv/commands.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "kspv/errors.hpp"
#include "kspv/io.hpp"
#include "kspv/koopman.hpp"
#include "kspv/nystrom.hpp"
#include "kspv/pruning.hpp"
#include "kspv/rkhs_geometry.hpp"

namespace kspv {

namespace fs = std::filesystem;

namespace {

class StageClock {
  public:
    void start(std::string name) {
        name_ = std::move(name);
        begin_ = std::chrono::steady_clock::now();
    }
    void stop() {
        const auto end = std::chrono::steady_clock::now();
        stages_.emplace_back(name_,
                             std::chrono::duration<double, std::milli>(end - begin_).count());
    }
    double last_ms() const { return stages_.back().second; }
    const std::vector<std::pair<std::string, double>>& stages() const { return stages_; }

  private:
    std::string name_;
    std::chrono::steady_clock::time_point begin_;
    std::vector<std::pair<std::string, double>> stages_;
};

void write_manifest(const CommandContext& ctx, const std::string& verb,
                    const StageClock& clock, const std::vector<std::string>& outputs) {
    nlohmann::ordered_json j;
    j["verb"] = verb;
    j["tool_version"] = std::string(kToolVersion);
    j["config"] = config_to_json(ctx.config);
    for (const auto& [name, ms] : clock.stages()) j["timings_ms"][name] = ms;
    auto inventory = nlohmann::ordered_json::array();
    for (const auto& name : outputs) {
        inventory.push_back(
            {{"file", name}, {"digest_fnv1a64", file_digest(ctx.out_dir / name)}});
    }
    j["outputs"] = inventory;
    write_json_file(ctx.out_dir / ("manifest_" + verb + ".json"), j);
}

ExactOptions exact_options(const ExperimentConfig& config) {
    ExactOptions opts;
    opts.lambda_rel = config.exact.lambda_rel;
    opts.eig_threshold = config.exact.eig_threshold;
    opts.cosine_slack = config.exact.cosine_slack;
    return opts;
}

/// Exact diagnostics build N×N kernel matrices; refuse past the cap.
void require_exact_affordable(const CommandContext& ctx, Eigen::Index n,
                              const std::string& what) {
    if (n > ctx.config.exact.n_cap && !ctx.force) {
        throw ConfigError(what + " requires exact N×N kernel matrices and N = " +
                          std::to_string(n) + " exceeds exact.n_cap = " +
                          std::to_string(ctx.config.exact.n_cap) +
                          "; rerun with --force to override");
    }
}

SnapshotData load_data(const CommandContext& ctx) {
    return load_snapshots(ctx.out_dir);
}

Eigen::MatrixXd load_w(const CommandContext& ctx, const SnapshotData& data) {
    return load_dictionary(ctx.out_dir / "dictionary.csv", data.count());
}

std::uint64_t sweep_seed(const ExperimentConfig& config, int repeat) {
    return split_seed(config.nystrom.landmark_seed, static_cast<std::uint64_t>(repeat));
}

double percentile_95(Eigen::VectorXd values) {
    std::sort(values.data(), values.data() + values.size());
    const auto rank = static_cast<Eigen::Index>(
        std::ceil(0.95 * static_cast<double>(values.size()))) - 1;
    return values(std::max<Eigen::Index>(rank, 0));
}

} // namespace

void cmd_generate(const CommandContext& ctx) {
    StageClock clock;
    clock.start("sample");
    const DiscreteSystem system = make_system(ctx.config);
    const SnapshotData data = sample_uniform(system, ctx.config.data.count,
                                             ctx.config.system.box, ctx.config.data.seed);
    clock.stop();

    clock.start("write");
    save_snapshots(ctx.out_dir, data);
    clock.stop();
    write_manifest(ctx, "generate", clock, {"data.csv", "data_meta.json"});
}

void cmd_dictionary(const CommandContext& ctx) {
    StageClock clock;
    clock.start("sample");
    const SnapshotData data = load_data(ctx);
    if (ctx.config.dictionary.size > data.count()) {
        throw InvalidCount("dictionary.size " + std::to_string(ctx.config.dictionary.size) +
                           " exceeds dataset size " + std::to_string(data.count()));
    }
    const std::vector<Eigen::Index> centers = sample_without_replacement(
        data.count(), ctx.config.dictionary.size, ctx.config.dictionary.seed);
    clock.stop();

    clock.start("write");
    save_dictionary_selection(ctx.out_dir / "dictionary.csv", centers);
    clock.stop();
    write_manifest(ctx, "dictionary", clock, {"dictionary.csv"});
}

void cmd_residual_sweep(const CommandContext& ctx) {
    StageClock clock;
    clock.start("load");
    const SnapshotData data = load_data(ctx);
    const Eigen::MatrixXd w_v = load_w(ctx, data);
    require_exact_affordable(ctx, data.count(), "residual-sweep");
    clock.stop();

    // The exact Gram matrices are the yardstick every (D, seed) run is
    // measured against; built once.
    clock.start("exact_grams");
    const ExactWorkspace ws =
        make_exact_workspace(data, ctx.config.kernel, ctx.config.exact.lambda_rel);
    const Eigen::MatrixXd w_kv = solve_koopman_image(ws, w_v);
    const GramTriple grams = gram_triple(w_v, w_kv, ws.k_xx, ws.k_txx);
    clock.stop();

    clock.start("sweep");
    std::vector<std::array<double, 5>> rows;
    for (const Eigen::Index d : ctx.config.nystrom.d_list) {
        for (int repeat = 0; repeat < ctx.config.nystrom.landmark_seed_count; ++repeat) {
            const auto begin = std::chrono::steady_clock::now();
            const NystromModel model =
                fit_landmarks(data, d, sweep_seed(ctx.config, repeat), ctx.config.kernel,
                              ctx.config.nystrom.landmark_eig_threshold);
            const NystromFeatures features = build_features(model, data);
            const ApproxTargets targets = target_matrices(
                features, w_v, default_feature_lambda(features, ctx.config.nystrom.lambda_rel),
                default_svd_threshold(model, ctx.config.nystrom.c_v),
                default_svd_threshold(model, ctx.config.nystrom.c_kv));
            const double eps_v = orthonormality_residual(targets.factor_v, grams.m_v);
            const double eps_kv = orthonormality_residual(targets.factor_kv, grams.m_kv);
            const double wall_ms = std::chrono::duration<double, std::milli>(
                                       std::chrono::steady_clock::now() - begin)
                                       .count();
            rows.push_back({static_cast<double>(d), static_cast<double>(repeat), eps_v,
                            eps_kv, wall_ms});
        }
    }
    clock.stop();

    clock.start("write");
    Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size()), 5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int c = 0; c < 5; ++c) table(static_cast<Eigen::Index>(i), c) = rows[i][c];
    }
    write_matrix_csv(ctx.out_dir / "residual_sweep.csv", table,
                     {"D", "seed_index", "epsilon_V", "epsilon_KV", "wall_ms"});
    clock.stop();
    write_manifest(ctx, "residual-sweep", clock, {"residual_sweep.csv"});
}

void cmd_compare_angles(const CommandContext& ctx) {
    StageClock clock;
    clock.start("load");
    const SnapshotData data = load_data(ctx);
    const Eigen::MatrixXd w_v = load_w(ctx, data);
    require_exact_affordable(ctx, data.count(), "compare-angles");
    clock.stop();

    clock.start("exact");
    const PrincipalDecomposition exact =
        exact_principal(w_v, data, ctx.config.kernel, exact_options(ctx.config));
    clock.stop();

    clock.start("approximate");
    std::vector<std::pair<Eigen::Index, Eigen::VectorXd>> approx;
    for (const Eigen::Index d : ctx.config.nystrom.d_list) {
        const NystromModel model =
            fit_landmarks(data, d, ctx.config.nystrom.landmark_seed, ctx.config.kernel,
                          ctx.config.nystrom.landmark_eig_threshold);
        const NystromFeatures features = build_features(model, data);
        const PrincipalDecomposition pd = approx_principal(
            features, w_v, default_feature_lambda(features, ctx.config.nystrom.lambda_rel),
            default_svd_threshold(model, ctx.config.nystrom.c_v),
            default_svd_threshold(model, ctx.config.nystrom.c_kv),
            ctx.config.nystrom.cosine_slack);
        approx.emplace_back(d, pd.angles);
    }
    clock.stop();

    clock.start("write");
    Eigen::Index max_rows = exact.angles.size();
    for (const auto& [d, angles] : approx) max_rows = std::max(max_rows, angles.size());

    // Rank mismatches leave trailing empty fields rather than a numeric
    // sentinel, so plotting tools skip them naturally.
    std::ostringstream csv;
    csv << "index,theta_exact";
    for (const auto& [d, angles] : approx) csv << ",theta_approx_D" << d;
    csv << '\n';
    for (Eigen::Index i = 0; i < max_rows; ++i) {
        csv << i << ',';
        if (i < exact.angles.size()) csv << format_double(exact.angles(i));
        for (const auto& [d, angles] : approx) {
            csv << ',';
            if (i < angles.size()) csv << format_double(angles(i));
        }
        csv << '\n';
    }
    write_text_file(ctx.out_dir / "compare_angles.csv", csv.str());

    nlohmann::ordered_json summary;
    summary["pair_count_exact"] = exact.angles.size();
    auto entries = nlohmann::ordered_json::array();
    for (const auto& [d, angles] : approx) {
        const Eigen::Index common = std::min(exact.angles.size(), angles.size());
        double max_dev = 0.0;
        for (Eigen::Index i = 0; i < common; ++i) {
            max_dev = std::max(max_dev, std::abs(angles(i) - exact.angles(i)));
        }
        nlohmann::ordered_json entry;
        entry["d"] = d;
        entry["pair_count"] = angles.size();
        entry["max_abs_deviation"] = max_dev;
        entry["top_angle_deviation"] =
            std::abs(angles(angles.size() - 1) - exact.angles(exact.angles.size() - 1));
        entries.push_back(entry);
    }
    summary["per_d"] = entries;
    write_json_file(ctx.out_dir / "compare_angles_summary.json", summary);
    clock.stop();
    write_manifest(ctx, "compare-angles", clock,
                   {"compare_angles.csv", "compare_angles_summary.json"});
}

void cmd_prune(const CommandContext& ctx) {
    StageClock clock;
    clock.start("load");
    const SnapshotData data = load_data(ctx);
    const Eigen::MatrixXd w_v = load_w(ctx, data);
    clock.stop();

    PruneConfig prune_config;
    prune_config.epsilon = ctx.config.prune.epsilon;
    prune_config.max_iterations = ctx.config.prune.max_iterations;
    prune_config.exact = exact_options(ctx.config);
    prune_config.approx_lambda_rel = ctx.config.nystrom.lambda_rel;
    prune_config.approx_c_v = ctx.config.nystrom.c_v;
    prune_config.approx_c_kv = ctx.config.nystrom.c_kv;
    prune_config.approx_cosine_slack = ctx.config.nystrom.cosine_slack;

    clock.start("prune");
    PruneReport report;
    if (ctx.config.prune.mode == "exact") {
        require_exact_affordable(ctx, data.count(), "exact-mode pruning");
        prune_config.mode = PruneMode::exact;
        report = kernel_spv(w_v, data, ctx.config.kernel, prune_config);
    } else {
        if (ctx.config.nystrom.prune_d > data.count()) {
            throw ConfigError("nystrom.prune_d " +
                              std::to_string(ctx.config.nystrom.prune_d) +
                              " exceeds dataset size " + std::to_string(data.count()));
        }
        prune_config.mode = PruneMode::approximate;
        const NystromModel model = fit_landmarks(
            data, ctx.config.nystrom.prune_d, ctx.config.nystrom.landmark_seed,
            ctx.config.kernel, ctx.config.nystrom.landmark_eig_threshold);
        report = approx_kernel_spv(w_v, data, model, prune_config);
    }
    clock.stop();

    std::optional<double> audit_delta;
    if (ctx.audit_exact) {
        clock.start("audit_exact");
        require_exact_affordable(ctx, data.count(), "--audit-exact");
        const PrincipalDecomposition pd = exact_principal(
            report.final_w, data, ctx.config.kernel, exact_options(ctx.config));
        audit_delta = invariance_proximity(pd);
        clock.stop();
    }

    clock.start("write");
    nlohmann::ordered_json j;
    j["mode"] = ctx.config.prune.mode;
    j["epsilon"] = ctx.config.prune.epsilon;
    j["converged"] = report.converged;
    j["final_delta"] = report.final_delta;
    j["final_dimension"] = report.final_w.cols();
    if (audit_delta) j["audit_exact_delta"] = *audit_delta;
    auto iterations = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < report.iterations.size(); ++i) {
        const PruneIteration& it = report.iterations[i];
        nlohmann::ordered_json row;
        row["iteration"] = i;
        row["dimension"] = it.dimension;
        row["delta"] = it.delta;
        row["angles"] = std::vector<double>(it.angles.data(),
                                            it.angles.data() + it.angles.size());
        iterations.push_back(row);
    }
    j["iterations"] = iterations;
    write_json_file(ctx.out_dir / "prune_report.json", j);

    Eigen::MatrixXd table(static_cast<Eigen::Index>(report.iterations.size()), 3);
    for (std::size_t i = 0; i < report.iterations.size(); ++i) {
        table(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
        table(static_cast<Eigen::Index>(i), 1) =
            static_cast<double>(report.iterations[i].dimension);
        table(static_cast<Eigen::Index>(i), 2) = report.iterations[i].delta;
    }
    write_matrix_csv(ctx.out_dir / "prune_iterations.csv", table,
                     {"iteration", "dimension", "delta"});
    save_dictionary_dense(ctx.out_dir / "final_w.csv", report.final_w);
    clock.stop();
    write_manifest(ctx, "prune", clock,
                   {"prune_report.json", "prune_iterations.csv", "final_w.csv"});
}

void cmd_predict_error(const CommandContext& ctx,
                       const std::optional<fs::path>& dictionary_file) {
    StageClock clock;
    clock.start("load");
    const SnapshotData data = load_data(ctx);
    fs::path w_path = dictionary_file.value_or("dictionary.csv");
    if (w_path.is_relative()) w_path = ctx.out_dir / w_path;
    const Eigen::MatrixXd w_v = load_dictionary(w_path, data.count());
    require_exact_affordable(ctx, data.count(), "predict-error");
    clock.stop();

    clock.start("model");
    const ExactWorkspace ws =
        make_exact_workspace(data, ctx.config.kernel, ctx.config.exact.lambda_rel);
    const Eigen::MatrixXd w_kv = solve_koopman_image(ws, w_v);
    const GramTriple grams = gram_triple(w_v, w_kv, ws.k_xx, ws.k_txx);
    const KoopmanMatrix reduced =
        reduced_edmd_matrix(grams, w_v, ctx.config.exact.eig_threshold);
    std::vector<EigenPair> pairs = eigenpairs(reduced, data, ctx.config.kernel);
    if (ctx.config.predict.sort == "magnitude") {
        std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
            return std::abs(a.eigenvalue) > std::abs(b.eigenvalue);
        });
    }
    const EigenPair& leading = pairs.front();
    clock.stop();

    clock.start("error_map");
    const DiscreteSystem system = make_system(ctx.config);
    const Eigen::VectorXd errors = prediction_error_map(leading, system, data,
                                                        ctx.config.kernel,
                                                        ctx.config.predict.steps);
    clock.stop();

    clock.start("write");
    Eigen::MatrixXd table(data.count(), data.dim() + 1);
    table.leftCols(data.dim()) = data.x.transpose();
    table.rightCols(1) = errors;
    std::vector<std::string> headers;
    for (Eigen::Index k = 0; k < data.dim(); ++k) {
        headers.push_back("x" + std::to_string(k + 1));
    }
    headers.push_back("error");
    write_matrix_csv(ctx.out_dir / "predict_error.csv", table, headers);

    nlohmann::ordered_json summary;
    summary["eigenvalue"] = {{"re", leading.eigenvalue.real()},
                             {"im", leading.eigenvalue.imag()}};
    summary["steps"] = ctx.config.predict.steps;
    summary["dictionary_file"] = w_path.filename().string();
    summary["dictionary_dimension"] = w_v.cols();
    summary["max"] = errors.maxCoeff();
    summary["mean"] = errors.mean();
    summary["p95"] = percentile_95(errors);
    write_json_file(ctx.out_dir / "predict_error_summary.json", summary);
    clock.stop();
    write_manifest(ctx, "predict-error", clock,
                   {"predict_error.csv", "predict_error_summary.json"});
}

} // namespace kspv
