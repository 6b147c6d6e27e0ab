#include "kspv/config.hpp"

#include <algorithm>
#include <cctype>

#include "kspv/errors.hpp"
#include "kspv/io.hpp"

extern char** environ;

namespace kspv {

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
    if (!j.is_object()) {
        throw ConfigError(context + " must be a JSON object");
    }
    for (const auto& item : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return item.key() == k;
            }) == allowed.end()) {
            throw ConfigError("unknown config key '" + item.key() + "' in " + context);
        }
    }
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& context) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(context + " must be a nonempty array of rows");
    }
    const std::size_t cols = j[0].size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()),
                      static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols) {
            throw ConfigError(context + " rows must all have the same length");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                j[i][c].get<double>();
        }
    }
    return m;
}

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

ExperimentConfig default_config() {
    ExperimentConfig config;
    config.system.box.resize(2, 2);
    config.system.box << -2.0, 2.0, -2.0, 2.0;
    return config;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig config = default_config();
    check_keys(j,
               {"system", "data", "kernel", "dictionary", "exact", "nystrom", "prune",
                "predict", "output"},
               "config");

    if (j.contains("system")) {
        const auto& s = j.at("system");
        check_keys(s, {"name", "dt", "matrix", "box"}, "system");
        if (s.contains("name")) config.system.name = s.at("name").get<std::string>();
        if (s.contains("dt")) config.system.dt = s.at("dt").get<double>();
        if (s.contains("matrix")) {
            config.system.matrix = matrix_from_json(s.at("matrix"), "system.matrix");
        }
        if (s.contains("box")) {
            config.system.box = matrix_from_json(s.at("box"), "system.box");
        }
    }
    if (j.contains("data")) {
        const auto& d = j.at("data");
        check_keys(d, {"count", "seed"}, "data");
        if (d.contains("count")) config.data.count = d.at("count").get<Eigen::Index>();
        if (d.contains("seed")) config.data.seed = d.at("seed").get<std::uint64_t>();
    }
    if (j.contains("kernel")) {
        check_keys(j.at("kernel"), {"family", "shape", "smoothness"}, "kernel");
        config.kernel = kernel_from_json(j.at("kernel"));
    }
    if (j.contains("dictionary")) {
        const auto& d = j.at("dictionary");
        check_keys(d, {"size", "seed"}, "dictionary");
        if (d.contains("size")) config.dictionary.size = d.at("size").get<Eigen::Index>();
        if (d.contains("seed")) config.dictionary.seed = d.at("seed").get<std::uint64_t>();
    }
    if (j.contains("exact")) {
        const auto& e = j.at("exact");
        check_keys(e, {"lambda_rel", "eig_threshold", "cosine_slack", "n_cap"}, "exact");
        if (e.contains("lambda_rel")) config.exact.lambda_rel = e.at("lambda_rel").get<double>();
        if (e.contains("eig_threshold")) {
            config.exact.eig_threshold = e.at("eig_threshold").get<double>();
        }
        if (e.contains("cosine_slack")) {
            config.exact.cosine_slack = e.at("cosine_slack").get<double>();
        }
        if (e.contains("n_cap")) config.exact.n_cap = e.at("n_cap").get<Eigen::Index>();
    }
    if (j.contains("nystrom")) {
        const auto& n = j.at("nystrom");
        check_keys(n,
                   {"d_list", "landmark_seed", "landmark_seed_count", "lambda_rel", "c_v",
                    "c_kv", "landmark_eig_threshold", "cosine_slack", "prune_d"},
                   "nystrom");
        if (n.contains("d_list")) {
            config.nystrom.d_list = n.at("d_list").get<std::vector<Eigen::Index>>();
        }
        if (n.contains("landmark_seed")) {
            config.nystrom.landmark_seed = n.at("landmark_seed").get<std::uint64_t>();
        }
        if (n.contains("landmark_seed_count")) {
            config.nystrom.landmark_seed_count = n.at("landmark_seed_count").get<int>();
        }
        if (n.contains("lambda_rel")) {
            config.nystrom.lambda_rel = n.at("lambda_rel").get<double>();
        }
        if (n.contains("c_v")) config.nystrom.c_v = n.at("c_v").get<double>();
        if (n.contains("c_kv")) config.nystrom.c_kv = n.at("c_kv").get<double>();
        if (n.contains("landmark_eig_threshold")) {
            config.nystrom.landmark_eig_threshold =
                n.at("landmark_eig_threshold").get<double>();
        }
        if (n.contains("cosine_slack")) {
            config.nystrom.cosine_slack = n.at("cosine_slack").get<double>();
        }
        if (n.contains("prune_d")) {
            config.nystrom.prune_d = n.at("prune_d").get<Eigen::Index>();
        }
    }
    if (j.contains("prune")) {
        const auto& p = j.at("prune");
        check_keys(p, {"epsilon", "mode", "max_iterations"}, "prune");
        if (p.contains("epsilon")) config.prune.epsilon = p.at("epsilon").get<double>();
        if (p.contains("mode")) config.prune.mode = p.at("mode").get<std::string>();
        if (p.contains("max_iterations")) {
            config.prune.max_iterations = p.at("max_iterations").get<Eigen::Index>();
        }
    }
    if (j.contains("predict")) {
        const auto& p = j.at("predict");
        check_keys(p, {"steps", "sort"}, "predict");
        if (p.contains("steps")) config.predict.steps = p.at("steps").get<int>();
        if (p.contains("sort")) config.predict.sort = p.at("sort").get<std::string>();
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        check_keys(o, {"dir"}, "output");
        if (o.contains("dir")) config.out_dir = o.at("dir").get<std::string>();
    }

    validate_config(config);
    return config;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& config) {
    nlohmann::ordered_json j;
    j["system"]["name"] = config.system.name;
    j["system"]["dt"] = config.system.dt;
    if (config.system.matrix.size() > 0) {
        j["system"]["matrix"] = matrix_to_json(config.system.matrix);
    }
    j["system"]["box"] = matrix_to_json(config.system.box);
    j["data"]["count"] = config.data.count;
    j["data"]["seed"] = config.data.seed;
    j["kernel"] = kernel_to_json(config.kernel);
    j["dictionary"]["size"] = config.dictionary.size;
    j["dictionary"]["seed"] = config.dictionary.seed;
    j["exact"]["lambda_rel"] = config.exact.lambda_rel;
    j["exact"]["eig_threshold"] = config.exact.eig_threshold;
    j["exact"]["cosine_slack"] = config.exact.cosine_slack;
    j["exact"]["n_cap"] = config.exact.n_cap;
    j["nystrom"]["d_list"] = config.nystrom.d_list;
    j["nystrom"]["landmark_seed"] = config.nystrom.landmark_seed;
    j["nystrom"]["landmark_seed_count"] = config.nystrom.landmark_seed_count;
    j["nystrom"]["lambda_rel"] = config.nystrom.lambda_rel;
    j["nystrom"]["c_v"] = config.nystrom.c_v;
    j["nystrom"]["c_kv"] = config.nystrom.c_kv;
    j["nystrom"]["landmark_eig_threshold"] = config.nystrom.landmark_eig_threshold;
    j["nystrom"]["cosine_slack"] = config.nystrom.cosine_slack;
    j["nystrom"]["prune_d"] = config.nystrom.prune_d;
    j["prune"]["epsilon"] = config.prune.epsilon;
    j["prune"]["mode"] = config.prune.mode;
    j["prune"]["max_iterations"] = config.prune.max_iterations;
    j["predict"]["steps"] = config.predict.steps;
    j["predict"]["sort"] = config.predict.sort;
    j["output"]["dir"] = config.out_dir;
    return j;
}

void apply_env_overrides(nlohmann::json& j, const std::string& prefix) {
    for (char** entry = environ; entry != nullptr && *entry != nullptr; ++entry) {
        const std::string pair(*entry);
        if (pair.rfind(prefix, 0) != 0) continue;
        const auto eq = pair.find('=');
        if (eq == std::string::npos) continue;

        std::string key = pair.substr(prefix.size(), eq - prefix.size());
        // overrides follow PREFIX<SECTION>__<KEY>; prefixed names without the
        // separator belong to other tooling and are not override attempts
        if (key.find("__") == std::string::npos) continue;
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        const std::string value = pair.substr(eq + 1);

        nlohmann::json* node = &j;
        std::size_t start = 0;
        while (true) {
            const std::size_t sep = key.find("__", start);
            const std::string part = key.substr(start, sep - start);
            if (part.empty()) throw ConfigError("malformed override variable " + pair);
            if (sep == std::string::npos) {
                nlohmann::json parsed =
                    nlohmann::json::parse(value, nullptr, false);
                (*node)[part] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
                break;
            }
            node = &(*node)[part];
            start = sep + 2;
        }
    }
}

ExperimentConfig resolve_config(const std::optional<std::filesystem::path>& path) {
    nlohmann::json raw = nlohmann::json::object();
    if (path) raw = read_json_file(*path);
    apply_env_overrides(raw);
    return config_from_json(raw);
}

void validate_config(const ExperimentConfig& config) {
    if (config.system.name != "duffing" && config.system.name != "identity" &&
        config.system.name != "linear") {
        throw ConfigError("unknown system '" + config.system.name + "'");
    }
    if (config.system.name == "linear" && config.system.matrix.size() == 0) {
        throw ConfigError("linear system requires system.matrix");
    }
    if (config.system.box.cols() != 2 || config.system.box.rows() < 1) {
        throw ConfigError("system.box must be n×2");
    }
    if (config.data.count < 1) throw ConfigError("data.count must be positive");
    if (config.dictionary.size < 1) throw ConfigError("dictionary.size must be positive");
    if (config.exact.n_cap < 1) throw ConfigError("exact.n_cap must be positive");
    if (config.prune.epsilon < 0.0 || config.prune.epsilon >= 1.0) {
        throw ConfigError("prune.epsilon must lie in [0, 1)");
    }
    if (config.prune.mode != "exact" && config.prune.mode != "approximate") {
        throw ConfigError("prune.mode must be 'exact' or 'approximate'");
    }
    if (config.prune.max_iterations < 0) {
        throw ConfigError("prune.max_iterations must be nonnegative");
    }
    if (config.predict.steps < 1) throw ConfigError("predict.steps must be at least 1");
    if (config.predict.sort != "unit_distance" && config.predict.sort != "magnitude") {
        throw ConfigError("predict.sort must be 'unit_distance' or 'magnitude'");
    }
    if (config.nystrom.landmark_seed_count < 1) {
        throw ConfigError("nystrom.landmark_seed_count must be positive");
    }
    for (const Eigen::Index d : config.nystrom.d_list) {
        if (d < 1) throw ConfigError("nystrom.d_list entries must be positive");
    }
    if (config.nystrom.prune_d < 1) throw ConfigError("nystrom.prune_d must be positive");
    validate(config.kernel);
}

DiscreteSystem make_system(const ExperimentConfig& config) {
    const auto dim = static_cast<int>(config.system.box.rows());
    if (config.system.name == "duffing") {
        if (dim != 2) throw ConfigError("the Duffing system is two-dimensional");
        return duffing_system(config.system.dt);
    }
    if (config.system.name == "identity") return identity_system(dim);
    if (config.system.matrix.rows() != dim || config.system.matrix.cols() != dim) {
        throw ConfigError("system.matrix must be " + std::to_string(dim) + "×" +
                          std::to_string(dim) + " to match system.box");
    }
    return linear_system(config.system.matrix);
}

} // namespace kspv
