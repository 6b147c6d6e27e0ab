#include "kspv/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "kspv/errors.hpp"

namespace kspv {

namespace fs = std::filesystem;

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& matrix,
                      const std::vector<std::string>& headers) {
    if (static_cast<Eigen::Index>(headers.size()) != matrix.cols()) {
        throw DimensionMismatch("header count " + std::to_string(headers.size()) +
                                " does not match " + std::to_string(matrix.cols()) +
                                " columns");
    }
    std::ostringstream out;
    for (std::size_t j = 0; j < headers.size(); ++j) {
        if (j > 0) out << ',';
        out << headers[j];
    }
    out << '\n';
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_double(matrix(i, j));
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

CsvTable read_csv(const fs::path& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + " is empty");

    CsvTable table;
    {
        std::istringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) table.headers.push_back(cell);
    }
    if (table.headers.empty()) throw IoError(path.string() + " has an empty header row");

    std::vector<double> cells;
    Eigen::Index rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(fields, cell, ',')) {
            try {
                cells.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError("unparseable cell '" + cell + "' in " + path.string());
            }
            ++count;
        }
        if (count != table.headers.size()) {
            throw IoError("row width " + std::to_string(count) + " != header width " +
                          std::to_string(table.headers.size()) + " in " + path.string());
        }
        ++rows;
    }
    table.values.resize(rows, static_cast<Eigen::Index>(table.headers.size()));
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
            table.values(i, j) = cells[static_cast<std::size_t>(i * table.values.cols() + j)];
        }
    }
    return table;
}

void save_snapshots(const fs::path& dir, const SnapshotData& data) {
    const Eigen::Index n = data.dim();
    std::vector<std::string> headers;
    for (Eigen::Index k = 0; k < n; ++k) headers.push_back("x" + std::to_string(k + 1));
    for (Eigen::Index k = 0; k < n; ++k) headers.push_back("tx" + std::to_string(k + 1));

    Eigen::MatrixXd rows(data.count(), 2 * n);
    rows.leftCols(n) = data.x.transpose();
    rows.rightCols(n) = data.tx.transpose();
    write_matrix_csv(dir / "data.csv", rows, headers);

    nlohmann::ordered_json meta;
    meta["system"] = data.system_descriptor;
    meta["count"] = data.count();
    meta["dim"] = n;
    meta["seed"] = data.seed;
    auto box = nlohmann::ordered_json::array();
    for (Eigen::Index k = 0; k < data.domain_box.rows(); ++k) {
        box.push_back({data.domain_box(k, 0), data.domain_box(k, 1)});
    }
    meta["box"] = box;
    write_json_file(dir / "data_meta.json", meta);
}

SnapshotData load_snapshots(const fs::path& dir) {
    const nlohmann::json meta = read_json_file(dir / "data_meta.json");
    const CsvTable table = read_csv(dir / "data.csv");

    const auto n = meta.at("dim").get<Eigen::Index>();
    if (table.values.cols() != 2 * n) {
        throw IoError("data.csv has " + std::to_string(table.values.cols()) +
                      " columns, metadata dim " + std::to_string(n) + " implies " +
                      std::to_string(2 * n));
    }
    if (table.values.rows() != meta.at("count").get<Eigen::Index>()) {
        throw IoError("data.csv row count disagrees with metadata");
    }

    SnapshotData data;
    data.x = table.values.leftCols(n).transpose();
    data.tx = table.values.rightCols(n).transpose();
    data.seed = meta.at("seed").get<std::uint64_t>();
    data.system_descriptor = meta.at("system").get<std::string>();
    const auto& box = meta.at("box");
    data.domain_box.resize(static_cast<Eigen::Index>(box.size()), 2);
    for (Eigen::Index k = 0; k < data.domain_box.rows(); ++k) {
        data.domain_box(k, 0) = box[static_cast<std::size_t>(k)][0].get<double>();
        data.domain_box(k, 1) = box[static_cast<std::size_t>(k)][1].get<double>();
    }
    return data;
}

void save_dictionary_selection(const fs::path& path,
                               const std::vector<Eigen::Index>& centers) {
    Eigen::MatrixXd column(static_cast<Eigen::Index>(centers.size()), 1);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        column(static_cast<Eigen::Index>(i), 0) = static_cast<double>(centers[i]);
    }
    write_matrix_csv(path, column, {"center_index"});
}

void save_dictionary_dense(const fs::path& path, const Eigen::MatrixXd& w) {
    std::vector<std::string> headers;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        headers.push_back("w_" + std::to_string(j + 1));
    }
    write_matrix_csv(path, w, headers);
}

Eigen::MatrixXd load_dictionary(const fs::path& path, Eigen::Index row_count) {
    const CsvTable table = read_csv(path);
    if (table.headers.size() == 1 && table.headers[0] == "center_index") {
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(row_count, table.values.rows());
        for (Eigen::Index j = 0; j < table.values.rows(); ++j) {
            const auto idx = static_cast<Eigen::Index>(table.values(j, 0));
            if (idx < 0 || idx >= row_count) {
                throw IoError("center index " + std::to_string(idx) +
                              " outside dataset of size " + std::to_string(row_count));
            }
            w(idx, j) = 1.0;
        }
        return w;
    }
    if (table.values.rows() != row_count) {
        throw IoError("dense dictionary has " + std::to_string(table.values.rows()) +
                      " rows, expected " + std::to_string(row_count));
    }
    return table.values;
}

nlohmann::ordered_json kernel_to_json(const KernelSpec& spec) {
    nlohmann::ordered_json j;
    j["family"] = to_string(spec.family);
    j["shape"] = spec.shape;
    j["smoothness"] = spec.smoothness;
    return j;
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
    KernelSpec spec;
    if (j.contains("family")) {
        spec.family = kernel_family_from_string(j.at("family").get<std::string>());
    }
    if (j.contains("shape")) spec.shape = j.at("shape").get<double>();
    if (j.contains("smoothness")) spec.smoothness = j.at("smoothness").get<int>();
    validate(spec);
    return spec;
}

void save_nystrom_model(const fs::path& dir, const NystromModel& model) {
    std::vector<std::string> headers;
    for (Eigen::Index k = 0; k < model.landmarks.rows(); ++k) {
        headers.push_back("l" + std::to_string(k + 1));
    }
    write_matrix_csv(dir / "landmarks.csv", model.landmarks.transpose(), headers);

    nlohmann::ordered_json j;
    j["kernel"] = kernel_to_json(model.kernel);
    j["landmark_seed"] = model.landmark_seed;
    j["landmark_indices"] = model.landmark_indices;
    j["eig_threshold"] = model.eig_l.threshold_used;
    j["eigenvalues"] = std::vector<double>(
        model.eig_l.eigenvalues.data(),
        model.eig_l.eigenvalues.data() + model.eig_l.eigenvalues.size());
    auto vectors = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < model.eig_l.eigenvectors.cols(); ++c) {
        vectors.push_back(std::vector<double>(
            model.eig_l.eigenvectors.col(c).data(),
            model.eig_l.eigenvectors.col(c).data() + model.eig_l.eigenvectors.rows()));
    }
    j["eigenvectors"] = vectors;
    write_json_file(dir / "nystrom_model.json", j);
}

NystromModel load_nystrom_model(const fs::path& dir) {
    const nlohmann::json j = read_json_file(dir / "nystrom_model.json");
    const CsvTable landmarks = read_csv(dir / "landmarks.csv");

    NystromModel model;
    model.kernel = kernel_from_json(j.at("kernel"));
    model.landmark_seed = j.at("landmark_seed").get<std::uint64_t>();
    model.landmark_indices = j.at("landmark_indices").get<std::vector<Eigen::Index>>();
    model.landmarks = landmarks.values.transpose();

    const auto eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    model.eig_l.threshold_used = j.at("eig_threshold").get<double>();
    model.eig_l.rank = static_cast<Eigen::Index>(eigenvalues.size());
    model.eig_l.eigenvalues =
        Eigen::Map<const Eigen::VectorXd>(eigenvalues.data(),
                                          static_cast<Eigen::Index>(eigenvalues.size()));
    model.eig_l.eigenvectors.resize(model.landmarks.cols(), model.eig_l.rank);
    const auto& vectors = j.at("eigenvectors");
    for (Eigen::Index c = 0; c < model.eig_l.rank; ++c) {
        const auto column = vectors.at(static_cast<std::size_t>(c)).get<std::vector<double>>();
        if (static_cast<Eigen::Index>(column.size()) != model.landmarks.cols()) {
            throw IoError("eigenvector length does not match landmark count");
        }
        model.eig_l.eigenvectors.col(c) =
            Eigen::Map<const Eigen::VectorXd>(column.data(),
                                              static_cast<Eigen::Index>(column.size()));
    }
    return model;
}

void write_json_file(const fs::path& path, const nlohmann::ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json_file(const fs::path& path) {
    const std::string text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("cannot parse " + path.string() + ": " + e.what());
    }
}

std::string file_digest(const fs::path& path) {
    const std::string bytes = read_text_file(path);
    std::uint64_t hash = 14695981039346656037ULL;
    for (const unsigned char byte : bytes) {
        hash ^= byte;
        hash *= 1099511628211ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(hash));
    return buffer;
}

} // namespace kspv
