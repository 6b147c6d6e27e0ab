#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kspv/dynamics.hpp"
#include "kspv/kernels.hpp"
#include "kspv/nystrom.hpp"

namespace kspv {

/// 17 significant digits: round-trips exactly, diffs stably.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Comma-separated, one header row, LF endings, format_double cells.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& matrix,
                      const std::vector<std::string>& headers);

struct CsvTable {
    std::vector<std::string> headers;
    Eigen::MatrixXd values;
};

CsvTable read_csv(const std::filesystem::path& path);

/// data.csv (row per sample: x then tx coordinates) + data_meta.json.
void save_snapshots(const std::filesystem::path& dir, const SnapshotData& data);
SnapshotData load_snapshots(const std::filesystem::path& dir);

/// Selection dictionaries store one center index per row under a
/// `center_index` header; dense dictionaries store N rows of w_1..w_s columns.
void save_dictionary_selection(const std::filesystem::path& path,
                               const std::vector<Eigen::Index>& centers);
void save_dictionary_dense(const std::filesystem::path& path, const Eigen::MatrixXd& w);

/// Reads either dictionary encoding, dispatching on the header row;
/// `row_count` is the dataset size N a selection expands against.
Eigen::MatrixXd load_dictionary(const std::filesystem::path& path, Eigen::Index row_count);

nlohmann::ordered_json kernel_to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const nlohmann::json& j);

void save_nystrom_model(const std::filesystem::path& dir, const NystromModel& model);
NystromModel load_nystrom_model(const std::filesystem::path& dir);

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of the file bytes, as a 16-digit hex string.
std::string file_digest(const std::filesystem::path& path);

} // namespace kspv
