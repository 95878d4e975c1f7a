#pragma once

// File formats.
//
// Trajectory and tensor files are UTF-8 JSON documents:
//   {
//     "header": {"format_version": 1, "kind": "trajectory" | "tensors",
//                "dim": D, "dt": dt, "n_steps": n, "vectorization": "row-major",
//                "units": "dimensionless, hbar=1, energy in J"},
//     "model": {...},            // generating model parameters (optional)
//     ...payload...
//   }
// Matrices are arrays of rows, each row an array of [re, im] pairs.
//
// Kernel and sweep tables are comma-separated text; lines starting with '#'
// are comments and the last comment line names the columns. Numbers carry 17
// significant digits.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttm/generators.hpp"
#include "ttm/nz_kernel.hpp"
#include "ttm/transfer_tensor.hpp"

namespace ttm::io {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kUnits = "dimensionless, hbar=1, energy in J";
inline constexpr const char* kVectorization = "row-major";

using Json = nlohmann::ordered_json;

Json matrix_to_json(const Matrix& m);
/// `field` names the location for error messages.
Matrix matrix_from_json(const Json& j, const std::string& field);

struct TrajectoryFile {
    BasisTrajectorySet set;
    Json model = Json::object();
};

/// A single propagated trajectory with its run summary.
struct PropagatedFile {
    TimeGrid grid;
    Matrix initial;
    std::vector<Matrix> frames;
    Json model = Json::object();
    Json summary = Json::object();
};

struct TensorFile {
    TransferTensorSequence tensors;  // truncated at cutoff_k
    std::size_t learned_count = 0;
    std::string cutoff_policy;
    std::optional<double> truncation_error;  // ||T_{K+1}|| when available
    std::vector<double> markovianity_profile;
    Json model = Json::object();
};

Json to_json(const TrajectoryFile& f);
Json to_json(const PropagatedFile& f);
Json to_json(const TensorFile& f);

TrajectoryFile trajectory_from_json(const Json& j);
PropagatedFile propagated_from_json(const Json& j);
TensorFile tensors_from_json(const Json& j);

/// Reads and parses; JSON syntax errors become SchemaError with the byte offset.
Json read_json(const std::filesystem::path& path);

/// Returns the "kind" field of a parsed document's header.
std::string document_kind(const Json& j);

/// Writes to a temporary sibling file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
void write_json(const std::filesystem::path& path, const Json& j);

std::string format_number(double v);

/// Labels use 1-based indices, e.g. "12->21" for element (0,1) into (1,0).
std::string element_label_text(const ElementLabel& l);
ElementLabel parse_element_label(const std::string& text, Eigen::Index dim);

std::string format_kernel_table(const KernelTable& table);

struct SweepRow {
    double lambda = 0.0;
    double temperature = 0.0;  // k_B T in energy units
    double theta = 0.0;
    std::size_t settled_at = 0;
    double residual = 0.0;
    bool settled = true;
};

std::string format_sweep_table(const std::vector<SweepRow>& rows);

}  // namespace ttm::io
