#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "zico/graph.hpp"
#include "zico/matrix.hpp"
#include "zico/simulate.hpp"
#include "zico/trainer.hpp"
#include "zico/zi_models.hpp"

namespace zico::io {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// Counts CSV: header row of column names, one sample per row.
void write_dataset_csv(std::ostream& out, const Dataset& x);
Dataset read_dataset_csv(std::istream& in);

// Dense matrix CSV without header.
void write_matrix_csv(std::ostream& out, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);

nlohmann::json params_to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const TrainConfig& cfg);
// Keys absent from j keep the value already in cfg.
void merge_config_json(const nlohmann::json& j, TrainConfig& cfg);

nlohmann::json sim_to_json(const SimParams& sp, std::size_t n, std::uint64_t seed);

void write_trace_csv(std::ostream& out, const FitResult& r);

// Writes w0.csv (zero-inflated families only), w1.csv, trace.csv and fit.json.
void write_fit_result(const std::filesystem::path& dir, const FitResult& r);

// Whole-file helpers. Writes go to a temporary sibling and are renamed into
// place. Failures throw IoError.
std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

Dataset load_dataset(const std::filesystem::path& path);
Matrix load_matrix(const std::filesystem::path& path);
DagGraph load_edge_list(const std::filesystem::path& path);

}  // namespace zico::io
