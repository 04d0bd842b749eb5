#pragma once

// Simulate -> fit -> evaluate pipelines shared by the CLI and the acceptance
// suite.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zico/graph.hpp"
#include "zico/metrics.hpp"
#include "zico/simulate.hpp"
#include "zico/trainer.hpp"

namespace zico {

enum class GraphModel { kEr, kBa };

std::string_view graph_model_name(GraphModel g);
GraphModel parse_graph_model(std::string_view name);  // "er", "ba"

// Everything that determines one simulated dataset except the replicate seed.
struct DataSpec {
  GraphModel graph = GraphModel::kEr;
  std::size_t d = 20;
  std::size_t n = 500;
  double er_p = 0.25;
  std::size_t ba_m = 3;
  SimOptions sim;
  std::optional<double> rho;  // split W0/W1 supports when set
  bool dropout = false;
  double dropout_slope = 1.0;
  double dropout_percentile = 65.0;
};

struct Replicate {
  std::uint64_t seed = 0;
  DagGraph graph;
  std::optional<SupportMasks> masks;
  SimParams sim;
  Dataset data;
  std::optional<Dataset> dropout_data;
  SampleReport report;

  // The matrix a learner should see: the dropout copy when present.
  const Dataset& training_data() const { return dropout_data ? *dropout_data : data; }
};

// Deterministic per seed. Independent sub-seeds are derived for the graph,
// the parameters, the masks, the samples and the dropout mask.
Replicate simulate_replicate(const DataSpec& spec, std::uint64_t seed);

// Binarizes at cfg.threshold (union of |W0| and |W1|) and scores edges with
// the pooled magnitudes.
EvalReport evaluate_fit(const FitResult& fit, const Digraph& truth, double threshold);

struct GridSpec {
  DataSpec data;
  std::vector<GraphModel> graphs{GraphModel::kEr};
  std::vector<SignConfig> signs{SignConfig::kPlusMinus};
  std::vector<std::optional<double>> rhos{std::nullopt};
  std::vector<Family> families{Family::kZinb};
  std::vector<double> lambda_groups;      // empty: base.lambda_group
  std::vector<double> lambda_aligns;      // empty: base.lambda_align
  std::vector<AlignNorm> align_norms;     // empty: base.align_norm
  std::vector<AcyclicityMode> modes;      // empty: base.acyclicity_mode
  TrainConfig base;
  std::size_t replicates = 5;
  std::uint64_t seed_base = 1;
  std::size_t jobs = 1;
  bool record_timing = true;  // false writes NA for seconds (byte-stable output)
};

struct GridCell {
  std::size_t config_id = 0;
  GraphModel graph = GraphModel::kEr;
  SignConfig sign = SignConfig::kPlusMinus;
  std::optional<double> rho;
  Family family = Family::kZinb;
  TrainConfig cfg;
};

struct ResultRow {
  std::size_t config_id = 0;
  std::size_t replicate = 0;
  GridCell cell;
  EvalReport eval;
  double seconds = 0.0;
  std::string status = "ok";  // or the failure message
};

// Cartesian product of the grid axes, in a fixed order.
std::vector<GridCell> expand_grid(const GridSpec& grid);

GridSpec grid_from_json(const nlohmann::json& j);

// Runs every cell and replicate; up to grid.jobs fits run concurrently. Rows
// come back ordered by (config_id, replicate). Failures are recorded in the
// row's status and the run continues.
std::vector<ResultRow> run_grid(const GridSpec& grid,
                                const std::function<void(const ResultRow&)>& on_row = {});

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool record_timing);
// Mean and sd per config_id.
void write_summary_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool record_timing);

}  // namespace zico
