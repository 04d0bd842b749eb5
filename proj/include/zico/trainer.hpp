#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zico/acyclicity.hpp"
#include "zico/graph.hpp"
#include "zico/matrix.hpp"
#include "zico/zi_models.hpp"

namespace zico {

enum class AlignNorm { kFrobenius, kL1, kNone };

std::string_view align_norm_name(AlignNorm a);
AlignNorm parse_align_norm(std::string_view name);  // "frobenius", "l1", "none"

struct TrainConfig {
  std::size_t epochs = 4000;
  double mu0 = 1.0;
  double alpha = 0.1;
  std::size_t decay_interval = 0;  // 0: epochs / 4
  double lambda_group = 0.001;
  std::size_t warm = 0;            // 0: epochs / 10
  double lambda_align = 0.1;
  AlignNorm align_norm = AlignNorm::kL1;
  AcyclicityMode acyclicity_mode = AcyclicityMode::kSeparate;
  double s = 1.0;
  double epsilon = 1e-8;
  std::size_t batch_size = 256;  // capped at n
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 1e-4;
  double clip_norm = 5.0;
  double threshold = 0.3;
  std::uint64_t seed = 0;

  std::size_t effective_decay_interval() const;
  std::size_t effective_warm() const;
  void validate() const;
};

// mu0 * alpha^floor(epoch / decay_interval)
double central_path_mu(std::size_t epoch, const TrainConfig& cfg);

// (lambda_group / 2) (1 - cos(min(1, t / warm) pi))
double lambda_eff(double epoch, const TrainConfig& cfg);

struct ObjectiveValue {
  double value = 0.0;
  double nll = 0.0;
  double group = 0.0;  // unweighted group norm sum
  double h0 = 0.0;     // h(W0), or h(pooled) in coupled mode
  double h1 = 0.0;     // h(W1); 0 in coupled mode for zero-inflated families
  double align = 0.0;  // already multiplied by lambda_align
  ParamGrads grads;
};

// mu (NLL_batch + lambda_eff sum_{k != j} ||(W0_kj, W1_kj)||_2) + h-terms + alignment.
// NB/Poisson drop W0, so the group norm becomes |W1_kj|, only h(W1) remains and
// the alignment term vanishes. Throws DomainError outside the log-det domain.
ObjectiveValue objective(const Dataset& x, const ModelParams& params,
                         std::span<const std::size_t> batch, const TrainConfig& cfg,
                         std::size_t epoch);

struct TraceRow {
  std::size_t epoch = 0;
  double objective = 0.0;  // batch-size weighted mean over the epoch
  double nll = 0.0;        // same weighting
  double h0 = 0.0;         // at the end of the epoch
  double h1 = 0.0;
  double mu = 0.0;
  double lambda_eff = 0.0;
};

struct FitResult {
  Family family = Family::kZinb;
  ModelParams params;  // final parameters; w0 is all zero for NB/Poisson
  std::vector<TraceRow> trace;
  double elapsed_seconds = 0.0;
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;   // updates dropped after 10 halvings
  std::size_t backtracks = 0;       // halvings over the whole run
  double max_post_clip_norm = 0.0;  // largest gradient norm after clipping
  TrainConfig config;
  // Set when training aborted; the trace holds the epochs completed so far.
  bool aborted = false;
  std::string abort_reason;

  const Matrix& w0() const { return params.w0; }
  const Matrix& w1() const { return params.w1; }
};

// Rescales g so that ||g||_2 <= max_norm. Returns the norm before clipping.
double clip_gradient_norm(std::span<double> g, double max_norm);

// Decoupled-weight-decay Adam over a flat parameter vector.
class AdamW {
 public:
  AdamW(std::size_t size, double beta1, double beta2, double eps, double weight_decay);

  // Advances the moment estimates with grad and returns the step direction
  // d, to be applied as theta -= lr * d.
  std::span<const double> direction(std::span<const double> theta, std::span<const double> grad);
  std::size_t step_count() const { return step_; }

 private:
  double beta1_;
  double beta2_;
  double eps_;
  double weight_decay_;
  std::size_t step_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
  std::vector<double> dir_;
};

// Mini-batched AdamW with clipping, the central-path schedule and the cosine
// group-penalty warm-up. Throws NumericalError on a NaN/Inf objective or more
// than 10 consecutive rejected steps (use fit_noexcept to keep the partial
// trace).
FitResult fit(const Dataset& x, Family family, const TrainConfig& cfg);
FitResult fit_noexcept(const Dataset& x, Family family, const TrainConfig& cfg);

// Edge k -> j iff |w(k, j)| > threshold. Not necessarily acyclic.
Digraph binarize(const Matrix& w, double threshold);

// Edge k -> j iff max(|w0(k, j)|, |w1(k, j)|) > threshold.
Digraph binarize_union(const Matrix& w0, const Matrix& w1, double threshold);

}  // namespace zico
