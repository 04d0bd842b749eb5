#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "zico/graph.hpp"
#include "zico/matrix.hpp"
#include "zico/zi_models.hpp"

namespace zico {

// Signs of the nonzero entries of (W0, W1).
enum class SignConfig { kPlusPlus, kMinusMinus, kPlusMinus, kMinusPlus };

std::string_view sign_config_name(SignConfig s);  // "++", "--", "+-", "-+"
SignConfig parse_sign_config(std::string_view name);

struct WeightRanges {
  double w0_low = 0.5;
  double w0_high = 2.0;
  double w1_low = -2.0;
  double w1_high = -0.5;

  // Magnitudes in [0.5, 2] with the requested signs.
  static WeightRanges for_signs(SignConfig s);
};

struct SimOptions {
  SignConfig sign = SignConfig::kPlusMinus;
  std::optional<WeightRanges> ranges;  // default: WeightRanges::for_signs(sign)
  double gamma_mean = 1.5;
  double gamma_sd = 0.2;
  double delta_mean = 1.5;
  double delta_sd = 0.2;
  double dispersion = 5.0;
  Family family = Family::kZinb;  // ZINB or ZIP
};

struct SimParams {
  DagGraph graph;
  Matrix true_w0;
  Matrix true_w1;
  std::vector<double> true_gamma;
  std::vector<double> true_delta;
  std::vector<double> true_r;
  SignConfig sign = SignConfig::kPlusMinus;
  WeightRanges ranges;
  Family family = Family::kZinb;
};

// Uniform edge weights on the graph (or on the mask supports) and
// N(mean, sd^2) intercepts.
SimParams sample_params(const DagGraph& graph, const SimOptions& options, std::uint64_t seed);
SimParams sample_params(const DagGraph& graph, const SupportMasks& masks, const SimOptions& options,
                        std::uint64_t seed);

struct SampleReport {
  std::size_t clamped_predictors = 0;  // log-means clamped to +-30
};

// Ancestral sampling in topological order. The count component is drawn with
// probability pi = sigmoid(gamma + x w0); otherwise the cell is a structural
// zero. NB draws use the Gamma-Poisson mixture.
Dataset logic_sample(const SimParams& sp, std::size_t n, std::uint64_t seed,
                     SampleReport* report = nullptr);

inline constexpr double kSimMaxLogMean = 30.0;

struct DropoutConfig {
  double slope = 1.0;
  double percentile = 65.0;
  std::uint64_t seed = 0;
};

// q-th percentile with linear interpolation between order statistics
// (position (N - 1) q / 100).
double percentile(std::vector<double> values, double q);

// Y = X o B with b_ij ~ Bernoulli(sigmoid(slope (log(x_ij + 1) - m))).
Dataset apply_dropout(const Dataset& x, const DropoutConfig& cfg);

}  // namespace zico
