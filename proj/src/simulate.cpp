#include "zico/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "zico/error.hpp"
#include "zico/special.hpp"

namespace zico {
namespace {

bool w0_positive(SignConfig s) { return s == SignConfig::kPlusPlus || s == SignConfig::kPlusMinus; }
bool w1_positive(SignConfig s) { return s == SignConfig::kPlusPlus || s == SignConfig::kMinusPlus; }

SimParams sample_on(const DagGraph& graph, const Digraph& support0, const Digraph& support1,
                    const SimOptions& options, std::uint64_t seed) {
  if (options.family != Family::kZinb && options.family != Family::kZip)
    throw ParameterError("sample_params: simulation family must be ZINB or ZIP");
  if (!(options.dispersion > 0.0)) throw ParameterError("sample_params: dispersion must be positive");
  const std::size_t d = graph.node_count();
  SimParams sp;
  sp.graph = graph;
  sp.sign = options.sign;
  sp.ranges = options.ranges.value_or(WeightRanges::for_signs(options.sign));
  sp.family = options.family;
  sp.true_w0 = Matrix(d, d);
  sp.true_w1 = Matrix(d, d);
  if (sp.ranges.w0_low > sp.ranges.w0_high || sp.ranges.w1_low > sp.ranges.w1_high)
    throw ParameterError("sample_params: empty weight range");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w0_dist(sp.ranges.w0_low, sp.ranges.w0_high);
  std::uniform_real_distribution<double> w1_dist(sp.ranges.w1_low, sp.ranges.w1_high);
  for (const Edge& e : graph.edges()) {
    // Always draw both so that the supports do not shift the stream.
    const double a = w0_dist(rng);
    const double b = w1_dist(rng);
    if (support0.has_edge(e.parent, e.child)) sp.true_w0(e.parent, e.child) = a;
    if (support1.has_edge(e.parent, e.child)) sp.true_w1(e.parent, e.child) = b;
  }
  std::normal_distribution<double> gamma_dist(options.gamma_mean, options.gamma_sd);
  std::normal_distribution<double> delta_dist(options.delta_mean, options.delta_sd);
  sp.true_gamma.resize(d);
  sp.true_delta.resize(d);
  for (std::size_t j = 0; j < d; ++j) sp.true_gamma[j] = gamma_dist(rng);
  for (std::size_t j = 0; j < d; ++j) sp.true_delta[j] = delta_dist(rng);
  sp.true_r.assign(d, options.dispersion);
  return sp;
}

}  // namespace

std::string_view sign_config_name(SignConfig s) {
  switch (s) {
    case SignConfig::kPlusPlus: return "++";
    case SignConfig::kMinusMinus: return "--";
    case SignConfig::kPlusMinus: return "+-";
    case SignConfig::kMinusPlus: return "-+";
  }
  return "?";
}

SignConfig parse_sign_config(std::string_view name) {
  if (name == "++" || name == "pp") return SignConfig::kPlusPlus;
  if (name == "--" || name == "mm") return SignConfig::kMinusMinus;
  if (name == "+-" || name == "pm") return SignConfig::kPlusMinus;
  if (name == "-+" || name == "mp") return SignConfig::kMinusPlus;
  throw ParameterError("unknown sign configuration '" + std::string(name) + "'");
}

WeightRanges WeightRanges::for_signs(SignConfig s) {
  WeightRanges r;
  r.w0_low = w0_positive(s) ? 0.5 : -2.0;
  r.w0_high = w0_positive(s) ? 2.0 : -0.5;
  r.w1_low = w1_positive(s) ? 0.5 : -2.0;
  r.w1_high = w1_positive(s) ? 2.0 : -0.5;
  return r;
}

SimParams sample_params(const DagGraph& graph, const SimOptions& options, std::uint64_t seed) {
  const Digraph full = graph.digraph();
  return sample_on(graph, full, full, options, seed);
}

SimParams sample_params(const DagGraph& graph, const SupportMasks& masks, const SimOptions& options,
                        std::uint64_t seed) {
  const std::size_t d = graph.node_count();
  if (masks.m0.node_count() != d || masks.m1.node_count() != d)
    throw ParameterError("sample_params: mask size does not match graph");
  const Digraph full = graph.digraph();
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t j = 0; j < d; ++j)
      if ((masks.m0.has_edge(k, j) || masks.m1.has_edge(k, j)) && !full.has_edge(k, j))
        throw ParameterError("sample_params: mask edge outside the graph");
  return sample_on(graph, masks.m0, masks.m1, options, seed);
}

Dataset logic_sample(const SimParams& sp, std::size_t n, std::uint64_t seed, SampleReport* report) {
  if (n < 1) throw ParameterError("logic_sample: need n >= 1");
  const std::size_t d = sp.graph.node_count();
  Matrix x(n, d);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SampleReport local;
  for (const std::size_t j : sp.graph.topo_order()) {
    const std::vector<std::size_t> parents = sp.graph.parents(j);
    const double r = sp.true_r[j];
    for (std::size_t i = 0; i < n; ++i) {
      double a = sp.true_gamma[j];
      double b = sp.true_delta[j];
      for (const std::size_t k : parents) {
        a += x(i, k) * sp.true_w0(k, j);
        b += x(i, k) * sp.true_w1(k, j);
      }
      if (std::abs(b) > kSimMaxLogMean) {
        b = std::clamp(b, -kSimMaxLogMean, kSimMaxLogMean);
        ++local.clamped_predictors;
      }
      const double pi = special::sigmoid(a);
      if (!(unit(rng) < pi)) continue;  // structural zero
      const double mu = std::exp(b);
      double rate = mu;
      if (sp.family == Family::kZinb) {
        std::gamma_distribution<double> mix(r, mu / r);
        rate = mix(rng);
      }
      if (rate > 0.0) {
        std::poisson_distribution<long long> count(rate);
        x(i, j) = static_cast<double>(count(rng));
      }
    }
  }
  if (report) *report = local;
  return Dataset(std::move(x));
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ParameterError("percentile: no values");
  if (!(q >= 0.0 && q <= 100.0)) throw ParameterError("percentile: q must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = (static_cast<double>(values.size()) - 1.0) * q / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Dataset apply_dropout(const Dataset& x, const DropoutConfig& cfg) {
  if (!(cfg.slope > 0.0)) throw ParameterError("apply_dropout: slope must be positive");
  std::vector<double> z;
  z.reserve(x.x().size());
  for (double v : x.x().flat()) z.push_back(std::log1p(v));
  const double m = percentile(z, cfg.percentile);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix y = x.x();
  for (std::size_t idx = 0; idx < y.size(); ++idx) {
    const double keep = special::sigmoid(cfg.slope * (z[idx] - m));
    if (!(unit(rng) < keep)) y.data()[idx] = 0.0;
  }
  return Dataset(std::move(y), x.names());
}

}  // namespace zico
