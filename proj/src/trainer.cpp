#include "zico/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "zico/error.hpp"
#include "zico/kernels.hpp"

namespace zico {
namespace {

constexpr int kMaxHalvings = 10;
constexpr std::size_t kMaxConsecutiveRejections = 10;

// Flat layout: w0 | w1 | gamma | delta | r_raw.
std::vector<double> pack(const ModelParams& p) {
  std::vector<double> out;
  const std::size_t d = p.d();
  out.reserve(2 * d * d + 3 * d);
  out.insert(out.end(), p.w0.flat().begin(), p.w0.flat().end());
  out.insert(out.end(), p.w1.flat().begin(), p.w1.flat().end());
  out.insert(out.end(), p.gamma.begin(), p.gamma.end());
  out.insert(out.end(), p.delta.begin(), p.delta.end());
  out.insert(out.end(), p.r_raw.begin(), p.r_raw.end());
  return out;
}

void unpack(std::span<const double> flat, ModelParams& p) {
  const std::size_t d = p.d();
  auto it = flat.begin();
  std::copy_n(it, d * d, p.w0.data());
  it += static_cast<std::ptrdiff_t>(d * d);
  std::copy_n(it, d * d, p.w1.data());
  it += static_cast<std::ptrdiff_t>(d * d);
  std::copy_n(it, d, p.gamma.begin());
  it += static_cast<std::ptrdiff_t>(d);
  std::copy_n(it, d, p.delta.begin());
  it += static_cast<std::ptrdiff_t>(d);
  std::copy_n(it, d, p.r_raw.begin());
}

// 1 for trainable coordinates, 0 for diagonals and blocks the family lacks.
std::vector<double> trainable_mask(Family family, std::size_t d) {
  ModelParams m = ModelParams::zeros(family, d);
  const double zero_part = has_zero_component(family) ? 1.0 : 0.0;
  m.w0.fill(zero_part);
  m.w0.zero_diagonal();
  m.w1.fill(1.0);
  m.w1.zero_diagonal();
  std::fill(m.gamma.begin(), m.gamma.end(), zero_part);
  std::fill(m.delta.begin(), m.delta.end(), 1.0);
  std::fill(m.r_raw.begin(), m.r_raw.end(), has_dispersion(family) ? 1.0 : 0.0);
  return pack(m);
}

// The coupled adjacency that h sees: pooled magnitudes without self-loops.
Matrix coupled_adjacency(const ModelParams& p, const TrainConfig& cfg) {
  Matrix pooled = pool_coupled(p.w0, p.w1, cfg.epsilon);
  pooled.zero_diagonal();
  return pooled;
}

bool params_in_domain(const ModelParams& p, const TrainConfig& cfg) {
  if (!has_zero_component(p.family)) return in_ldet_domain(p.w1, cfg.s);
  if (cfg.acyclicity_mode == AcyclicityMode::kCoupled)
    return in_ldet_domain(coupled_adjacency(p, cfg), cfg.s);
  return in_ldet_domain(p.w0, cfg.s) && in_ldet_domain(p.w1, cfg.s);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::string_view align_norm_name(AlignNorm a) {
  switch (a) {
    case AlignNorm::kFrobenius: return "frobenius";
    case AlignNorm::kL1: return "l1";
    case AlignNorm::kNone: return "none";
  }
  return "?";
}

AlignNorm parse_align_norm(std::string_view name) {
  if (name == "frobenius" || name == "fro") return AlignNorm::kFrobenius;
  if (name == "l1") return AlignNorm::kL1;
  if (name == "none") return AlignNorm::kNone;
  throw ParameterError("unknown alignment norm '" + std::string(name) + "'");
}

std::size_t TrainConfig::effective_decay_interval() const {
  if (decay_interval > 0) return decay_interval;
  return std::max<std::size_t>(1, epochs / 4);
}

std::size_t TrainConfig::effective_warm() const {
  if (warm > 0) return warm;
  return std::max<std::size_t>(1, epochs / 10);
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ParameterError("epochs must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (!(mu0 > 0.0)) throw ParameterError("mu0 must be positive");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (!(lambda_group >= 0.0)) throw ParameterError("lambda_group must be >= 0");
  if (!(lambda_align >= 0.0)) throw ParameterError("lambda_align must be >= 0");
  if (!(threshold >= 0.0)) throw ParameterError("threshold must be >= 0");
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
  if (!(clip_norm > 0.0)) throw ParameterError("clip_norm must be positive");
  AcyclicityConfig{s, acyclicity_mode, epsilon}.validate();
}

double central_path_mu(std::size_t epoch, const TrainConfig& cfg) {
  const std::size_t stage = epoch / cfg.effective_decay_interval();
  return cfg.mu0 * std::pow(cfg.alpha, static_cast<double>(stage));
}

double lambda_eff(double epoch, const TrainConfig& cfg) {
  const double progress = std::min(1.0, epoch / static_cast<double>(cfg.effective_warm()));
  if (progress >= 1.0) return cfg.lambda_group;
  return 0.5 * cfg.lambda_group * (1.0 - std::cos(progress * std::numbers::pi));
}

ObjectiveValue objective(const Dataset& x, const ModelParams& params,
                         std::span<const std::size_t> batch, const TrainConfig& cfg,
                         std::size_t epoch) {
  const double mu = central_path_mu(epoch, cfg);
  const double lam = lambda_eff(static_cast<double>(epoch), cfg);
  const bool zero_part = has_zero_component(params.family);
  const std::size_t d = params.d();

  NllAndGrad base = nll_and_grad(x, params, batch);
  ObjectiveValue out;
  out.nll = base.nll;
  out.grads = std::move(base.grads);
  ParamGrads& g = out.grads;

  // Everything inside mu(...) first: NLL gradient plus the group penalty.
  Matrix group_w0(d, d);
  Matrix group_w1(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      if (k == j) continue;
      const double b = params.w1(k, j);
      if (zero_part) {
        const double a = params.w0(k, j);
        const double norm = std::hypot(a, b);
        out.group += norm;
        if (norm > 0.0) {
          group_w0(k, j) = a / norm;
          group_w1(k, j) = b / norm;
        }
      } else {
        out.group += std::abs(b);
        group_w1(k, j) = b > 0.0 ? 1.0 : (b < 0.0 ? -1.0 : 0.0);
      }
    }
  }
  const auto& kern = kernels::active();
  if (zero_part) kern.axpy(lam, group_w0.data(), g.w0.data(), g.w0.size());
  kern.axpy(lam, group_w1.data(), g.w1.data(), g.w1.size());
  kern.scale(g.w0.data(), g.w0.size(), mu);
  kern.scale(g.w1.data(), g.w1.size(), mu);
  for (auto* block : {&g.gamma, &g.delta, &g.r_raw})
    for (double& v : *block) v *= mu;
  out.value = mu * (out.nll + lam * out.group);

  // Acyclicity.
  if (!zero_part) {
    HValue h1 = h_ldet_value_grad(params.w1, cfg.s);
    out.h1 = h1.value;
    kern.axpy(1.0, h1.grad.data(), g.w1.data(), g.w1.size());
  } else if (cfg.acyclicity_mode == AcyclicityMode::kCoupled) {
    CoupledHValue h = h_coupled_value_grad(params.w0, params.w1, cfg.s, cfg.epsilon);
    out.h0 = h.value;
    kern.axpy(1.0, h.grad_w0.data(), g.w0.data(), g.w0.size());
    kern.axpy(1.0, h.grad_w1.data(), g.w1.data(), g.w1.size());
  } else {
    HValue h0 = h_ldet_value_grad(params.w0, cfg.s);
    HValue h1 = h_ldet_value_grad(params.w1, cfg.s);
    out.h0 = h0.value;
    out.h1 = h1.value;
    kern.axpy(1.0, h0.grad.data(), g.w0.data(), g.w0.size());
    kern.axpy(1.0, h1.grad.data(), g.w1.data(), g.w1.size());
  }
  out.value += out.h0 + out.h1;

  // Alignment between W0 and W1.
  if (zero_part && cfg.align_norm != AlignNorm::kNone && cfg.lambda_align > 0.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < params.w0.size(); ++i) {
      const double diff = params.w0.data()[i] - params.w1.data()[i];
      double dg = 0.0;
      if (cfg.align_norm == AlignNorm::kFrobenius) {
        acc += diff * diff;
        dg = 2.0 * diff;
      } else {
        acc += std::abs(diff);
        dg = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      }
      g.w0.data()[i] += cfg.lambda_align * dg;
      g.w1.data()[i] -= cfg.lambda_align * dg;
    }
    out.align = cfg.lambda_align * acc;
    out.value += out.align;
  }
  g.w0.zero_diagonal();
  g.w1.zero_diagonal();
  return out;
}

double clip_gradient_norm(std::span<double> g, double max_norm) {
  const auto& kern = kernels::active();
  const double norm = std::sqrt(kern.sum_squares(g.data(), g.size()));
  if (norm > max_norm && norm > 0.0) kern.scale(g.data(), g.size(), max_norm / norm);
  return norm;
}

AdamW::AdamW(std::size_t size, double beta1, double beta2, double eps, double weight_decay)
    : beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      weight_decay_(weight_decay),
      m_(size, 0.0),
      v_(size, 0.0),
      dir_(size, 0.0) {}

std::span<const double> AdamW::direction(std::span<const double> theta, std::span<const double> grad) {
  if (theta.size() != m_.size() || grad.size() != m_.size())
    throw ParameterError("AdamW: size mismatch");
  ++step_;
  const double t = static_cast<double>(step_);
  const kernels::AdamWCoefficients c{0.0,
                                     beta1_,
                                     beta2_,
                                     eps_,
                                     weight_decay_,
                                     1.0 - std::pow(beta1_, t),
                                     1.0 - std::pow(beta2_, t)};
  kernels::active().adamw_direction(theta.data(), grad.data(), m_.data(), v_.data(), dir_.data(),
                                    m_.size(), c);
  return dir_;
}

FitResult fit(const Dataset& x, Family family, const TrainConfig& cfg) {
  FitResult result = fit_noexcept(x, family, cfg);
  if (result.aborted) throw NumericalError(result.abort_reason);
  return result;
}

FitResult fit_noexcept(const Dataset& x, Family family, const TrainConfig& cfg) {
  cfg.validate();
  if (x.n() == 0 || x.d() == 0) throw ParameterError("fit: empty dataset");
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = x.n();
  const std::size_t d = x.d();
  const std::size_t batch_size = std::min(cfg.batch_size, n);

  FitResult result;
  result.family = family;
  result.config = cfg;
  result.params = init_params(x, family);
  ModelParams& params = result.params;
  ModelParams trial = params;

  std::vector<double> theta = pack(params);
  const std::vector<double> mask = trainable_mask(family, d);
  std::vector<double> candidate(theta.size());
  std::vector<double> direction(theta.size());
  AdamW optimizer(theta.size(), cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.weight_decay);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order = all_rows(n);
  std::size_t consecutive_rejections = 0;
  result.trace.reserve(cfg.epochs);

  auto abort_with = [&](std::string reason) {
    result.aborted = true;
    result.abort_reason = std::move(reason);
    const auto stopped = std::chrono::steady_clock::now();
    result.elapsed_seconds = std::chrono::duration<double>(stopped - started).count();
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    TraceRow row;
    row.epoch = epoch;
    row.mu = central_path_mu(epoch, cfg);
    row.lambda_eff = lambda_eff(static_cast<double>(epoch), cfg);

    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t stop = std::min(n, start + batch_size);
      const std::span<const std::size_t> batch(order.data() + start, stop - start);
      const double weight = static_cast<double>(batch.size()) / static_cast<double>(n);

      ObjectiveValue obj = objective(x, params, batch, cfg, epoch);
      std::vector<double> grad = pack(obj.grads);
      if (!std::isfinite(obj.value) || !all_finite(grad)) {
        std::ostringstream msg;
        msg << "non-finite objective at epoch " << epoch << " (value " << obj.value << ", nll "
            << obj.nll << ", h0 " << obj.h0 << ", h1 " << obj.h1 << ")";
        abort_with(msg.str());
        return result;
      }
      row.objective += weight * obj.value;
      row.nll += weight * obj.nll;

      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= mask[i];
      clip_gradient_norm(grad, cfg.clip_norm);
      result.max_post_clip_norm = std::max(
          result.max_post_clip_norm, std::sqrt(kernels::active().sum_squares(grad.data(), grad.size())));

      const auto dir = optimizer.direction(theta, grad);
      for (std::size_t i = 0; i < dir.size(); ++i) direction[i] = dir[i] * mask[i];
      ++result.steps;

      // Backtrack until the update stays inside the log-det domain.
      bool accepted = false;
      double lr = cfg.learning_rate;
      for (int halving = 0; halving <= kMaxHalvings; ++halving) {
        candidate = theta;
        kernels::active().axpy(-lr, direction.data(), candidate.data(), candidate.size());
        unpack(candidate, trial);
        if (params_in_domain(trial, cfg)) {
          accepted = true;
          break;
        }
        ++result.backtracks;
        lr *= 0.5;
      }
      if (accepted) {
        theta.swap(candidate);
        std::swap(params, trial);
        consecutive_rejections = 0;
      } else {
        ++result.rejected_steps;
        if (++consecutive_rejections > kMaxConsecutiveRejections) {
          abort_with("more than 10 consecutive steps rejected by the acyclicity domain check");
          return result;
        }
      }
    }

    if (has_zero_component(family)) {
      if (cfg.acyclicity_mode == AcyclicityMode::kCoupled) {
        row.h0 = h_ldet(coupled_adjacency(params, cfg), cfg.s);
      } else {
        row.h0 = h_ldet(params.w0, cfg.s);
        row.h1 = h_ldet(params.w1, cfg.s);
      }
    } else {
      row.h1 = h_ldet(params.w1, cfg.s);
    }
    result.trace.push_back(row);
  }

  const auto stopped = std::chrono::steady_clock::now();
  result.elapsed_seconds = std::chrono::duration<double>(stopped - started).count();
  return result;
}

Digraph binarize(const Matrix& w, double threshold) {
  if (!w.square()) throw ParameterError("binarize: matrix must be square");
  Digraph g(w.rows());
  for (std::size_t k = 0; k < w.rows(); ++k)
    for (std::size_t j = 0; j < w.cols(); ++j)
      if (k != j && std::abs(w(k, j)) > threshold) g.set_edge(k, j);
  return g;
}

Digraph binarize_union(const Matrix& w0, const Matrix& w1, double threshold) {
  if (w0.rows() != w1.rows() || w0.cols() != w1.cols())
    throw ParameterError("binarize_union: shape mismatch");
  Digraph g(w1.rows());
  for (std::size_t k = 0; k < w1.rows(); ++k)
    for (std::size_t j = 0; j < w1.cols(); ++j)
      if (k != j && std::max(std::abs(w0(k, j)), std::abs(w1(k, j))) > threshold) g.set_edge(k, j);
  return g;
}

}  // namespace zico
