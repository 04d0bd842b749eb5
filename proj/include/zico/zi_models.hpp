#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zico/matrix.hpp"

namespace zico {

enum class Family { kZinb, kZip, kNb, kPoisson };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);  // "zinb", "zip", "nb", "poisson"

// ZINB and ZIP carry a zero-inflation component (W0, gamma).
constexpr bool has_zero_component(Family f) { return f == Family::kZinb || f == Family::kZip; }
// ZINB and NB carry a dispersion r.
constexpr bool has_dispersion(Family f) { return f == Family::kZinb || f == Family::kNb; }

// n x d matrix of nonnegative integer counts. Construction validates the
// entries, so every Dataset in circulation is a valid count matrix.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Matrix counts, std::vector<std::string> names = {});

  const Matrix& x() const { return x_; }
  std::size_t n() const { return x_.rows(); }
  std::size_t d() const { return x_.cols(); }
  const std::vector<std::string>& names() const { return names_; }
  double operator()(std::size_t i, std::size_t j) const { return x_(i, j); }

 private:
  Matrix x_;
  std::vector<std::string> names_;
};

// Column j of w0 / w1 holds the coefficients of node j, so w(k, j) is the
// weight of edge k -> j. Dispersion is r_j = softplus(r_raw_j).
struct ModelParams {
  Family family = Family::kZinb;
  Matrix w0;
  Matrix w1;
  std::vector<double> gamma;
  std::vector<double> delta;
  std::vector<double> r_raw;

  static ModelParams zeros(Family family, std::size_t d);
  std::size_t d() const { return w1.rows(); }
  double dispersion(std::size_t j) const;
  // Throws ParameterError if shapes disagree or a diagonal entry is nonzero.
  void validate() const;
};

// Gradients share the parameter layout.
using ParamGrads = ModelParams;

// |rows| x d link values. p is the NB success probability r / (r + mu).
struct LinkValues {
  Matrix pi;
  Matrix mu;
  Matrix p;
};

struct LogLik {
  double total = 0.0;
  Matrix per_cell;  // |rows| x d
};

struct NllAndGrad {
  double nll = 0.0;
  ParamGrads grads;
};

std::vector<std::size_t> all_rows(std::size_t n);

LinkValues compute_links(const Dataset& x, const ModelParams& params,
                         std::span<const std::size_t> rows);

LogLik log_lik_zinb(const Dataset& x, const ModelParams& params, std::span<const std::size_t> rows);
LogLik log_lik_zip(const Dataset& x, const ModelParams& params, std::span<const std::size_t> rows);
// NB or Poisson.
LogLik log_lik_reduced(const Dataset& x, const ModelParams& params,
                       std::span<const std::size_t> rows);
// Dispatches on params.family.
LogLik log_lik(const Dataset& x, const ModelParams& params, std::span<const std::size_t> rows);

// nll = -(1/|rows|) sum_{i in rows} sum_j l_ij, with its gradient for every
// parameter block. Blocks the family does not use get zero gradient.
NllAndGrad nll_and_grad(const Dataset& x, const ModelParams& params,
                        std::span<const std::size_t> rows);

// Zero weights; intercepts matched to column moments; r = 1.
ModelParams init_params(const Dataset& x, Family family);

namespace detail {

// Log-likelihood of one cell and its derivatives with respect to the zero
// logit a, the log-mean b and the dispersion r.
struct CellTerms {
  double ll;
  double d_a;
  double d_b;
  double d_r;
};

CellTerms cell_terms(Family family, double x, double a, double b, double r, double log_r);
CellTerms cell_terms(Family family, double x, double a, double b, double r);

// Log-means beyond this magnitude are clamped before exponentiation.
inline constexpr double kMaxLogMean = 100.0;

}  // namespace detail

}  // namespace zico
