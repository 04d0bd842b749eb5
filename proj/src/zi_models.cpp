#include "zico/zi_models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "zico/error.hpp"
#include "zico/kernels.hpp"
#include "zico/special.hpp"

namespace zico {
namespace {

using special::sigmoid;
using special::softplus;

constexpr double kMinDispersion = 1e-6;

// log(x!) with a table for the counts that dominate real data.
class LogFactorial {
 public:
  LogFactorial() {
    table_[0] = 0.0;
    for (std::size_t k = 1; k < table_.size(); ++k)
      table_[k] = table_[k - 1] + std::log(static_cast<double>(k));
  }
  double operator()(double x) const {
    if (x < static_cast<double>(table_.size())) return table_[static_cast<std::size_t>(x)];
    return special::log_gamma(x + 1.0);
  }

 private:
  std::array<double, 1024> table_{};
};

const LogFactorial& log_factorial() {
  static const LogFactorial table;
  return table;
}

void check_shapes(const Dataset& x, const ModelParams& params, std::span<const std::size_t> rows) {
  params.validate();
  if (params.d() != x.d()) throw ParameterError("parameter dimension does not match data");
  for (std::size_t i : rows)
    if (i >= x.n()) throw ParameterError("row index out of range");
}

Matrix gather_rows(const Dataset& x, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), x.d());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = x.x().row(rows[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

// intercept broadcast to every row, then += xb * w.
Matrix linear_predictor(const Matrix& xb, const Matrix& w, const std::vector<double>& intercept) {
  Matrix z(xb.rows(), w.cols());
  for (std::size_t i = 0; i < z.rows(); ++i) std::copy(intercept.begin(), intercept.end(), z.row(i).begin());
  kernels::active().gemm_nn(xb.rows(), xb.cols(), w.cols(), xb.data(), w.data(), z.data());
  return z;
}

struct Predictors {
  Matrix xb;
  Matrix a;  // zero-component logits (empty for NB/Poisson)
  Matrix b;  // log means, clamped
};

Predictors predictors(const Dataset& x, const ModelParams& params, std::span<const std::size_t> rows) {
  Predictors pr;
  pr.xb = gather_rows(x, rows);
  if (has_zero_component(params.family)) pr.a = linear_predictor(pr.xb, params.w0, params.gamma);
  pr.b = linear_predictor(pr.xb, params.w1, params.delta);
  for (double& v : pr.b.flat()) v = std::clamp(v, -detail::kMaxLogMean, detail::kMaxLogMean);
  return pr;
}

std::pair<std::vector<double>, std::vector<double>> dispersions(const ModelParams& params) {
  std::vector<double> r(params.d());
  std::vector<double> log_r(params.d());
  for (std::size_t j = 0; j < params.d(); ++j) {
    r[j] = params.dispersion(j);
    log_r[j] = std::log(r[j]);
  }
  return {std::move(r), std::move(log_r)};
}

LogLik evaluate(const Dataset& x, const ModelParams& params, std::span<const std::size_t> rows) {
  check_shapes(x, params, rows);
  const Predictors pr = predictors(x, params, rows);
  const std::size_t d = x.d();
  LogLik out{0.0, Matrix(rows.size(), d)};
  const bool zero_part = has_zero_component(params.family);
  const auto [r, log_r] = dispersions(params);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double a = zero_part ? pr.a(i, j) : 0.0;
      const auto t = detail::cell_terms(params.family, pr.xb(i, j), a, pr.b(i, j), r[j], log_r[j]);
      out.per_cell(i, j) = t.ll;
    }
  }
  // Fixed row-major reduction order.
  for (double v : out.per_cell.flat()) out.total += v;
  return out;
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kZinb: return "zinb";
    case Family::kZip: return "zip";
    case Family::kNb: return "nb";
    case Family::kPoisson: return "poisson";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "zinb") return Family::kZinb;
  if (name == "zip") return Family::kZip;
  if (name == "nb") return Family::kNb;
  if (name == "poisson") return Family::kPoisson;
  throw ParameterError("unknown family '" + std::string(name) + "'");
}

Dataset::Dataset(Matrix counts, std::vector<std::string> names)
    : x_(std::move(counts)), names_(std::move(names)) {
  for (double v : x_.flat()) {
    if (!(v >= 0.0) || std::floor(v) != v || !std::isfinite(v))
      throw DataError("counts must be nonnegative integers");
  }
  if (!names_.empty() && names_.size() != x_.cols())
    throw ParameterError("column name count does not match data width");
}

ModelParams ModelParams::zeros(Family family, std::size_t d) {
  ModelParams p;
  p.family = family;
  p.w0 = Matrix(d, d);
  p.w1 = Matrix(d, d);
  p.gamma.assign(d, 0.0);
  p.delta.assign(d, 0.0);
  p.r_raw.assign(d, special::softplus_inverse(1.0));
  return p;
}

double ModelParams::dispersion(std::size_t j) const {
  return std::max(special::softplus(r_raw[j]), kMinDispersion);
}

void ModelParams::validate() const {
  const std::size_t dim = d();
  if (!w1.square() || w0.rows() != dim || w0.cols() != dim || gamma.size() != dim ||
      delta.size() != dim || r_raw.size() != dim)
    throw ParameterError("ModelParams: inconsistent shapes");
  for (std::size_t j = 0; j < dim; ++j)
    if (w0(j, j) != 0.0 || w1(j, j) != 0.0) throw ParameterError("ModelParams: nonzero diagonal");
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

namespace detail {

namespace {

// Shared pieces of softplus/sigmoid at z computed from one exp and one log1p.
struct LogisticParts {
  double softplus_pos;  // log(1 + e^z)
  double softplus_neg;  // log(1 + e^-z)
  double sigmoid_pos;   // 1 / (1 + e^-z)
  double sigmoid_neg;   // 1 / (1 + e^z)
};

inline LogisticParts logistic_parts(double z) {
  const double e = std::exp(-std::abs(z));
  const double l = std::log1p(e);
  const double inv = 1.0 / (1.0 + e);
  if (z >= 0.0) return {z + l, l, inv, e * inv};
  return {l, -z + l, e * inv, inv};
}

// log(e^u + e^v) and the weight e^v / (e^u + e^v).
inline std::pair<double, double> log_add_exp_weight(double u, double v) {
  if (v >= u) {
    const double e = std::exp(u - v);
    return {v + std::log1p(e), 1.0 / (1.0 + e)};
  }
  const double e = std::exp(v - u);
  return {u + std::log1p(e), e / (1.0 + e)};
}

}  // namespace

CellTerms cell_terms(Family family, double x, double a, double b, double r, double log_r) {
  CellTerms t{0.0, 0.0, 0.0, 0.0};
  switch (family) {
    case Family::kZinb: {
      const LogisticParts za = logistic_parts(a);
      const LogisticParts zs = logistic_parts(b - log_r);
      const double log_pi = -za.softplus_neg;
      const double log_p = -zs.softplus_pos;  // log r/(r+mu)
      const double q = zs.sigmoid_pos;        // mu/(r+mu)
      if (x == 0.0) {
        const auto [ll, w] = log_add_exp_weight(-za.softplus_pos, log_pi + r * log_p);
        t.ll = std::min(ll, 0.0);
        t.d_a = w - za.sigmoid_pos;
        t.d_b = -w * r * q;
        t.d_r = w * (log_p + q);
      } else {
        const double log_1mp = -zs.softplus_neg;
        const double p = zs.sigmoid_neg;
        t.ll = log_pi + special::log_gamma_ratio(x, r) - log_factorial()(x) + r * log_p + x * log_1mp;
        t.d_a = za.sigmoid_neg;
        t.d_b = x * p - r * q;
        t.d_r = special::digamma_ratio(x, r) + log_p + q - x * p / r;
      }
      break;
    }
    case Family::kZip: {
      const LogisticParts za = logistic_parts(a);
      const double log_pi = -za.softplus_neg;
      const double mu = std::exp(b);
      if (x == 0.0) {
        const auto [ll, w] = log_add_exp_weight(-za.softplus_pos, log_pi - mu);
        t.ll = std::min(ll, 0.0);
        t.d_a = w - za.sigmoid_pos;
        t.d_b = -w * mu;
      } else {
        t.ll = log_pi + x * b - mu - log_factorial()(x);
        t.d_a = za.sigmoid_neg;
        t.d_b = x - mu;
      }
      break;
    }
    case Family::kNb: {
      const LogisticParts zs = logistic_parts(b - log_r);
      const double log_p = -zs.softplus_pos;
      const double log_1mp = -zs.softplus_neg;
      const double p = zs.sigmoid_neg;
      const double q = zs.sigmoid_pos;
      t.ll = special::log_gamma_ratio(x, r) - log_factorial()(x) + r * log_p + x * log_1mp;
      t.d_b = x * p - r * q;
      t.d_r = special::digamma_ratio(x, r) + log_p + q - x * p / r;
      break;
    }
    case Family::kPoisson: {
      const double mu = std::exp(b);
      t.ll = x * b - mu - log_factorial()(x);
      t.d_b = x - mu;
      break;
    }
  }
  return t;
}

CellTerms cell_terms(Family family, double x, double a, double b, double r) {
  return cell_terms(family, x, a, b, r, std::log(r));
}

}  // namespace detail

LinkValues compute_links(const Dataset& x, const ModelParams& params, std::span<const std::size_t> rows) {
  check_shapes(x, params, rows);
  const Predictors pr = predictors(x, params, rows);
  const std::size_t d = x.d();
  LinkValues links{Matrix(rows.size(), d, 1.0), Matrix(rows.size(), d), Matrix(rows.size(), d)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (has_zero_component(params.family)) links.pi(i, j) = sigmoid(pr.a(i, j));
      links.mu(i, j) = std::exp(pr.b(i, j));
      links.p(i, j) = sigmoid(-(pr.b(i, j) - std::log(params.dispersion(j))));
    }
  }
  return links;
}

LogLik log_lik_zinb(const Dataset& x, const ModelParams& params, std::span<const std::size_t> rows) {
  if (params.family != Family::kZinb) throw ParameterError("log_lik_zinb: family must be ZINB");
  return evaluate(x, params, rows);
}

LogLik log_lik_zip(const Dataset& x, const ModelParams& params, std::span<const std::size_t> rows) {
  if (params.family != Family::kZip) throw ParameterError("log_lik_zip: family must be ZIP");
  return evaluate(x, params, rows);
}

LogLik log_lik_reduced(const Dataset& x, const ModelParams& params, std::span<const std::size_t> rows) {
  if (has_zero_component(params.family))
    throw ParameterError("log_lik_reduced: family must be NB or Poisson");
  return evaluate(x, params, rows);
}

LogLik log_lik(const Dataset& x, const ModelParams& params, std::span<const std::size_t> rows) {
  return evaluate(x, params, rows);
}

NllAndGrad nll_and_grad(const Dataset& x, const ModelParams& params, std::span<const std::size_t> rows) {
  if (rows.empty()) throw ParameterError("nll_and_grad: empty row subset");
  check_shapes(x, params, rows);
  const Predictors pr = predictors(x, params, rows);
  const std::size_t m = rows.size();
  const std::size_t d = x.d();
  const bool zero_part = has_zero_component(params.family);
  const bool dispersed = has_dispersion(params.family);
  const double scale = -1.0 / static_cast<double>(m);

  Matrix da(m, d);
  Matrix db(m, d);
  std::vector<double> dr(d, 0.0);
  double total = 0.0;
  const auto [r, log_r] = dispersions(params);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double bij = pr.b(i, j);
      const auto t = detail::cell_terms(params.family, pr.xb(i, j), zero_part ? pr.a(i, j) : 0.0,
                                        bij, r[j], log_r[j]);
      total += t.ll;
      da(i, j) = t.d_a;
      // Clamped log-means contribute no gradient.
      db(i, j) = std::abs(bij) < detail::kMaxLogMean ? t.d_b : 0.0;
      dr[j] += t.d_r;
    }
  }

  NllAndGrad out;
  out.nll = scale * total;
  ParamGrads& g = out.grads;
  g = ModelParams::zeros(params.family, d);
  std::fill(g.r_raw.begin(), g.r_raw.end(), 0.0);
  const auto& k = kernels::active();

  k.gemm_tn(d, m, d, pr.xb.data(), db.data(), g.w1.data());
  k.scale(g.w1.data(), g.w1.size(), scale);
  g.w1.zero_diagonal();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) g.delta[j] += db(i, j);
  for (double& v : g.delta) v *= scale;

  if (zero_part) {
    k.gemm_tn(d, m, d, pr.xb.data(), da.data(), g.w0.data());
    k.scale(g.w0.data(), g.w0.size(), scale);
    g.w0.zero_diagonal();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < d; ++j) g.gamma[j] += da(i, j);
    for (double& v : g.gamma) v *= scale;
  }
  if (dispersed) {
    for (std::size_t j = 0; j < d; ++j) {
      // dr/dr_raw = sigmoid(r_raw); below the floor r is constant.
      const double chain = special::softplus(params.r_raw[j]) > kMinDispersion ? sigmoid(params.r_raw[j]) : 0.0;
      g.r_raw[j] = scale * dr[j] * chain;
    }
  }
  return out;
}

ModelParams init_params(const Dataset& x, Family family) {
  const std::size_t d = x.d();
  ModelParams p = ModelParams::zeros(family, d);
  for (std::size_t j = 0; j < d; ++j) {
    std::size_t nonzero = 0;
    double positive_sum = 0.0;
    for (std::size_t i = 0; i < x.n(); ++i) {
      if (x(i, j) > 0.0) {
        ++nonzero;
        positive_sum += x(i, j);
      }
    }
    if (has_zero_component(family)) {
      const double frac = x.n() > 0 ? static_cast<double>(nonzero) / static_cast<double>(x.n()) : 0.5;
      const double clipped = std::clamp(frac, 1e-6, 1.0 - 1e-6);
      p.gamma[j] = std::clamp(std::log(clipped / (1.0 - clipped)), -4.0, 4.0);
    }
    p.delta[j] = nonzero > 0 ? std::log(positive_sum / static_cast<double>(nonzero)) : 0.0;
  }
  return p;
}

}  // namespace zico
