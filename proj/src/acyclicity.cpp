#include "zico/acyclicity.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "zico/error.hpp"

namespace zico {
namespace {

// In-place LU without row exchanges of the Z-matrix sI - W o W. For a
// Z-matrix, all pivots positive is equivalent to being a nonsingular
// M-matrix, so the factorization doubles as the domain test.
struct MMatrixLu {
  Matrix lu;  // unit-lower L below the diagonal, U on and above it
  double log_det = 0.0;
};

std::optional<MMatrixLu> factor(const Matrix& w, double s) {
  if (!w.square()) throw ParameterError("acyclicity: matrix must be square");
  if (!(s > 0.0)) throw ParameterError("acyclicity: s must be positive");
  const std::size_t d = w.rows();
  MMatrixLu f{Matrix(d, d), 0.0};
  Matrix& a = f.lu;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = (i == j ? s : 0.0) - w(i, j) * w(i, j);
  for (std::size_t k = 0; k < d; ++k) {
    const double pivot = a(k, k);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) return std::nullopt;
    f.log_det += std::log(pivot);
    for (std::size_t i = k + 1; i < d; ++i) {
      const double factor_ik = a(i, k) / pivot;
      a(i, k) = factor_ik;
      if (factor_ik == 0.0) continue;
      for (std::size_t j = k + 1; j < d; ++j) a(i, j) -= factor_ik * a(k, j);
    }
  }
  return f;
}

MMatrixLu factor_or_throw(const Matrix& w, double s) {
  auto f = factor(w, s);
  if (!f) throw DomainError("sI - W o W is not an M-matrix (non-positive pivot)");
  return std::move(*f);
}

// Returns (sI - W o W)^{-T}. Solving A^T X = I column by column yields the
// transpose inverse directly.
Matrix inverse_transpose(const MMatrixLu& f) {
  const Matrix& a = f.lu;
  const std::size_t d = a.rows();
  Matrix out(d, d);
  std::vector<double> col(d);
  // A = L U, A^T = U^T L^T. Solve U^T y = e_c, then L^T x = y.
  for (std::size_t c = 0; c < d; ++c) {
    std::fill(col.begin(), col.end(), 0.0);
    col[c] = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      double v = col[i];
      for (std::size_t k = 0; k < i; ++k) v -= a(k, i) * col[k];
      col[i] = v / a(i, i);
    }
    for (std::size_t ii = d; ii-- > 0;) {
      double v = col[ii];
      for (std::size_t k = ii + 1; k < d; ++k) v -= a(k, ii) * col[k];
      col[ii] = v;
    }
    for (std::size_t r = 0; r < d; ++r) out(r, c) = col[r];
  }
  return out;
}

double value_from(const MMatrixLu& f, std::size_t d, double s) {
  return -f.log_det + static_cast<double>(d) * std::log(s);
}

}  // namespace

std::string_view acyclicity_mode_name(AcyclicityMode m) {
  return m == AcyclicityMode::kCoupled ? "coupled" : "separate";
}

AcyclicityMode parse_acyclicity_mode(std::string_view name) {
  if (name == "separate") return AcyclicityMode::kSeparate;
  if (name == "coupled") return AcyclicityMode::kCoupled;
  throw ParameterError("unknown acyclicity mode '" + std::string(name) + "'");
}

void AcyclicityConfig::validate() const {
  if (!(s > 0.0)) throw ParameterError("acyclicity: s must be positive");
  if (mode == AcyclicityMode::kCoupled && !(epsilon > 0.0))
    throw ParameterError("acyclicity: coupled mode needs epsilon > 0");
}

double h_ldet(const Matrix& w, double s) {
  const MMatrixLu f = factor_or_throw(w, s);
  return value_from(f, w.rows(), s);
}

Matrix h_ldet_grad(const Matrix& w, double s) { return h_ldet_value_grad(w, s).grad; }

HValue h_ldet_value_grad(const Matrix& w, double s) {
  const MMatrixLu f = factor_or_throw(w, s);
  HValue out{value_from(f, w.rows(), s), inverse_transpose(f)};
  Matrix& g = out.grad;
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] *= 2.0 * w.data()[i];
  g.zero_diagonal();
  return out;
}

bool in_ldet_domain(const Matrix& w, double s) { return factor(w, s).has_value(); }

Matrix pool_coupled(const Matrix& w0, const Matrix& w1, double epsilon) {
  if (w0.rows() != w1.rows() || w0.cols() != w1.cols())
    throw ParameterError("pool_coupled: shape mismatch");
  if (!(epsilon >= 0.0)) throw ParameterError("pool_coupled: epsilon must be nonnegative");
  Matrix out(w0.rows(), w0.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = w0.data()[i];
    const double b = w1.data()[i];
    out.data()[i] = std::sqrt(a * a + b * b + epsilon);
  }
  return out;
}

CoupledHValue h_coupled_value_grad(const Matrix& w0, const Matrix& w1, double s, double epsilon) {
  // Self-loops carry no meaning; without this the diagonal would hold sqrt(eps).
  Matrix pooled = pool_coupled(w0, w1, epsilon);
  pooled.zero_diagonal();
  const MMatrixLu f = factor_or_throw(pooled, s);
  const Matrix inv_t = inverse_transpose(f);
  // dh/dpooled = 2 inv_t o pooled and dpooled/dw = w / pooled, so the pooled
  // factor cancels.
  CoupledHValue out{value_from(f, pooled.rows(), s), Matrix(w0.rows(), w0.cols()),
                    Matrix(w0.rows(), w0.cols())};
  for (std::size_t i = 0; i < inv_t.size(); ++i) {
    out.grad_w0.data()[i] = 2.0 * inv_t.data()[i] * w0.data()[i];
    out.grad_w1.data()[i] = 2.0 * inv_t.data()[i] * w1.data()[i];
  }
  out.grad_w0.zero_diagonal();
  out.grad_w1.zero_diagonal();
  return out;
}

}  // namespace zico
