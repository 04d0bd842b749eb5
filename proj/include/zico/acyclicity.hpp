#pragma once

#include <string_view>

#include "zico/matrix.hpp"

namespace zico {

enum class AcyclicityMode { kSeparate, kCoupled };

std::string_view acyclicity_mode_name(AcyclicityMode m);
AcyclicityMode parse_acyclicity_mode(std::string_view name);  // "separate", "coupled"

struct AcyclicityConfig {
  double s = 1.0;
  AcyclicityMode mode = AcyclicityMode::kSeparate;
  double epsilon = 1e-8;  // pooling stabilizer, coupled mode only

  void validate() const;
};

struct HValue {
  double value = 0.0;
  Matrix grad;
};

// h(W) = -log det(sI - W o W) + d log s. Zero exactly when the support of W
// is acyclic and positive otherwise. Throws DomainError when sI - W o W is not
// a nonsingular M-matrix.
double h_ldet(const Matrix& w, double s);

// 2 (sI - W o W)^{-T} o W with a zero diagonal.
Matrix h_ldet_grad(const Matrix& w, double s);

// Value and gradient from a single factorization.
HValue h_ldet_value_grad(const Matrix& w, double s);

// True when sI - W o W admits an LU factorization with positive pivots.
bool in_ldet_domain(const Matrix& w, double s);

// sqrt(w0^2 + w1^2 + epsilon) elementwise.
Matrix pool_coupled(const Matrix& w0, const Matrix& w1, double epsilon);

struct CoupledHValue {
  double value = 0.0;
  Matrix grad_w0;
  Matrix grad_w1;
};

// h of the pooled matrix (diagonal zeroed) with the chain rule applied to both
// inputs.
CoupledHValue h_coupled_value_grad(const Matrix& w0, const Matrix& w1, double s, double epsilon);

}  // namespace zico
