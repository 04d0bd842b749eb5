#pragma once

#include <cstddef>
#include <iosfwd>

#include "zico/graph.hpp"
#include "zico/matrix.hpp"

namespace zico {

struct EdgeCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t reversed = 0;  // predicted edges whose reverse is a true edge
};

struct Rates {
  double tpr = 0.0;
  double fdr = 0.0;
  EdgeCounts counts;
};

struct EvalReport {
  std::size_t shd = 0;
  double tpr = 0.0;
  double fdr = 0.0;
  double auprc = 0.0;
  double auprc_ratio = 0.0;
  EdgeCounts counts;
  std::size_t true_edges = 0;
  std::size_t predicted_edges = 0;
};

// Minimal number of edge insertions, deletions and reversals (reversal = 1)
// turning pred into truth.
std::size_t shd(const Digraph& pred, const Digraph& truth);

Rates classification_rates(const Digraph& pred, const Digraph& truth);

// Step-wise area sum_k (R_k - R_{k-1}) P_k over off-diagonal pairs ranked by
// descending score; tied scores enter as one block. Throws ParameterError if
// truth has no edges.
double auprc(const Matrix& scores, const Digraph& truth);

// Edge prevalence |E| / (d (d - 1)): the AUPRC of an uninformative ranking.
double auprc_random(const Digraph& truth);

// sqrt(w0^2 + w1^2) elementwise.
Matrix combine_scores(const Matrix& w0, const Matrix& w1);

EvalReport evaluate(const Digraph& pred, const Matrix& scores, const Digraph& truth);

void write_eval_csv(std::ostream& out, const EvalReport& r);
void write_eval_json(std::ostream& out, const EvalReport& r);

}  // namespace zico
