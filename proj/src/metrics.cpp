#include "zico/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "json.hpp"

#include "zico/error.hpp"

namespace zico {
namespace {

void check_same_size(const Digraph& a, const Digraph& b) {
  if (a.node_count() != b.node_count()) throw ParameterError("graphs differ in node count");
}

}  // namespace

std::size_t shd(const Digraph& pred, const Digraph& truth) {
  check_same_size(pred, truth);
  const std::size_t d = pred.node_count();
  std::size_t distance = 0;
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t j = k + 1; j < d; ++j) {
      const bool p_kj = pred.has_edge(k, j), p_jk = pred.has_edge(j, k);
      const bool t_kj = truth.has_edge(k, j), t_jk = truth.has_edge(j, k);
      if (p_kj == t_kj && p_jk == t_jk) continue;
      // A single edge pointing the wrong way is one reversal.
      if (p_kj != p_jk && t_kj != t_jk) {
        distance += 1;
        continue;
      }
      distance += static_cast<std::size_t>(p_kj != t_kj) + static_cast<std::size_t>(p_jk != t_jk);
    }
  }
  return distance;
}

Rates classification_rates(const Digraph& pred, const Digraph& truth) {
  check_same_size(pred, truth);
  const std::size_t d = pred.node_count();
  Rates r;
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      if (k == j) continue;
      const bool p = pred.has_edge(k, j);
      const bool t = truth.has_edge(k, j);
      if (p && t) ++r.counts.tp;
      if (p && !t) {
        ++r.counts.fp;
        if (truth.has_edge(j, k)) ++r.counts.reversed;
      }
      if (!p && t) ++r.counts.fn;
    }
  }
  const std::size_t true_edges = r.counts.tp + r.counts.fn;
  const std::size_t pred_edges = r.counts.tp + r.counts.fp;
  r.tpr = true_edges > 0 ? static_cast<double>(r.counts.tp) / static_cast<double>(true_edges) : 0.0;
  r.fdr = pred_edges > 0 ? static_cast<double>(r.counts.fp) / static_cast<double>(pred_edges) : 0.0;
  return r;
}

double auprc(const Matrix& scores, const Digraph& truth) {
  if (!scores.square() || scores.rows() != truth.node_count())
    throw ParameterError("auprc: score matrix does not match graph");
  const std::size_t d = truth.node_count();
  struct Pair {
    double score;
    bool positive;
  };
  std::vector<Pair> pairs;
  pairs.reserve(d * (d > 0 ? d - 1 : 0));
  std::size_t positives = 0;
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      if (k == j) continue;
      const bool t = truth.has_edge(k, j);
      positives += t ? 1 : 0;
      pairs.push_back({scores(k, j), t});
    }
  }
  if (positives == 0) throw ParameterError("auprc: truth has no edges");
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.score > b.score; });

  double area = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  std::size_t seen = 0;
  for (std::size_t i = 0; i < pairs.size();) {
    std::size_t end = i;
    while (end < pairs.size() && pairs[end].score == pairs[i].score) {
      tp += pairs[end].positive ? 1 : 0;
      ++end;
    }
    seen = end;
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = end;
  }
  return area;
}

double auprc_random(const Digraph& truth) {
  const std::size_t d = truth.node_count();
  if (d < 2) throw ParameterError("auprc_random: need at least two nodes");
  return static_cast<double>(truth.edge_count()) / static_cast<double>(d * (d - 1));
}

Matrix combine_scores(const Matrix& w0, const Matrix& w1) {
  if (w0.rows() != w1.rows() || w0.cols() != w1.cols())
    throw ParameterError("combine_scores: shape mismatch");
  Matrix out(w0.rows(), w0.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::hypot(w0.data()[i], w1.data()[i]);
  return out;
}

EvalReport evaluate(const Digraph& pred, const Matrix& scores, const Digraph& truth) {
  EvalReport r;
  const Rates rates = classification_rates(pred, truth);
  r.shd = shd(pred, truth);
  r.tpr = rates.tpr;
  r.fdr = rates.fdr;
  r.counts = rates.counts;
  r.true_edges = truth.edge_count();
  r.predicted_edges = pred.edge_count();
  r.auprc = auprc(scores, truth);
  r.auprc_ratio = r.auprc / auprc_random(truth);
  return r;
}

void write_eval_csv(std::ostream& out, const EvalReport& r) {
  out << "shd,tpr,fdr,auprc,auprc_ratio,tp,fp,fn,reversed,true_edges,predicted_edges\n";
  out << r.shd << ',' << r.tpr << ',' << r.fdr << ',' << r.auprc << ',' << r.auprc_ratio << ','
      << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.fn << ',' << r.counts.reversed << ','
      << r.true_edges << ',' << r.predicted_edges << '\n';
}

void write_eval_json(std::ostream& out, const EvalReport& r) {
  const nlohmann::json j = {
      {"shd", r.shd},
      {"tpr", r.tpr},
      {"fdr", r.fdr},
      {"auprc", r.auprc},
      {"auprc_ratio", r.auprc_ratio},
      {"tp", r.counts.tp},
      {"fp", r.counts.fp},
      {"fn", r.counts.fn},
      {"reversed", r.counts.reversed},
      {"true_edges", r.true_edges},
      {"predicted_edges", r.predicted_edges},
  };
  out << j.dump(2) << '\n';
}

}  // namespace zico
