// Acceptance run: one PASS/FAIL line per criterion. Tolerances and runtime
// limits are fixed here. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "zico/acyclicity.hpp"
#include "zico/experiment.hpp"
#include "zico/metrics.hpp"
#include "zico/trainer.hpp"
#include "zico/zi_models.hpp"

using namespace zico;

namespace {

constexpr double kGradRel = 1e-4;
constexpr double kGradAbs = 1e-6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Mean of a per-row quantity over the rows that finished, and how many did.
struct Mean {
  double value = std::nan("");
  std::size_t ok = 0;
  std::size_t failed = 0;
};

Mean mean_of(const std::vector<ResultRow>& rows, const std::function<bool(const ResultRow&)>& pick,
             const std::function<double(const EvalReport&)>& field) {
  Mean m;
  double sum = 0.0;
  for (const ResultRow& r : rows) {
    if (!pick(r)) continue;
    if (r.status != "ok") {
      ++m.failed;
      continue;
    }
    sum += field(r.eval);
    ++m.ok;
  }
  if (m.ok > 0) m.value = sum / static_cast<double>(m.ok);
  return m;
}

std::string describe(const char* label, const Mean& m) {
  return fmt("%s=%.4f (%zu ok, %zu failed)", label, m.value, m.ok, m.failed);
}

// Central differences of f in every trainable scalar against analytic grads.
struct GradCheck {
  std::size_t coords = 0;
  std::size_t bad = 0;
  double worst = 0.0;  // largest |error| / allowed
};

void check_grads(ModelParams& p, const ParamGrads& g, const std::function<double()>& f, double step, GradCheck& out) {
  for (auto [ptr, analytic] : oracle::param_grad_pairs(p, g)) {
    const double saved = *ptr;
    *ptr = saved + step;
    const double up = f();
    *ptr = saved - step;
    const double down = f();
    *ptr = saved;
    const double fd = (up - down) / (2 * step);
    const double allowed = std::max(kGradAbs, kGradRel * std::abs(fd));
    out.worst = std::max(out.worst, std::abs(analytic - fd) / allowed);
    ++out.coords;
    out.bad += !oracle::close(analytic, fd, kGradRel, kGradAbs);
  }
}

Outcome criterion_gradients() {
  const auto t0 = Clock::now();
  GradCheck nll_check, obj_check;
  std::size_t instances = 0, value_mismatch = 0;
  const AlignNorm norms[] = {AlignNorm::kL1, AlignNorm::kFrobenius, AlignNorm::kNone};
  for (Family f : {Family::kZinb, Family::kZip, Family::kNb, Family::kPoisson}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto inst = oracle::random_instance(f, 10'000 + seed);
      const auto rows = all_rows(inst.x.n());
      const NllAndGrad g = nll_and_grad(inst.x, inst.params, rows);
      value_mismatch += !oracle::close(g.nll, oracle::nll(inst.x, inst.params), 1e-10, 1e-12);
      check_grads(inst.params, g.grads, [&] { return oracle::nll(inst.x, inst.params); }, 1e-5, nll_check);

      TrainConfig c;
      c.lambda_group = 0.05;
      c.warm = 20;
      c.lambda_align = 0.3;
      c.align_norm = norms[seed % 3];
      c.acyclicity_mode = seed % 2 ? AcyclicityMode::kCoupled : AcyclicityMode::kSeparate;
      const std::size_t epoch = 3 + (seed * 37) % 3000;
      const ObjectiveValue v = objective(inst.x, inst.params, rows, c, epoch);
      value_mismatch += !oracle::close(v.value, oracle::objective(inst.x, inst.params, c, epoch), 1e-10, 1e-12);
      check_grads(inst.params, v.grads, [&] { return oracle::objective(inst.x, inst.params, c, epoch); }, 1e-5,
                  obj_check);
      ++instances;
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = nll_check.bad == 0 && obj_check.bad == 0 && value_mismatch == 0 && secs < 60.0;
  return {pass, fmt("%zu instances; nll grad %zu/%zu bad (worst %.3g of tol), objective grad %zu/%zu bad "
                    "(worst %.3g of tol), value mismatches %zu, %.1fs (limit 60s)",
                    instances, nll_check.bad, nll_check.coords, nll_check.worst, obj_check.bad, obj_check.coords,
                    obj_check.worst, value_mismatch, secs)};
}

Outcome criterion_acyclicity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> weight(-3.0, 3.0);
  double worst_dag = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const std::size_t d = 2 + s % 14;
    const DagGraph g = generate_er(d, 0.2 + 0.1 * static_cast<double>(s % 6), 700 + s);
    Matrix w(d, d);
    for (const Edge& e : g.edges()) w(e.parent, e.child) = weight(rng);
    worst_dag = std::max(worst_dag, std::abs(h_ldet(w, 1.0)));
  }

  Matrix cycle(2, 2);
  cycle(0, 1) = 0.5;
  cycle(1, 0) = 0.5;
  const double two_cycle = h_ldet(cycle, 1.0);

  std::size_t coords = 0, bad = 0;
  std::uniform_real_distribution<double> small(-0.3, 0.3);
  for (std::uint64_t t = 0; t < 40; ++t) {
    const std::size_t d = 2 + t % 6;
    Matrix w(d, d);
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t j = 0; j < d; ++j)
        if (k != j) w(k, j) = small(rng);
    const double s = 1.0 + 0.25 * static_cast<double>(t % 3);
    const Matrix g = h_ldet_grad(w, s);
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t j = 0; j < d; ++j) {
        if (k == j) continue;
        Matrix p = w;
        const double h = 1e-6;
        p(k, j) = w(k, j) + h;
        const double up = oracle::h_ldet(p, s);
        p(k, j) = w(k, j) - h;
        const double down = oracle::h_ldet(p, s);
        ++coords;
        bad += !oracle::close(g(k, j), (up - down) / (2 * h), kGradRel, kGradAbs);
      }
  }
  const double secs = seconds_since(t0);
  const bool pass = worst_dag <= 1e-9 && std::abs(two_cycle - 0.0645385) <= 1e-6 && bad == 0 && secs < 10.0;
  return {pass, fmt("max |h| on 50 DAGs %.2e (tol 1e-9); 2-cycle %.7f (want 0.0645385 +- 1e-6); "
                    "gradient %zu/%zu bad; %.2fs (limit 10s)",
                    worst_dag, two_cycle, bad, coords, secs)};
}

Outcome criterion_schedules() {
  TrainConfig c;
  c.lambda_group = 0.001;
  c.warm = 400;
  auto formula = [&](double t) {
    return c.lambda_group / 2.0 * (1.0 - std::cos(std::min(1.0, t / static_cast<double>(c.warm)) * std::numbers::pi));
  };
  bool ok = lambda_eff(0.0, c) == 0.0;
  ok = ok && lambda_eff(200.0, c) == formula(200.0) && std::abs(lambda_eff(200.0, c) - 0.0005) <= 1e-18;
  for (double t : {400.0, 401.0, 1000.0, 3999.0}) ok = ok && lambda_eff(t, c) == c.lambda_group;
  for (double t : {1.0, 57.0, 399.0}) ok = ok && lambda_eff(t, c) == formula(t);

  TrainConfig m;
  m.mu0 = 1.0;
  m.alpha = 0.1;
  m.decay_interval = 1000;
  const double mu = central_path_mu(2500, m);
  ok = ok && mu == m.mu0 * std::pow(m.alpha, 2.0) && std::abs(mu - 0.01) <= 1e-17;
  ok = ok && central_path_mu(999, m) == 1.0 && central_path_mu(1000, m) == 0.1;
  return {ok, fmt("lambda_eff(0)=%g, lambda_eff(warm/2)=%.17g, lambda_eff(warm)=%g, mu(2500)=%.17g", lambda_eff(0.0, c),
                  lambda_eff(200.0, c), lambda_eff(400.0, c), mu)};
}

GridSpec base_grid(GraphModel graph, SignConfig sign) {
  GridSpec g;
  g.data.d = 20;
  g.data.n = 500;
  g.graphs = {graph};
  g.signs = {sign};
  g.replicates = 5;
  g.seed_base = 1;
  g.jobs = 1;
  g.record_timing = false;
  return g;
}

GridSpec recovery_grid() {
  GridSpec g = base_grid(GraphModel::kEr, SignConfig::kPlusMinus);
  g.families = {Family::kZinb, Family::kPoisson};
  return g;
}

std::string results_text(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_results_csv(out, rows, false);
  return out.str();
}

struct RecoveryRun {
  std::vector<ResultRow> rows;
  double seconds = 0.0;
};

RecoveryRun run_recovery() {
  const auto t0 = Clock::now();
  RecoveryRun r;
  r.rows = run_grid(recovery_grid());
  r.seconds = seconds_since(t0);
  return r;
}

auto family_is(Family f) {
  return [f](const ResultRow& r) { return r.cell.family == f; };
}

Outcome criterion_recovery(const RecoveryRun& run) {
  const Mean tpr = mean_of(run.rows, family_is(Family::kZinb), [](const EvalReport& e) { return e.tpr; });
  const Mean fdr = mean_of(run.rows, family_is(Family::kZinb), [](const EvalReport& e) { return e.fdr; });
  const Mean shd_zinb = mean_of(run.rows, family_is(Family::kZinb), [](const EvalReport& e) { return double(e.shd); });
  const Mean shd_pois =
      mean_of(run.rows, family_is(Family::kPoisson), [](const EvalReport& e) { return double(e.shd); });
  const bool pass = tpr.ok == 5 && shd_pois.ok == 5 && tpr.value >= 0.6 && fdr.value <= 0.55 &&
                    shd_zinb.value < shd_pois.value && run.seconds <= 900.0;
  return {pass, describe("ZINB TPR", tpr) + "; " + describe("FDR", fdr) + "; " + describe("SHD", shd_zinb) + " vs " +
                    describe("Poisson SHD", shd_pois) + fmt("; %.0fs (limit 900s)", run.seconds)};
}

Outcome criterion_signs() {
  const auto t0 = Clock::now();
  GridSpec g = base_grid(GraphModel::kBa, SignConfig::kPlusPlus);
  g.signs = {SignConfig::kPlusPlus, SignConfig::kMinusPlus};
  g.base.lambda_align = 0.1;
  g.base.align_norm = AlignNorm::kL1;
  const auto rows = run_grid(g);
  auto sign_is = [](SignConfig s) { return [s](const ResultRow& r) { return r.cell.sign == s; }; };
  auto auprc = [](const EvalReport& e) { return e.auprc; };
  const Mean pp = mean_of(rows, sign_is(SignConfig::kPlusPlus), auprc);
  const Mean mp = mean_of(rows, sign_is(SignConfig::kMinusPlus), auprc);
  const double secs = seconds_since(t0);
  const bool pass = pp.ok == 5 && mp.ok > 0 && pp.value >= 0.70 && mp.value < pp.value && secs <= 1200.0;
  return {pass, describe("(+,+) AUPRC", pp) + " (need >= 0.70); " + describe("(-,+) AUPRC", mp) +
                    fmt("; %.0fs (limit 1200s)", secs)};
}

Outcome criterion_overlap() {
  auto auprc = [](const EvalReport& e) { return e.auprc; };
  auto all = [](const ResultRow&) { return true; };
  auto run = [&](double rho, AcyclicityMode mode, AlignNorm norm, double lambda) {
    GridSpec g = base_grid(GraphModel::kBa, SignConfig::kPlusPlus);
    g.rhos = {rho};
    g.base.acyclicity_mode = mode;
    g.base.align_norm = norm;
    g.base.lambda_align = lambda;
    return mean_of(run_grid(g), all, auprc);
  };
  const Mean none_full = run(1.0, AcyclicityMode::kCoupled, AlignNorm::kNone, 0.0);
  Mean best;
  std::string best_name = "none";
  for (AlignNorm norm : {AlignNorm::kFrobenius, AlignNorm::kL1})
    for (double lambda : {0.1, 1.0}) {
      const Mean m = run(1.0, AcyclicityMode::kSeparate, norm, lambda);
      if (m.ok > 0 && !(m.value <= best.value)) {
        best = m;
        best_name = fmt("%s %.1f", std::string(align_norm_name(norm)).c_str(), lambda);
      }
    }
  const Mean none_disjoint = run(0.0, AcyclicityMode::kCoupled, AlignNorm::kNone, 0.0);
  const Mean l1_disjoint = run(0.0, AcyclicityMode::kSeparate, AlignNorm::kL1, 0.1);
  const bool pass = none_full.ok > 0 && best.ok > 0 && none_disjoint.ok > 0 && l1_disjoint.ok > 0 &&
                    std::abs(none_full.value - best.value) <= 0.05 && l1_disjoint.value >= none_disjoint.value;
  return {pass, "rho=1: " + describe("coupled/none", none_full) + " vs best alignment (" + best_name + ") " +
                    describe("AUPRC", best) + "; rho=0: " + describe("l1 0.1", l1_disjoint) + " vs " +
                    describe("coupled/none", none_disjoint)};
}

Outcome criterion_dropout() {
  const auto t0 = Clock::now();
  GridSpec g = base_grid(GraphModel::kBa, SignConfig::kPlusMinus);
  g.data.dropout = true;
  g.data.dropout_slope = 1.0;
  g.data.dropout_percentile = 65.0;
  g.families = {Family::kZinb, Family::kNb};
  const auto rows = run_grid(g);
  auto ratio = [](const EvalReport& e) { return e.auprc_ratio; };
  const Mean zinb = mean_of(rows, family_is(Family::kZinb), ratio);
  const Mean nb = mean_of(rows, family_is(Family::kNb), ratio);
  const double secs = seconds_since(t0);
  const bool pass = zinb.ok == 5 && nb.ok == 5 && zinb.value >= nb.value && secs <= 1200.0;
  return {pass, describe("ZINB AUPRC ratio", zinb) + " vs " + describe("NB", nb) + fmt("; %.0fs (limit 1200s)", secs)};
}

Outcome criterion_metrics() {
  std::mt19937_64 rng(88);
  std::size_t shd_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = 1 + t % 4;
    std::uniform_real_distribution<double> density(0.0, 1.0);
    const double p = density(rng);
    const Digraph a = oracle::random_digraph(d, p, rng), b = oracle::random_digraph(d, p, rng);
    shd_bad += shd(a, b) != oracle::shd_bfs(a, b);
  }

  std::size_t fixtures = 0, auprc_bad = 0;
  auto fixture = [&](const Matrix& s, const Digraph& truth, double hand) {
    const double got = auprc(s, truth);
    ++fixtures;
    auprc_bad += got != hand || got != oracle::auprc_enumerate(s, truth);
  };
  Digraph one(3);
  one.set_edge(0, 1);
  Matrix s(3, 3, 0.1);
  s(0, 1) = 0.9;
  s(1, 0) = 0.8;
  fixture(s, one, 1.0);
  s(0, 1) = 0.8;
  s(1, 0) = 0.9;
  fixture(s, one, 0.5);
  // All scores tied: a single block at prevalence t / N.
  for (std::size_t d = 2; d <= 6; ++d) {
    Digraph truth = oracle::random_digraph(d, 0.4, rng);
    if (truth.edge_count() == 0) truth.set_edge(0, 1);
    fixture(Matrix(d, d, 0.3), truth,
            static_cast<double>(truth.edge_count()) / static_cast<double>(d * (d - 1)));
  }
  const bool pass = shd_bad == 0 && auprc_bad == 0;
  return {pass, fmt("SHD mismatches %zu/1000 (d <= 4); AUPRC fixtures %zu/%zu mismatched", shd_bad, auprc_bad,
                    fixtures)};
}

Outcome criterion_determinism(const RecoveryRun& first) {
  const RecoveryRun second = run_recovery();
  const std::string a = results_text(first.rows), b = results_text(second.rows);
  return {a == b, fmt("results.csv %zu bytes vs %zu bytes, %s", a.size(), b.size(),
                      a == b ? "byte-identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));
  if (wanted.empty())
    for (int c = 1; c <= 9; ++c) wanted.insert(c);

  std::optional<RecoveryRun> recovery;
  auto recovery_run = [&]() -> const RecoveryRun& {
    if (!recovery) recovery = run_recovery();
    return *recovery;
  };

  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"gradient correctness", criterion_gradients}},
      {2, {"acyclicity function", criterion_acyclicity}},
      {3, {"schedule exactness", criterion_schedules}},
      {4, {"structure recovery", [&] { return criterion_recovery(recovery_run()); }}},
      {5, {"sign-configuration AUPRC", criterion_signs}},
      {6, {"overlap trend", criterion_overlap}},
      {7, {"dropout advantage", criterion_dropout}},
      {8, {"metric oracles", criterion_metrics}},
      {9, {"determinism", [&] { return criterion_determinism(recovery_run()); }}},
  };

  std::size_t evaluated = 0, failed = 0;
  for (int c : wanted) {
    const auto it = criteria.find(c);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("criterion %d %s: %s | %s\n", c, o.pass ? "PASS" : "FAIL", it->second.first, o.detail.c_str());
    std::fflush(stdout);
    ++evaluated;
    failed += !o.pass;
  }
  std::printf("evaluated %zu criteria, %zu failed\n", evaluated, failed);
  return failed == 0 ? 0 : 1;
}
