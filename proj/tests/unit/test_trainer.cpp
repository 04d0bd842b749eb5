#include <initializer_list>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "zico/error.hpp"
#include "zico/graph.hpp"
#include "zico/simulate.hpp"
#include "zico/trainer.hpp"

using namespace zico;

namespace {

TrainConfig small_config(std::size_t epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.seed = 3;
  return c;
}

Dataset simulated(std::size_t d, std::size_t n, std::uint64_t seed) {
  const DagGraph g = generate_er(d, 0.3, seed);
  const SimParams sp = sample_params(g, SimOptions{}, seed + 1);
  return logic_sample(sp, n, seed + 2);
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("central path schedule") {
  TrainConfig c;
  CHECK(central_path_mu(0, c) == 1.0);
  c.decay_interval = 1000;
  CHECK(central_path_mu(2500, c) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(central_path_mu(999, c) == 1.0);
  c.decay_interval = 0;
  CHECK(c.effective_decay_interval() == 1000);
  CHECK(central_path_mu(3999, c) == doctest::Approx(1e-3));
}

TEST_CASE("cosine warm-up") {
  TrainConfig c;
  c.lambda_group = 0.01;
  c.warm = 400;
  CHECK(lambda_eff(0.0, c) == 0.0);
  CHECK(lambda_eff(200.0, c) == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(lambda_eff(400.0, c) == 0.01);
  CHECK(lambda_eff(4000.0, c) == 0.01);
  double prev = -1.0;
  for (double t = 0.0; t <= 500.0; t += 0.5) {
    const double v = lambda_eff(t, c);
    CHECK(v >= prev);
    prev = v;
  }
  c.warm = 0;
  c.epochs = 4000;
  CHECK(c.effective_warm() == 400);
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  for (auto mutate : std::vector<std::function<void(TrainConfig&)>>{
           [](TrainConfig& t) { t.epochs = 0; }, [](TrainConfig& t) { t.alpha = 1.0; },
           [](TrainConfig& t) { t.alpha = 0.0; }, [](TrainConfig& t) { t.mu0 = 0.0; },
           [](TrainConfig& t) { t.batch_size = 0; }, [](TrainConfig& t) { t.threshold = -1.0; },
           [](TrainConfig& t) { t.lambda_group = -1.0; }, [](TrainConfig& t) { t.s = 0.0; }}) {
    TrainConfig bad;
    mutate(bad);
    CHECK_THROWS_AS(bad.validate(), ParameterError);
  }
}

TEST_CASE("objective examples") {
  const auto inst = oracle::random_instance(Family::kZinb, 1);
  ModelParams p = ModelParams::zeros(Family::kZinb, inst.x.d());
  p.gamma = inst.params.gamma;
  p.delta = inst.params.delta;
  p.r_raw = inst.params.r_raw;
  TrainConfig c;
  c.lambda_group = 0.0;
  c.lambda_align = 0.0;
  const auto rows = all_rows(inst.x.n());
  const ObjectiveValue v = objective(inst.x, p, rows, c, 1500);
  CHECK(v.value == doctest::Approx(0.1 * oracle::nll(inst.x, p)).epsilon(1e-12));
  CHECK(v.h0 == 0.0);
  CHECK(v.h1 == 0.0);

  ModelParams q = ModelParams::zeros(Family::kZinb, 3);
  q.w0(0, 1) = 3.0;
  q.w1(0, 1) = 4.0;
  const Dataset x(Matrix(2, 3, 1.0));
  TrainConfig c2;
  c2.warm = 10;
  const ObjectiveValue g = objective(x, q, all_rows(2), c2, 20);
  CHECK(g.group == doctest::Approx(5.0));
}

TEST_CASE("objective value and gradient against oracles") {
  for (Family f : {Family::kZinb, Family::kZip, Family::kNb, Family::kPoisson}) {
    for (int variant = 0; variant < 4; ++variant) {
      auto inst = oracle::random_instance(f, 500 + variant);
      TrainConfig c;
      c.lambda_group = 0.05;
      c.warm = 10;
      c.lambda_align = 0.3;
      c.align_norm = variant % 2 ? AlignNorm::kFrobenius : AlignNorm::kL1;
      c.acyclicity_mode = variant >= 2 ? AcyclicityMode::kCoupled : AcyclicityMode::kSeparate;
      const std::size_t epoch = 1200 + 7 * variant;
      const auto rows = all_rows(inst.x.n());
      const ObjectiveValue v = objective(inst.x, inst.params, rows, c, epoch);
      CHECK(v.value == doctest::Approx(oracle::objective(inst.x, inst.params, c, epoch)).epsilon(1e-10));
      for (auto [ptr, analytic] : oracle::param_grad_pairs(inst.params, v.grads)) {
        const double saved = *ptr, h = 1e-6;
        *ptr = saved + h;
        const double up = objective(inst.x, inst.params, rows, c, epoch).value;
        *ptr = saved - h;
        const double down = objective(inst.x, inst.params, rows, c, epoch).value;
        *ptr = saved;
        CHECK(oracle::close(analytic, (up - down) / (2 * h), 1e-4, 1e-6));
      }
    }
  }
}

TEST_CASE("gradient clipping") {
  std::vector<double> g{3.0, 4.0};
  CHECK(clip_gradient_norm(g, 1.0) == doctest::Approx(5.0));
  CHECK(std::hypot(g[0], g[1]) == doctest::Approx(1.0));
  CHECK(g[0] / g[1] == doctest::Approx(0.75));
  std::vector<double> small{0.1, 0.2};
  clip_gradient_norm(small, 5.0);
  CHECK(small[0] == 0.1);
  CHECK(small[1] == 0.2);
}

TEST_CASE("AdamW moments over several steps") {
  // Hand-rolled reference recursion.
  AdamW opt(2, 0.9, 0.999, 1e-8, 1e-2);
  std::vector<double> theta{1.0, -1.0}, m(2, 0.0), v(2, 0.0);
  for (int t = 1; t <= 5; ++t) {
    const std::vector<double> g{0.5 * t, -0.1};
    const auto dir = opt.direction(theta, g);
    for (int i = 0; i < 2; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
      CHECK(dir[i] == doctest::Approx(mh / (std::sqrt(vh) + 1e-8) + 1e-2 * theta[i]).epsilon(1e-12));
    }
    CHECK(opt.step_count() == static_cast<std::size_t>(t));
  }
}

TEST_CASE("binarize") {
  Matrix w(3, 3, 0.1);
  CHECK(binarize(w, 0.3).edge_count() == 0);
  Matrix v(2, 2);
  v(0, 1) = 0.31;
  v(1, 0) = -0.29;
  const Digraph g = binarize(v, 0.3);
  CHECK(g.edge_count() == 1);
  CHECK(g.has_edge(0, 1));
  v(1, 0) = -0.5;
  v(0, 0) = 9.0;
  const Digraph all = binarize(v, 0.0);
  CHECK(all.edge_count() == 2);
  Matrix a(2, 2), b(2, 2);
  a(0, 1) = 0.4;
  b(1, 0) = -0.4;
  CHECK(binarize_union(a, b, 0.3).edge_count() == 2);
}

TEST_CASE("fit is deterministic and honours its contracts") {
  const Dataset x = simulated(6, 120, 7);
  TrainConfig c = small_config(60);
  c.clip_norm = 0.5;
  const FitResult a = fit(x, Family::kZinb, c);
  const FitResult b = fit(x, Family::kZinb, c);
  REQUIRE(a.trace.size() == 60);
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].objective == b.trace[i].objective);
    CHECK(a.trace[i].h0 == b.trace[i].h0);
  }
  CHECK(a.params.w0 == b.params.w0);
  CHECK(a.params.w1 == b.params.w1);
  CHECK(a.max_post_clip_norm <= 0.5 + 1e-9);
  for (std::size_t j = 0; j < 6; ++j) {
    CHECK(a.w0()(j, j) == 0.0);
    CHECK(a.w1()(j, j) == 0.0);
  }
  for (const TraceRow& r : a.trace) {
    CHECK(std::isfinite(r.objective));
    CHECK(std::isfinite(r.h0));
  }
  c.seed = 4;
  CHECK_FALSE(fit(x, Family::kZinb, c).params.w1 == a.params.w1);
}

TEST_CASE("reduced families keep W0 at zero") {
  const Dataset x = simulated(5, 80, 9);
  for (Family f : {Family::kPoisson, Family::kNb}) {
    const FitResult r = fit(x, f, small_config(40));
    for (double v : r.w0().flat()) CHECK(v == 0.0);
    for (double v : r.params.gamma) CHECK(v == 0.0);
    double mass = 0.0;
    for (double v : r.w1().flat()) mass += std::abs(v);
    CHECK(mass > 0.0);
    for (const TraceRow& t : r.trace) CHECK(t.h0 == 0.0);
  }
}

TEST_CASE("constraint pressure rises over the last stage") {
  const Dataset x = simulated(8, 200, 21);
  TrainConfig c = small_config(800);
  const FitResult r = fit(x, Family::kZinb, c);
  const std::size_t start = 600;
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    first += r.trace[start + i].h0 + r.trace[start + i].h1;
    last += r.trace[800 - 100 + i].h0 + r.trace[800 - 100 + i].h1;
  }
  CHECK(last <= first);
  CHECK(r.trace.back().mu == doctest::Approx(1e-3));
}

TEST_CASE("independent columns yield few spurious edges") {
  int good = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const DagGraph empty(5, {}, {0, 1, 2, 3, 4});
    const SimParams sp = sample_params(empty, SimOptions{}, 40 + s);
    const Dataset x = logic_sample(sp, 500, 50 + s);
    TrainConfig c;
    c.seed = s;
    const FitResult r = fit(x, Family::kZinb, c);
    good += binarize_union(r.w0(), r.w1(), 0.3).edge_count() <= 2;
  }
  CHECK(good >= 4);
}

TEST_CASE("invalid config is rejected before training") {
  const Dataset x = simulated(4, 30, 2);
  TrainConfig c = small_config(5);
  c.batch_size = 0;
  CHECK_THROWS_AS(fit(x, Family::kZinb, c), ParameterError);
}

}  // TEST_SUITE
