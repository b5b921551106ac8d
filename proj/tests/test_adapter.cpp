#include "oml/adapter.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace oml;
using oml::testing::central_diff;
using oml::testing::random_in_ball;
using oml::testing::rel_err;

namespace {

TaskSpec bowl(Vec c_train, Vec c_test) {
  TaskSpec t;
  t.family = Family::QuadraticBowl;
  t.dim = static_cast<int>(c_train.size());
  t.train_params = std::move(c_train);
  t.test_params = std::move(c_test);
  t.domain_radius = 10.0;
  return t;
}

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

}  // namespace

TEST_CASE("adapt on a quadratic bowl") {
  const Vec c_tr = v2(2, -1);
  const auto t = bowl(c_tr, v2(0, 0));
  AdapterConfig cfg;
  cfg.alpha = 0.1;
  const Vec w = v2(0.5, 3.0);
  CHECK((adapt(w, t, cfg) - (0.9 * w + 0.1 * c_tr)).norm() < 1e-15);
  CHECK(adapt(c_tr, t, cfg) == c_tr);

  AdapterConfig tiny;
  tiny.alpha = 1e-300;
  CHECK(adapt(w, t, tiny) == w);

  CHECK_THROWS_AS(adapt(v2(NAN, 0), t, cfg), NumericError);
}

TEST_CASE("meta_loss composes the adapter with the test loss") {
  AdapterConfig cfg;
  cfg.alpha = 0.1;
  const Vec c = v2(1, -2);
  const auto same = bowl(c, c);
  const Vec w = v2(4, 1);
  CHECK(meta_loss(w, same, cfg) == doctest::Approx(0.5 * 0.81 * (w - c).squaredNorm()));
  CHECK(meta_loss(c, same, cfg) == 0.0);

  const auto shifted = bowl(v2(0, 0), v2(1, 0));
  CHECK(adapt(v2(0, 0), shifted, cfg) == v2(0, 0));
  CHECK(meta_loss(v2(0, 0), shifted, cfg) == doctest::Approx(0.5));

  std::mt19937_64 rng(5);
  for (Family fam : {Family::QuadraticBowl, Family::SineRegression}) {
    const auto t = make_task(fam, 2, rng, 5.0);
    const Vec x = random_in_ball(t.param_dim(), 5.0, rng);
    CHECK(meta_loss(x, t, cfg) == true_loss(t, Side::Test, adapt(x, t, cfg)));
  }
}

TEST_CASE("meta_grad closed forms") {
  AdapterConfig cfg;
  cfg.alpha = 0.1;
  const auto t = bowl(v2(0, 0), v2(0, 0));
  const Vec g = meta_grad(v2(1, 0), t, cfg);
  CHECK(g[0] == doctest::Approx(0.81));
  CHECK(g[1] == 0.0);

  // w such that U(w) = c_ts: the outer gradient vanishes.
  const Vec c_tr = v2(1, 1), c_ts = v2(-1, 2);
  const auto t2 = bowl(c_tr, c_ts);
  const Vec w_star = (c_ts - cfg.alpha * c_tr) / (1 - cfg.alpha);
  CHECK(meta_grad(w_star, t2, cfg).norm() < 1e-14);
}

TEST_CASE("meta_grad matches finite differences of meta_loss") {
  AdapterConfig cfg;
  cfg.alpha = 0.1;
  std::mt19937_64 rng(77);
  for (Family fam : {Family::QuadraticBowl, Family::SineRegression}) {
    CAPTURE(to_string(fam));
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      GeneratorParams gen;
      gen.layout = Layout::Uniform;
      const auto t = make_task(fam, 2, rng, 5.0, gen);
      const Vec w = random_in_ball(t.param_dim(), t.domain_radius, rng);
      const Vec g = meta_grad(w, t, cfg);
      const Vec fd = central_diff([&](const Vec& x) { return meta_loss(x, t, cfg); }, w);
      worst = std::max(worst, rel_err(g, fd));
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("sampled-batch meta loss is a fixed function per draw") {
  AdapterConfig cfg;
  cfg.alpha = 0.1;
  cfg.inner_mode = InnerMode::SampledBatch;
  cfg.batch_size = 5;
  std::mt19937_64 rng(19);
  std::mt19937_64 task_rng(2);
  const auto t = make_task(Family::SineRegression, 2, task_rng, 5.0);
  MetaLoss loss(t, cfg, &rng);
  const Vec w = random_in_ball(t.param_dim(), 3.0, rng);
  CHECK(loss.value(w) == loss.value(w));
  CHECK(loss.value(w) == true_loss(t, Side::Test, loss.adapt(w)));
  const Vec fd = central_diff([&](const Vec& x) { return loss.value(x); }, w);
  CHECK(rel_err(loss.grad(w), fd) <= 1e-5);

  CHECK_THROWS_AS(MetaLoss(t, cfg, nullptr), ParameterError);
}

TEST_CASE("exact mode is deterministic") {
  AdapterConfig cfg;
  std::mt19937_64 rng(4);
  const auto t = make_task(Family::SineRegression, 3, rng, 5.0);
  const Vec w = random_in_ball(t.param_dim(), 5.0, rng);
  const Vec a = meta_grad(w, t, cfg), b = meta_grad(w, t, cfg);
  CHECK(a == b);
  CHECK(meta_loss(w, t, cfg) == meta_loss(w, t, cfg));
}

TEST_CASE("meta_constants propagation") {
  auto mc = meta_constants({2.0, 1.0, 0.0, 5.0}, 0.1);
  CHECK(mc.M == 5.0);
  CHECK(mc.L_prime == doctest::Approx(2.2));
  CHECK(mc.beta_prime == doctest::Approx(1.21));

  mc = meta_constants({2.0, 1.0, 0.0, 5.0}, 0.0);
  CHECK(mc.L_prime == 2.0);
  CHECK(mc.beta_prime == 1.0);

  mc = meta_constants({1.0, 2.0, 3.0, 1.0}, 0.5);
  CHECK(mc.M == 1.0);
  CHECK(mc.L_prime == doctest::Approx(2.0));
  CHECK(mc.beta_prime == doctest::Approx(9.5));

  CHECK_THROWS_AS(meta_constants({-1.0, 1.0, 0.0, 1.0}, 0.1), ParameterError);
}

TEST_CASE("meta-loss constants certified on random point pairs") {
  AdapterConfig cfg;
  cfg.alpha = 0.1;
  std::mt19937_64 rng(31);
  for (Family fam : {Family::QuadraticBowl, Family::SineRegression}) {
    CAPTURE(to_string(fam));
    std::mt19937_64 task_rng(12);
    const auto t = make_task(fam, 2, task_rng, 5.0);
    const auto mc = meta_constants(certified_task_constants(t, cfg.alpha), cfg.alpha);
    int violations = 0;
    for (int k = 0; k < 1000; ++k) {
      const Vec u = random_in_ball(t.param_dim(), t.domain_radius, rng);
      const Vec v = random_in_ball(t.param_dim(), t.domain_radius, rng);
      const double d = (u - v).norm();
      if (std::abs(meta_loss(u, t, cfg) - meta_loss(v, t, cfg)) > mc.L_prime * d) ++violations;
      if ((meta_grad(u, t, cfg) - meta_grad(v, t, cfg)).norm() > mc.beta_prime * d) ++violations;
      if (std::abs(meta_loss(u, t, cfg)) > mc.M) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("adapted points stay inside the certified radius") {
  AdapterConfig cfg;
  cfg.alpha = 0.1;
  std::mt19937_64 rng(8);
  for (Family fam : {Family::QuadraticBowl, Family::SineRegression}) {
    std::mt19937_64 task_rng(1);
    const auto t = make_task(fam, 2, task_rng, 5.0);
    const double r = adapted_radius(t, cfg.alpha);
    for (int k = 0; k < 500; ++k) {
      const Vec w = random_in_ball(t.param_dim(), t.domain_radius, rng);
      CHECK(adapt(w, t, cfg).norm() <= r + 1e-12);
    }
  }
}

TEST_CASE("meta oracle adds zero-mean noise on top of the meta gradient") {
  AdapterConfig cfg;
  std::mt19937_64 task_rng(3);
  const auto t = make_task(Family::QuadraticBowl, 3, task_rng, 10.0);
  const Vec w = Vec::Constant(3, 0.5);
  MetaGradientOracle exact(t, cfg, 0.0, 1);
  CHECK(exact.grad(w) == meta_grad(w, t, cfg));

  MetaGradientOracle noisy(t, cfg, 1.0, 2);
  const int N = 10000;
  Vec mean = Vec::Zero(3);
  double sq = 0.0;
  for (int k = 0; k < N; ++k) {
    const Vec e = noisy.grad(w) - meta_grad(w, t, cfg);
    mean += e;
    sq += e.squaredNorm();
  }
  CHECK((mean / N).cwiseAbs().maxCoeff() <= 4.0 / std::sqrt(N));
  CHECK(sq / N <= 1.1);
  CHECK(sq / N >= 0.9);
}
