#include "oml/smoothing.hpp"

#include "oml/analysis.hpp"
#include "oml/stream.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace oml;
using oml::testing::central_diff;
using oml::testing::rel_err;

namespace {

TaskSpec bowl_at(double x, int dim = 2) {
  TaskSpec t;
  t.dim = dim;
  t.train_params = Vec::Constant(dim, x);
  t.test_params = Vec::Constant(dim, x);
  t.domain_radius = 10.0;
  return t;
}

MetaGradientOracle oracle(const TaskSpec& t, double sigma = 0.0, std::uint64_t seed = 0) {
  return MetaGradientOracle(t, AdapterConfig{}, sigma, seed);
}

std::vector<TaskSpec> stream(long T, std::uint64_t seed, Family fam = Family::QuadraticBowl) {
  StreamConfig cfg;
  cfg.family = fam;
  cfg.dim = fam == Family::QuadraticBowl ? 4 : 2;
  cfg.domain_radius = fam == Family::QuadraticBowl ? 10.0 : 5.0;
  cfg.T = T;
  return generate_stream(cfg, seed);
}

}  // namespace

TEST_CASE("push evicts in FIFO order") {
  WindowBuffer w(3);
  CHECK(w.empty());
  for (int i = 1; i <= 4; ++i) w.push(oracle(bowl_at(i)));
  CHECK(w.t() == 4);
  REQUIRE(w.size() == 3);
  CHECK(w.entry(0).loss().task().train_params[0] == 2.0);
  CHECK(w.newest().loss().task().train_params[0] == 4.0);

  WindowBuffer one(1);
  one.push(oracle(bowl_at(1)));
  CHECK(one.t() == 1);
  one.push(oracle(bowl_at(2)));
  CHECK(one.size() == 1);
  CHECK(one.newest().loss().task().train_params[0] == 2.0);

  CHECK_THROWS_AS(WindowBuffer(0), ParameterError);
}

TEST_CASE("window value zero-pads and divides by m") {
  // Meta-losses ℓ = ½(0.9)²‖w−c‖²; pick w so that ℓ₁ = 3 and ℓ₂ = 6.
  AdapterConfig cfg;
  const Vec w = Vec::Zero(1);
  const double k = 0.5 * 0.81;
  auto task = [&](double loss) {
    TaskSpec t = bowl_at(std::sqrt(loss / k), 1);
    return t;
  };
  WindowBuffer win(3);
  win.push(MetaGradientOracle(task(3.0), cfg, 0.0, 1));
  win.push(MetaGradientOracle(task(6.0), cfg, 0.0, 2));
  CHECK(win.value(w) == doctest::Approx(3.0));

  WindowBuffer same(4);
  for (int i = 0; i < 6; ++i) same.push(MetaGradientOracle(task(2.5), cfg, 0.0, i));
  CHECK(same.value(w) == doctest::Approx(2.5));

  WindowBuffer empty(2);
  CHECK_THROWS_AS(empty.value(w), StateError);
  CHECK_THROWS_AS(empty.true_grad(w), StateError);
  CHECK_THROWS_AS(empty.stoch_grad(w), StateError);
}

TEST_CASE("window matches direct summation and re-evaluates past losses") {
  AdapterConfig cfg;
  const auto tasks = stream(12, 3);
  const int m = 5;
  WindowBuffer win(m);
  std::mt19937_64 rng(1);
  for (long t = 1; t <= 12; ++t) {
    win.push(oracle(tasks[t - 1]));
    const Vec w = oml::testing::random_in_ball(4, 8.0, rng);
    double direct = 0.0;
    Vec direct_grad = Vec::Zero(4);
    for (long i = std::max(1L, t - m + 1); i <= t; ++i) {
      direct += meta_loss(w, tasks[i - 1], cfg);
      direct_grad += meta_grad(w, tasks[i - 1], cfg);
    }
    CHECK(win.value(w) == doctest::Approx(direct / m).epsilon(1e-13));
    CHECK((win.true_grad(w) - direct_grad / m).norm() <= 1e-12);
  }
}

TEST_CASE("window gradient matches finite differences") {
  for (Family fam : {Family::QuadraticBowl, Family::SineRegression}) {
    const auto tasks = stream(7, 11, fam);
    WindowBuffer win(4);
    for (const auto& t : tasks) win.push(oracle(t));
    const Vec w = Vec::Constant(tasks.front().param_dim(), 0.7);
    const Vec fd = central_diff([&](const Vec& x) { return win.value(x); }, w);
    CHECK(rel_err(win.true_grad(w), fd) <= 1e-5);
  }
}

TEST_CASE("stochastic window gradient") {
  const auto tasks = stream(30, 5);
  const Vec w = Vec::Constant(4, 0.25);

  SUBCASE("sigma zero equals the exact gradient") {
    WindowBuffer win(5);
    for (const auto& t : tasks) win.push(oracle(t));
    CHECK(win.stoch_grad(w) == win.true_grad(w));
  }
  SUBCASE("m = 1 is a single oracle draw") {
    WindowBuffer win(1);
    win.push(oracle(tasks[0], 0.7, 99));
    MetaGradientOracle twin = oracle(tasks[0], 0.7, 99);
    CHECK(win.stoch_grad(w) == twin.grad(w));
  }
  SUBCASE("variance shrinks as sigma^2/m") {
    for (int m : {1, 5, 25}) {
      CAPTURE(m);
      WindowBuffer win(m);
      for (int i = 0; i < m; ++i) win.push(oracle(tasks[i], 1.0, 1000 + i));
      const auto r = check_lemma2(win, w, 10000);
      CHECK(r.mean_sq_deviation <= 1.1 / m);
      CHECK(r.mean_sq_deviation >= 0.0);
      CHECK(r.unbiased_ok);
    }
  }
  SUBCASE("partial window has variance below sigma^2/m") {
    WindowBuffer win(10);
    for (int i = 0; i < 3; ++i) win.push(oracle(tasks[i], 1.0, 50 + i));
    const auto r = check_lemma2(win, w, 10000);
    CHECK(r.mean_sq_deviation == doctest::Approx(3.0 / 100.0).epsilon(0.1));
  }
}
