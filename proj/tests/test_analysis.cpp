#include "oml/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace oml;

namespace {

LedgerRow row(long t, double g2, double f = 0.0, double f1 = 0.0) {
  LedgerRow r;
  r.t = t;
  r.grad_norm_sq = g2;
  r.F_at_wt = f;
  r.F_at_wt1 = f1;
  return r;
}

// Second, independent evaluation of the bound: long double, terms regrouped.
long double bound_by_hand(const BoundInputs& in) {
  const long double T = in.T, m = in.m, eta = in.eta, b1 = in.b1, d = in.delta, s = in.sigma;
  const long double C =
      4.0L * in.M * T / (eta * m) +
      0.5L * (eta * in.beta_prime + 4.0L * s / std::sqrt(m)) *
          std::log((b1 * b1 + 2.0L * (s * s / m + (long double)in.L_prime * in.L_prime) * T) / (b1 * b1));
  return C * (48.0L * C / (d * d) + 8.0L * b1 / d + 8.0L * s * std::sqrt(T / m) / (d * std::sqrt(d)));
}

BoundInputs example() {
  BoundInputs in;
  in.M = 1.0;
  in.T = 100;
  in.m = 25;
  in.eta = 1.0;
  in.b1 = 1.0;
  in.sigma = 0.0;
  in.beta_prime = 1.21;
  in.L_prime = 2.2;
  in.delta = 0.1;
  return in;
}

}  // namespace

TEST_CASE("ledger accumulates squared gradient norms") {
  RegretLedger constant;
  for (long t = 1; t <= 10; ++t) constant.record_round(row(t, 0.0));
  CHECK(constant.running_regret() == 0.0);

  RegretLedger single;
  single.record_round(row(1, 4.0));
  CHECK(single.running_regret() == 4.0);

  RegretLedger two;
  two.record_round(row(1, 1.0));
  two.record_round(row(2, 3.0));
  CHECK(two.running_regret() == 4.0);
  CHECK(two.regret_at(1) == 1.0);
  CHECK(two.rows().back().running_regret == 4.0);

  CHECK_THROWS_AS(two.record_round(row(4, 1.0)), StateError);
  CHECK_THROWS_AS(two.record_round(row(2, 1.0)), StateError);
  CHECK_THROWS_AS(two.record_round(row(3, -1.0)), NumericError);
}

TEST_CASE("running regret is nondecreasing") {
  std::mt19937_64 rng(0);
  std::exponential_distribution<double> e(1.0);
  RegretLedger l;
  double prev = 0.0;
  for (long t = 1; t <= 200; ++t) {
    l.record_round(row(t, e(rng)));
    CHECK(l.running_regret() >= prev);
    prev = l.running_regret();
  }
}

TEST_CASE("theorem1_C worked example") {
  const auto in = example();
  CHECK(theorem1_C(in) == doctest::Approx(16.0 + 0.605 * std::log(969.0)).epsilon(1e-14));

  auto no_descent = in;
  no_descent.M = 0.0;
  CHECK(theorem1_C(no_descent) ==
        doctest::Approx(0.5 * 1.21 * std::log(1.0 + 2.0 * 2.2 * 2.2 * 100.0)).epsilon(1e-14));

  auto doubled = no_descent;
  doubled.M = 1.0;
  doubled.m = 50;
  const double descent_25 = theorem1_C(in) - theorem1_C(no_descent);
  auto doubled_nom = doubled;
  doubled_nom.M = 0.0;
  const double descent_50 = theorem1_C(doubled) - theorem1_C(doubled_nom);
  CHECK(descent_50 == doctest::Approx(descent_25 / 2.0).epsilon(1e-12));
}

TEST_CASE("theorem1_bound structure") {
  const auto in = example();
  const double C = theorem1_C(in);
  CHECK(theorem1_bound(in) == doctest::Approx(48 * C * C / 0.01 + 8 * C / 0.1).epsilon(1e-13));

  const double redundant = static_cast<double>(bound_by_hand(in));
  CHECK(std::abs(theorem1_bound(in) - redundant) / redundant <= 1e-12);

  auto noisy = in;
  noisy.sigma = 0.7;
  noisy.delta = 0.999999999;
  const double Cn = theorem1_C(noisy);
  CHECK(theorem1_bound(noisy) ==
        doctest::Approx(48 * Cn * Cn + 8 * Cn + 8 * 0.7 * Cn * std::sqrt(100.0 / 25.0)).epsilon(1e-8));
  CHECK(std::abs(theorem1_bound(noisy) - (double)bound_by_hand(noisy)) / theorem1_bound(noisy) <= 1e-12);

  auto bad = in;
  bad.delta = 1.0;
  CHECK_THROWS_AS(theorem1_bound(bad), ParameterError);
  bad = in;
  bad.m = 200;
  CHECK_THROWS_AS(theorem1_bound(bad), ParameterError);
}

TEST_CASE("bound monotonicity on a grid") {
  auto base = example();
  base.sigma = 0.5;
  base.M = 2.0;
  for (double delta : {0.01, 0.05, 0.1, 0.3, 0.6, 0.9}) {
    auto a = base;
    a.delta = delta;
    auto b = a;
    b.delta = delta * 1.05;
    CHECK(theorem1_bound(b) <= theorem1_bound(a));
  }
  for (double s : {0.0, 0.1, 0.5, 1.0, 4.0}) {
    auto a = base, b = base;
    a.sigma = s;
    b.sigma = s + 0.25;
    CHECK(theorem1_bound(b) >= theorem1_bound(a));
  }
  for (double M : {0.0, 0.5, 2.0, 10.0}) {
    auto a = base, b = base;
    a.M = M;
    b.M = M + 1.0;
    CHECK(theorem1_bound(b) >= theorem1_bound(a));
  }
  for (long T : {25L, 50L, 100L, 400L}) {
    auto a = base, b = base;
    a.T = T;
    b.T = T + 10;
    CHECK(theorem1_bound(b) >= theorem1_bound(a));
  }
}

TEST_CASE("lemma 3 report") {
  RegretLedger flat;
  for (long t = 1; t <= 20; ++t) flat.record_round(row(t, 0.0, 1.5, 1.5));
  std::vector<RegretLedger> runs{flat};
  auto r = check_lemma3(runs, 2.0, 5);
  CHECK(r.mean_sum == 0.0);
  CHECK(r.bound == doctest::Approx(4.0 * 2.0 * 20 / 5));
  CHECK_FALSE(r.exceeded);

  RegretLedger full;
  for (long t = 1; t <= 8; ++t) full.record_round(row(t, 0.0, 1.0, 0.5));
  std::vector<RegretLedger> two{full, full};
  r = check_lemma3(two, 3.0, 8);
  CHECK(r.bound == doctest::Approx(12.0));  // m = T
  CHECK(r.mean_sum == doctest::Approx(4.0));
  CHECK(r.std_error == 0.0);

  RegretLedger missing;
  LedgerRow no_next;
  no_next.t = 1;
  missing.record_round(no_next);
  std::vector<RegretLedger> bad{missing};
  CHECK_THROWS_AS(check_lemma3(bad, 1.0, 1), InputError);
}

TEST_CASE("lemma 4 with h = 1/x") {
  const std::vector<double> a{1, 1, 1, 1};
  const auto r = check_lemma4(NonincreasingFunction::reciprocal(), a);
  CHECK(r.lhs == doctest::Approx(1.0 / 2 + 1.0 / 3 + 1.0 / 4));
  CHECK(r.rhs == doctest::Approx(std::log(4.0)));
  CHECK(r.holds());

  const std::vector<double> zeros{2.0, 0, 0, 0};
  const auto z = check_lemma4(NonincreasingFunction::reciprocal(), zeros);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);
  CHECK(z.holds());

  const std::vector<double> single{0.5, 3.0};
  const auto s = check_lemma4(NonincreasingFunction::reciprocal(), single);
  CHECK(s.lhs == doctest::Approx(3.0 / 3.5));
  CHECK(s.rhs == doctest::Approx(std::log(3.5 / 0.5)));
  CHECK(s.holds());

  const std::vector<double> negative{1.0, -1.0};
  CHECK_THROWS_AS(check_lemma4(NonincreasingFunction::reciprocal(), negative), ParameterError);
  const std::vector<double> zero_start{0.0, 1.0};
  CHECK_THROWS_AS(check_lemma4(NonincreasingFunction::reciprocal(), zero_start), ParameterError);
}

TEST_CASE("lemma 4 for other nonincreasing functions") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (const auto& h : {NonincreasingFunction::exp_decay(0.7), NonincreasingFunction::constant(2.0)}) {
    for (int k = 0; k < 50; ++k) {
      std::vector<double> a{u(rng)};
      for (int i = 0; i < 20; ++i) a.push_back(u(rng));
      CHECK(check_lemma4(h, a).holds());
    }
  }
}
