#include "oml/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace oml {

void RegretLedger::record_round(LedgerRow row) {
  if (row.t != rounds() + 1)
    throw StateError("ledger rounds must be consecutive: expected t=" +
                     std::to_string(rounds() + 1) + ", got t=" + std::to_string(row.t));
  if (!std::isfinite(row.grad_norm_sq) || row.grad_norm_sq < 0.0)
    throw NumericError("gradient norm must be finite and nonnegative");
  running_regret_ += row.grad_norm_sq;
  row.running_regret = running_regret_;
  rows_.push_back(row);
}

double RegretLedger::regret_at(long t) const {
  if (t < 0 || t > rounds()) throw ParameterError("round outside ledger");
  return t == 0 ? 0.0 : rows_[static_cast<std::size_t>(t - 1)].running_regret;
}

bool regret_rate_decreasing(const RegretLedger& ledger) {
  const long T = ledger.rounds();
  if (T < 2) throw ParameterError("need at least two rounds");
  const long half = T / 2;
  return ledger.regret_at(T) / static_cast<double>(T) <
         ledger.regret_at(half) / static_cast<double>(half);
}

void BoundInputs::validate() const {
  require(T >= 1 && m >= 1, "T and m must be positive");
  require(m <= T, "m must not exceed T");
  require(eta > 0.0 && b1 > 0.0, "eta and b1 must be positive");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(sigma >= 0.0 && M >= 0.0 && L_prime >= 0.0 && beta_prime >= 0.0,
          "sigma, M, L', beta' must be nonnegative");
}

double theorem1_C(const BoundInputs& in) {
  in.validate();
  const double T = static_cast<double>(in.T);
  const double m = static_cast<double>(in.m);
  const double descent = 4.0 * in.M * T / (in.eta * m);
  const double weight = (in.eta * in.beta_prime + 4.0 * in.sigma / std::sqrt(m)) / 2.0;
  const double growth =
      std::log1p(2.0 * (in.sigma * in.sigma / m + in.L_prime * in.L_prime) * T / (in.b1 * in.b1));
  return descent + weight * growth;
}

double theorem1_bound(const BoundInputs& in) {
  const double C = theorem1_C(in);
  const double d = in.delta;
  return 48.0 * C * C / (d * d) + 8.0 * in.b1 * C / d +
         8.0 * in.sigma * C * std::sqrt(static_cast<double>(in.T)) /
             (std::pow(d, 1.5) * std::sqrt(static_cast<double>(in.m)));
}

Lemma3Report check_lemma3(std::span<const RegretLedger> runs, double M, long m) {
  if (runs.empty()) throw InputError("no runs to check");
  require(m >= 1 && M >= 0.0, "need m >= 1 and M >= 0");
  const long T = runs.front().rounds();
  std::vector<double> sums;
  for (const auto& run : runs) {
    if (run.rounds() != T) throw InputError("runs have different horizons");
    double s = 0.0;
    for (const auto& row : run.rows()) {
      if (std::isnan(row.F_at_wt1)) throw InputError("trace lacks F_{t,m}(w_{t+1}) evaluations");
      s += row.F_at_wt - row.F_at_wt1;
    }
    sums.push_back(s);
  }
  Lemma3Report r;
  r.runs = static_cast<int>(sums.size());
  double mean = 0.0;
  for (double s : sums) mean += s;
  mean /= r.runs;
  double var = 0.0;
  for (double s : sums) var += (s - mean) * (s - mean);
  r.mean_sum = mean;
  r.std_error = r.runs > 1 ? std::sqrt(var / (r.runs - 1) / r.runs) : 0.0;
  r.bound = 4.0 * M * static_cast<double>(T) / static_cast<double>(m);
  r.exceeded = r.mean_sum > r.bound;
  return r;
}

NonincreasingFunction NonincreasingFunction::reciprocal() {
  return {"1/x", [](double x) { return 1.0 / x; },
          [](double a, double b) { return std::log(b / a); }, 0.0};
}

NonincreasingFunction NonincreasingFunction::exp_decay(double rate) {
  require(rate >= 0.0, "decay rate must be nonnegative");
  if (rate == 0.0) return constant(1.0);
  return {"exp(-rx)", [rate](double x) { return std::exp(-rate * x); },
          [rate](double a, double b) { return (std::exp(-rate * a) - std::exp(-rate * b)) / rate; },
          -1.0};
}

NonincreasingFunction NonincreasingFunction::constant(double value) {
  require(value >= 0.0, "h must be nonnegative");
  return {"const", [value](double) { return value; },
          [value](double a, double b) { return value * (b - a); }, -1.0};
}

// Summation order in lhs and the log in rhs each carry O(ε) rounding; equality
// cases (constant h) need that much slack.
bool Lemma4Result::holds() const { return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs)); }

Lemma4Result check_lemma4(const NonincreasingFunction& h, std::span<const double> a) {
  require(!a.empty(), "need at least a_0");
  for (double v : a) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("sequence values must be finite and >= 0");
  }
  require(a[0] > h.min_start, "a_0 outside the domain where h is finite");
  Lemma4Result r;
  double s = a[0];
  for (std::size_t t = 1; t < a.size(); ++t) {
    s += a[t];
    r.lhs += a[t] * h.h(s);
  }
  r.rhs = h.integral(a[0], s);
  return r;
}

Lemma2Report check_lemma2(WindowBuffer& buffer, const Vec& w, int n_draws) {
  require(n_draws >= 2, "need at least two draws");
  const Vec exact = buffer.true_grad(w);
  double sigma = 0.0;
  for (std::size_t i = 0; i < buffer.size(); ++i) sigma = std::max(sigma, buffer.entry(i).sigma());

  Vec mean = Vec::Zero(exact.size());
  double sq = 0.0;
  for (int k = 0; k < n_draws; ++k) {
    const Vec dev = buffer.stoch_grad(w) - exact;
    mean += dev;
    sq += dev.squaredNorm();
  }
  mean /= n_draws;

  Lemma2Report r;
  r.draws = n_draws;
  r.mean_sq_deviation = sq / n_draws;
  r.variance_bound = sigma * sigma / buffer.m();
  r.max_coord_bias = mean.cwiseAbs().maxCoeff();
  r.bias_tolerance = 4.0 * (sigma / std::sqrt(static_cast<double>(buffer.m()))) /
                     std::sqrt(static_cast<double>(n_draws));
  r.variance_ok = r.mean_sq_deviation <= 1.1 * r.variance_bound;
  r.unbiased_ok = r.max_coord_bias <= r.bias_tolerance;
  return r;
}

}  // namespace oml
