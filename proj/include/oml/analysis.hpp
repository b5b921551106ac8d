#ifndef OML_ANALYSIS_HPP
#define OML_ANALYSIS_HPP

#include "oml/smoothing.hpp"

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace oml {

struct LedgerRow {
  long t = 0;
  double grad_norm_sq = 0.0;  // ‖∇F_{t,m}(w_t)‖², exact
  double F_at_wt = 0.0;
  double F_at_wt1 = std::numeric_limits<double>::quiet_NaN();  // F_{t,m}(w_{t+1})
  double running_regret = 0.0;
  double b_next = 0.0;
  double eff_step = 0.0;
  bool domain_flag = false;
  double test_loss = 0.0;  // ℓ_t(w_t): the post-adaptation test loss suffered
};

/// Local regret R_m(T) = Σ_t ‖∇F_{t,m}(w_t)‖², one row per round.
class RegretLedger {
 public:
  /// Appends round `row.t`, which must be exactly one past the last round.
  /// Fills in row.running_regret.
  void record_round(LedgerRow row);

  double running_regret() const { return running_regret_; }
  /// R_m(t) for 1 ≤ t ≤ rounds(); R_m(0) = 0.
  double regret_at(long t) const;
  long rounds() const { return static_cast<long>(rows_.size()); }
  const std::vector<LedgerRow>& rows() const { return rows_; }

 private:
  std::vector<LedgerRow> rows_;
  double running_regret_ = 0.0;
};

/// R_m(T)/T < R_m(T/2)/(T/2), the finite-horizon signature of sublinear regret.
bool regret_rate_decreasing(const RegretLedger& ledger);

struct BoundInputs {
  long T = 1;
  long m = 1;
  double eta = 1.0;
  double b1 = 1.0;
  double delta = 0.1;
  double sigma = 0.0;
  double M = 0.0;
  double L_prime = 0.0;
  double beta_prime = 0.0;

  void validate() const;
};

/// C = 4MT/(ηm) + ((ηβ' + 4σ/√m)/2) · ln(1 + 2(σ²/m + L'²)T / b₁²)
double theorem1_C(const BoundInputs& in);

/// High-probability local-regret bound:
/// 48C²/δ² + 8b₁C/δ + 8σC√T / (δ^{3/2}√m).
double theorem1_bound(const BoundInputs& in);

struct Lemma3Report {
  double mean_sum = 0.0;  // seed-averaged Σ_t [F_{t,m}(w_t) − F_{t,m}(w_{t+1})]
  double std_error = 0.0;
  double bound = 0.0;     // 4MT/m
  int runs = 0;
  bool exceeded = false;
};

/// Telescoped descent sum of each run, averaged over runs, against 4MT/m.
/// All runs must share T; every row needs F_at_wt1.
Lemma3Report check_lemma3(std::span<const RegretLedger> runs, double M, long m);

/// A nonincreasing h: [0, ∞) → [0, ∞) together with its antiderivative.
struct NonincreasingFunction {
  std::string name;
  std::function<double(double)> h;
  std::function<double(double, double)> integral;  // ∫_a^b h(x) dx
  double min_start = 0.0;                           // a₀ must exceed this when > 0

  static NonincreasingFunction reciprocal();
  static NonincreasingFunction exp_decay(double rate);
  static NonincreasingFunction constant(double value);
};

struct Lemma4Result {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const;
};

/// lhs = Σ_{t≥1} a_t h(a_0 + … + a_t), rhs = ∫_{a_0}^{a_0+…+a_T} h. Element 0 of
/// `a` is a_0.
Lemma4Result check_lemma4(const NonincreasingFunction& h, std::span<const double> a);

struct Lemma2Report {
  int draws = 0;
  double mean_sq_deviation = 0.0;  // empirical E‖G − ∇F‖²
  double variance_bound = 0.0;     // σ²/m
  double max_coord_bias = 0.0;     // max_i |mean(G)_i − ∇F_i|
  double bias_tolerance = 0.0;     // 4(σ/√m)/√N
  bool variance_ok = false;
  bool unbiased_ok = false;
  bool pass() const { return variance_ok && unbiased_ok; }
};

/// Monte-Carlo check of the window estimator at a fixed point: unbiasedness and
/// the σ²/m second-moment cap (with a 1.1 slack on the cap). σ is the largest
/// oracle noise scale in the window.
Lemma2Report check_lemma2(WindowBuffer& buffer, const Vec& w, int n_draws);

}  // namespace oml

#endif  // OML_ANALYSIS_HPP
