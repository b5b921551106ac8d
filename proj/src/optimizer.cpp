#include "oml/optimizer.hpp"

#include <cmath>

namespace oml {

AdaGradNorm::AdaGradNorm(Vec w1, double eta, double b1)
    : w_(std::move(w1)), b_sq_(b1 * b1), eta_(eta), b1_(b1) {
  require(eta > 0.0 && std::isfinite(eta), "eta must be positive");
  require(b1 > 0.0 && std::isfinite(b1), "b1 must be positive");
  require_finite(w_, "initial iterate");
}

void AdaGradNorm::step(const Vec& g) {
  if (g.size() != w_.size()) throw ParameterError("gradient dimension does not match iterate");
  require_finite(g, "gradient");
  const double norm_sq = g.squaredNorm();
  if (norm_sq == 0.0) return;
  if (!std::isfinite(b_sq_ + norm_sq)) throw NumericError("step-size accumulator overflow");
  b_sq_ += norm_sq;
  w_ -= (eta_ / std::sqrt(b_sq_)) * g;
  require_finite(w_, "iterate");
}

double AdaGradNorm::b() const { return std::sqrt(b_sq_); }

double AdaGradNorm::effective_step() const { return eta_ / std::sqrt(b_sq_); }

}  // namespace oml
