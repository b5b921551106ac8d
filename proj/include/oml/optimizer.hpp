#ifndef OML_OPTIMIZER_HPP
#define OML_OPTIMIZER_HPP

#include "oml/common.hpp"

namespace oml {

/// AdaGrad-Norm: one scalar accumulator shared by all coordinates.
///
///   b²_{t+1} = b²_t + ‖G_t‖²
///   w_{t+1}  = w_t − (η / b_{t+1}) G_t
///
/// The accumulator is updated before the step, and b² is stored rather than b.
class AdaGradNorm {
 public:
  AdaGradNorm(Vec w1, double eta = 1.0, double b1 = 1.0);

  void step(const Vec& g);

  const Vec& w() const { return w_; }
  double b_sq() const { return b_sq_; }
  double b() const;
  double eta() const { return eta_; }
  double b1() const { return b1_; }
  /// η / b at the current accumulator, i.e. the factor the last step used.
  double effective_step() const;

 private:
  Vec w_;
  double b_sq_;
  double eta_;
  double b1_;
};

}  // namespace oml

#endif  // OML_OPTIMIZER_HPP
