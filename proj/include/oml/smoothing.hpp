#ifndef OML_SMOOTHING_HPP
#define OML_SMOOTHING_HPP

#include "oml/adapter.hpp"

#include <deque>

namespace oml {

/// The last m rounds' meta-losses together with their live oracles.
///
/// Round indices run from 1. At round t the buffer holds rounds
/// max(1, t−m+1) … t; rounds at nonpositive indices are absent and count as
/// the zero function. Every window average divides by m, never by the number
/// of entries present.
class WindowBuffer {
 public:
  explicit WindowBuffer(int m);

  /// Reveals the next round's task; the oldest entry is evicted past m.
  void push(MetaGradientOracle oracle);

  int m() const { return m_; }
  long t() const { return t_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const MetaGradientOracle& entry(std::size_t i) const { return entries_.at(i); }
  const MetaGradientOracle& newest() const { return entries_.back(); }

  /// F_{t,m}(w) = (1/m) Σ ℓ_i(w) over the window, re-evaluated at w.
  double value(const Vec& w) const;
  /// ∇F_{t,m}(w) from exact meta-gradients.
  Vec true_grad(const Vec& w) const;
  /// G_{t,m}(w): one fresh draw from every entry's oracle, averaged over m.
  Vec stoch_grad(const Vec& w);

 private:
  void require_nonempty() const;

  int m_;
  long t_ = 0;
  std::deque<MetaGradientOracle> entries_;
};

}  // namespace oml

#endif  // OML_SMOOTHING_HPP
