#include "oml/smoothing.hpp"

namespace oml {

WindowBuffer::WindowBuffer(int m) : m_(m) { require(m >= 1, "window size m must be >= 1"); }

void WindowBuffer::push(MetaGradientOracle oracle) {
  if (!entries_.empty() && oracle.loss().task().param_dim() != newest().loss().task().param_dim())
    throw ParameterError("window tasks must share one parameter dimension");
  entries_.push_back(std::move(oracle));
  if (entries_.size() > static_cast<std::size_t>(m_)) entries_.pop_front();
  ++t_;
}

void WindowBuffer::require_nonempty() const {
  if (entries_.empty()) throw StateError("window is empty");
}

double WindowBuffer::value(const Vec& w) const {
  require_nonempty();
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.value(w);
  return sum / m_;
}

Vec WindowBuffer::true_grad(const Vec& w) const {
  require_nonempty();
  Vec sum = Vec::Zero(w.size());
  for (const auto& e : entries_) sum += e.true_grad(w);
  return sum / m_;
}

Vec WindowBuffer::stoch_grad(const Vec& w) {
  require_nonempty();
  Vec sum = Vec::Zero(w.size());
  for (auto& e : entries_) sum += e.grad(w);
  return sum / m_;
}

}  // namespace oml
