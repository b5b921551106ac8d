#include "oml/adapter.hpp"

#include <cmath>

namespace oml {

void AdapterConfig::validate() const {
  require(alpha > 0.0 && std::isfinite(alpha), "alpha must be positive");
  if (inner_mode == InnerMode::SampledBatch) require(batch_size >= 1, "batch size must be >= 1");
}

Vec adapt(const Vec& w, const TaskSpec& task, const AdapterConfig& cfg) {
  require_finite(w, "adapter input");
  return w - cfg.alpha * true_grad(task, Side::Train, w);
}

Vec adapt(const Vec& w, const TaskSpec& task, const AdapterConfig& cfg, const SampleBatch& batch) {
  require_finite(w, "adapter input");
  return w - cfg.alpha * batch_grad(task, Side::Train, batch, w);
}

double meta_loss(const Vec& w, const TaskSpec& task, const AdapterConfig& cfg) {
  return true_loss(task, Side::Test, adapt(w, task, cfg));
}

double meta_loss(const Vec& w, const TaskSpec& task, const AdapterConfig& cfg,
                 const SampleBatch& batch) {
  return true_loss(task, Side::Test, adapt(w, task, cfg, batch));
}

Vec meta_grad(const Vec& w, const TaskSpec& task, const AdapterConfig& cfg) {
  const Vec outer = true_grad(task, Side::Test, adapt(w, task, cfg));
  return outer - cfg.alpha * true_hvp(task, Side::Train, w, outer);
}

Vec meta_grad(const Vec& w, const TaskSpec& task, const AdapterConfig& cfg,
              const SampleBatch& batch) {
  const Vec outer = true_grad(task, Side::Test, adapt(w, task, cfg, batch));
  return outer - cfg.alpha * batch_hvp(task, Side::Train, batch, w, outer);
}

MetaLoss::MetaLoss(TaskSpec task, AdapterConfig cfg, std::mt19937_64* rng)
    : task_(std::move(task)), cfg_(cfg) {
  cfg_.validate();
  task_.validate();
  if (cfg_.inner_mode == InnerMode::SampledBatch) {
    if (rng == nullptr) throw ParameterError("sampled-batch meta-loss needs a random stream");
    batch_ = draw_batch(task_, Side::Train, cfg_.batch_size, *rng);
  }
}

Vec MetaLoss::adapt(const Vec& w) const {
  return batch_ ? oml::adapt(w, task_, cfg_, *batch_) : oml::adapt(w, task_, cfg_);
}

double MetaLoss::value(const Vec& w) const {
  return batch_ ? meta_loss(w, task_, cfg_, *batch_) : meta_loss(w, task_, cfg_);
}

Vec MetaLoss::grad(const Vec& w) const {
  return batch_ ? meta_grad(w, task_, cfg_, *batch_) : meta_grad(w, task_, cfg_);
}

MetaConstants meta_constants(const LossConstants& c, double alpha) {
  require(c.L >= 0.0 && c.beta >= 0.0 && c.H >= 0.0 && c.M >= 0.0,
          "loss constants must be nonnegative");
  require(alpha >= 0.0, "alpha must be nonnegative");
  const double stretch = 1.0 + alpha * c.beta;
  return {c.M, stretch * c.L, alpha * c.L * c.H + stretch * stretch * c.beta};
}

double adapted_radius(const TaskSpec& task, double alpha) {
  const double r = task.domain_radius;
  if (task.family == Family::QuadraticBowl && alpha <= 1.0 && task.train_params.norm() <= r)
    return r;
  const double train_lipschitz = [&] {
    TaskSpec train_only = task;
    train_only.test_params = task.train_params;
    return constants_on(train_only, r).L;
  }();
  return r + alpha * train_lipschitz;
}

LossConstants certified_task_constants(const TaskSpec& task, double alpha) {
  return constants_on(task, adapted_radius(task, alpha));
}

MetaGradientOracle::MetaGradientOracle(TaskSpec task, AdapterConfig cfg, double sigma,
                                       std::uint64_t seed)
    : rng_(seed), loss_(std::move(task), cfg, &rng_), sigma_(sigma) {
  require(sigma >= 0.0, "oracle sigma must be nonnegative");
}

Vec MetaGradientOracle::grad(const Vec& w) {
  if (!loss_.task().in_domain(w)) ++violations_;
  Vec g = loss_.grad(w);
  if (sigma_ > 0.0) g += isotropic_noise(static_cast<int>(g.size()), sigma_, rng_);
  return g;
}

}  // namespace oml
