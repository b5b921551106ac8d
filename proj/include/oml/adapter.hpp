#ifndef OML_ADAPTER_HPP
#define OML_ADAPTER_HPP

#include "oml/task_model.hpp"

#include <optional>
#include <random>

namespace oml {

enum class InnerMode { ExactExpectation, SampledBatch };

struct AdapterConfig {
  double alpha = 0.1;
  InnerMode inner_mode = InnerMode::ExactExpectation;
  int batch_size = 10;  // only read in SampledBatch mode

  void validate() const;
};

// One-step inner adapter U(w) = w − α∇f̂(w) and the meta-loss ℓ(w) = f(U(w)),
// where f̂ is the train-side loss and f the test-side loss. Overloads taking a
// SampleBatch use the batch gradient of f̂ in place of its expectation.

Vec adapt(const Vec& w, const TaskSpec& task, const AdapterConfig& cfg);
Vec adapt(const Vec& w, const TaskSpec& task, const AdapterConfig& cfg, const SampleBatch& batch);

double meta_loss(const Vec& w, const TaskSpec& task, const AdapterConfig& cfg);
double meta_loss(const Vec& w, const TaskSpec& task, const AdapterConfig& cfg,
                 const SampleBatch& batch);

/// ∇ℓ(w) = (I − α∇²f̂(w)) ∇f(U(w)), via one Hessian-vector product.
Vec meta_grad(const Vec& w, const TaskSpec& task, const AdapterConfig& cfg);
Vec meta_grad(const Vec& w, const TaskSpec& task, const AdapterConfig& cfg,
              const SampleBatch& batch);

/// The meta-loss of one round as a fixed function. In SampledBatch mode the
/// train batch is drawn once at construction and reused by every evaluation.
class MetaLoss {
 public:
  MetaLoss(TaskSpec task, AdapterConfig cfg, std::mt19937_64* rng = nullptr);

  Vec adapt(const Vec& w) const;
  double value(const Vec& w) const;
  Vec grad(const Vec& w) const;

  const TaskSpec& task() const { return task_; }
  const AdapterConfig& config() const { return cfg_; }

 private:
  TaskSpec task_;
  AdapterConfig cfg_;
  std::optional<SampleBatch> batch_;
};

struct MetaConstants {
  double M = 0.0;
  double L_prime = 0.0;
  double beta_prime = 0.0;
};

/// Constant propagation through the adapter:
/// L' = (1+αβ)L, β' = αLH + (1+αβ)²β, M unchanged.
MetaConstants meta_constants(const LossConstants& c, double alpha);

/// Radius of a ball guaranteed to contain U(w) for every w in the task's
/// domain ball. Quadratic bowls with α ≤ 1 and in-domain centers keep U(w) a
/// convex combination of w and the train center; otherwise the ball grows by
/// α times the train-side Lipschitz constant.
double adapted_radius(const TaskSpec& task, double alpha);

/// Base-loss constants valid wherever the meta-loss evaluates f and f̂, i.e.
/// the inputs meta_constants needs for the meta-loss bounds to hold on the
/// task's domain ball.
LossConstants certified_task_constants(const TaskSpec& task, double alpha);

/// g(w) = ∇ℓ(w) + isotropic noise with E‖noise‖² = σ²: an oracle satisfying the
/// stochastic-gradient assumptions at the meta-loss level.
class MetaGradientOracle {
 public:
  MetaGradientOracle(TaskSpec task, AdapterConfig cfg, double sigma, std::uint64_t seed);

  Vec grad(const Vec& w);
  Vec true_grad(const Vec& w) const { return loss_.grad(w); }
  double value(const Vec& w) const { return loss_.value(w); }

  const MetaLoss& loss() const { return loss_; }
  double sigma() const { return sigma_; }
  long domain_violations() const { return violations_; }

 private:
  std::mt19937_64 rng_;
  MetaLoss loss_;
  double sigma_;
  long violations_ = 0;
};

}  // namespace oml

#endif  // OML_ADAPTER_HPP
