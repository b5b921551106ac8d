#ifndef OML_TASK_MODEL_HPP
#define OML_TASK_MODEL_HPP

#include "oml/common.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <numbers>
#include <random>
#include <string>

namespace oml {

enum class Family { QuadraticBowl, SineRegression };
enum class Side { Train, Test };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// How task centers are placed relative to each other within one stream.
///   Uniform   - centers uniform in a ball of radius `center_scale`.
///   Clustered - centers scattered with std `spread` around one anchor point.
///   Antipodal - like Clustered, but each task flips the anchor's sign at random.
enum class Layout { Uniform, Clustered, Antipodal };

std::string to_string(Layout l);
Layout layout_from_string(const std::string& s);

struct GeneratorParams {
  Layout layout = Layout::Clustered;
  double center_scale = 3.0;
  double spread = 0.3;
  // Per-coordinate std of the train-side center (or amplitude) around the
  // task's true one. Models scarce training data.
  double train_noise = 1.0;
  double test_noise = 0.0;
  // Spread of individual samples around the center in sampled-batch mode.
  double sample_spread = 1.0;
  double amplitude_min = 0.1;
  double amplitude_max = 5.0;
  double phase_min = 0.0;
  double phase_max = std::numbers::pi;
};

/// One synthetic task. Parameter layout by family:
///   QuadraticBowl  - params are the bowl center c (length dim); loss ½‖w−c‖².
///   SineRegression - dim independent sine channels; params are
///                    [A_1, Φ_1, ..., A_dim, Φ_dim] and so is w. The loss is
///                    the mean over channels of E_x (a sin(x+φ) − A sin(x+Φ))²
///                    with x uniform over one period.
struct TaskSpec {
  Family family = Family::QuadraticBowl;
  int dim = 1;
  Vec train_params;
  Vec test_params;
  double domain_radius = 10.0;
  double sample_spread = 1.0;
  std::uint64_t seed = 0;

  int param_dim() const { return family == Family::SineRegression ? 2 * dim : dim; }
  const Vec& params(Side side) const { return side == Side::Train ? train_params : test_params; }
  bool in_domain(const Vec& w) const { return w.norm() <= domain_radius; }
  void validate() const;
};

struct LossConstants {
  double L = 0.0;     // Lipschitz
  double beta = 0.0;  // smoothness
  double H = 0.0;     // Hessian-Lipschitz
  double M = 0.0;     // bound on |loss|
};

LossConstants max_of(const LossConstants& a, const LossConstants& b);

/// Draws a task from the family's generator. `anchor` is the stream-level
/// cluster point (ignored by Uniform layout and by SineRegression); an empty
/// anchor means the origin.
TaskSpec make_task(Family family, int dim, std::mt19937_64& rng, double domain_radius,
                   const GeneratorParams& gen = {}, const Vec& anchor = Vec());

double true_loss(const TaskSpec& task, Side side, const Vec& w);
Vec true_grad(const TaskSpec& task, Side side, const Vec& w);
Vec true_hvp(const TaskSpec& task, Side side, const Vec& w, const Vec& v);
Eigen::MatrixXd true_hessian(const TaskSpec& task, Side side, const Vec& w);

/// Constants certified on the ball of radius `task.domain_radius`.
LossConstants constants_of(const TaskSpec& task);
/// Same, certified on an arbitrary ball radius (max over train and test side).
LossConstants constants_on(const TaskSpec& task, double radius);

/// A finite sample of one side's data distribution. Quadratic tasks hold
/// `points` (k × d, each row a noisy copy of the center); sine tasks hold
/// `inputs` (k × dim, one column of x draws per channel).
struct SampleBatch {
  Eigen::MatrixXd points;
  Eigen::MatrixXd inputs;
  int size() const { return static_cast<int>(points.rows() > 0 ? points.rows() : inputs.rows()); }
};

SampleBatch draw_batch(const TaskSpec& task, Side side, int k, std::mt19937_64& rng);
Vec batch_grad(const TaskSpec& task, Side side, const SampleBatch& batch, const Vec& w);
Vec batch_hvp(const TaskSpec& task, Side side, const SampleBatch& batch, const Vec& w,
              const Vec& v);

/// Stochastic first-order oracle: true gradient plus isotropic Gaussian noise
/// with per-coordinate variance σ²/d, so E‖noise‖² = σ².
class GradientOracle {
 public:
  GradientOracle(TaskSpec task, Side side, double sigma, std::uint64_t seed);

  Vec grad(const Vec& w);

  const TaskSpec& task() const { return task_; }
  Side side() const { return side_; }
  double sigma() const { return sigma_; }
  long domain_violations() const { return violations_; }

 private:
  TaskSpec task_;
  Side side_;
  double sigma_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  long violations_ = 0;
};

/// Zero-mean noise with E‖ε‖² = σ² spread evenly over `dim` coordinates.
Vec isotropic_noise(int dim, double sigma, std::mt19937_64& rng);

}  // namespace oml

#endif  // OML_TASK_MODEL_HPP
