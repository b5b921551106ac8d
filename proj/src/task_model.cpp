#include "oml/task_model.hpp"

#include <algorithm>
#include <cmath>

namespace oml {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec clip_to_ball(Vec v, double radius) {
  const double n = v.norm();
  if (n > radius) v *= radius / n;
  return v;
}

Vec gaussian(int dim, double std, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = std * normal(rng);
  return v;
}

Vec uniform_in_ball(int dim, double radius, std::mt19937_64& rng) {
  Vec dir = gaussian(dim, 1.0, rng);
  while (dir.norm() == 0.0) dir = gaussian(dim, 1.0, rng);
  dir.normalize();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return dir * radius * std::pow(unit(rng), 1.0 / dim);
}

void check_point(const TaskSpec& task, const Vec& w) {
  if (w.size() != task.param_dim()) throw ParameterError("parameter vector has wrong dimension");
}

// Sine channel k of w: amplitude a = w[2k], phase φ = w[2k+1].
double max_amplitude(const TaskSpec& task) {
  double a = 0.0;
  for (int k = 0; k < task.dim; ++k) {
    a = std::max(a, std::abs(task.train_params[2 * k]));
    a = std::max(a, std::abs(task.test_params[2 * k]));
  }
  return a;
}

}  // namespace

std::string to_string(Family f) {
  return f == Family::QuadraticBowl ? "QuadraticBowl" : "SineRegression";
}

Family family_from_string(const std::string& s) {
  if (s == "QuadraticBowl" || s == "quadratic") return Family::QuadraticBowl;
  if (s == "SineRegression" || s == "sine") return Family::SineRegression;
  throw ParameterError("unknown task family: " + s);
}

std::string to_string(Layout l) {
  switch (l) {
    case Layout::Uniform: return "uniform";
    case Layout::Clustered: return "clustered";
    case Layout::Antipodal: return "antipodal";
  }
  return "clustered";
}

Layout layout_from_string(const std::string& s) {
  if (s == "uniform") return Layout::Uniform;
  if (s == "clustered") return Layout::Clustered;
  if (s == "antipodal") return Layout::Antipodal;
  throw ParameterError("unknown stream layout: " + s);
}

void TaskSpec::validate() const {
  require(dim >= 1, "task dim must be >= 1");
  require(domain_radius > 0.0, "domain radius must be positive");
  require(train_params.size() == param_dim() && test_params.size() == param_dim(),
          "task params inconsistent with family and dim");
  require(sample_spread >= 0.0, "sample spread must be nonnegative");
}

LossConstants max_of(const LossConstants& a, const LossConstants& b) {
  return {std::max(a.L, b.L), std::max(a.beta, b.beta), std::max(a.H, b.H), std::max(a.M, b.M)};
}

TaskSpec make_task(Family family, int dim, std::mt19937_64& rng, double domain_radius,
                   const GeneratorParams& gen, const Vec& anchor) {
  require(dim >= 1, "task dim must be >= 1");
  require(domain_radius > 0.0, "domain radius must be positive");

  TaskSpec task;
  task.family = family;
  task.dim = dim;
  task.domain_radius = domain_radius;
  task.sample_spread = gen.sample_spread;

  if (family == Family::QuadraticBowl) {
    const Vec base = anchor.size() == dim ? anchor : Vec(Vec::Zero(dim));
    Vec center;
    switch (gen.layout) {
      case Layout::Uniform:
        center = uniform_in_ball(dim, gen.center_scale, rng);
        break;
      case Layout::Clustered:
        center = base + gaussian(dim, gen.spread, rng);
        break;
      case Layout::Antipodal: {
        std::bernoulli_distribution flip(0.5);
        const double sign = flip(rng) ? -1.0 : 1.0;
        center = sign * base + gaussian(dim, gen.spread, rng);
        break;
      }
    }
    center = clip_to_ball(center, domain_radius);
    task.train_params = clip_to_ball(center + gaussian(dim, gen.train_noise, rng), domain_radius);
    task.test_params = clip_to_ball(center + gaussian(dim, gen.test_noise, rng), domain_radius);
  } else {
    std::uniform_real_distribution<double> amp(gen.amplitude_min, gen.amplitude_max);
    std::uniform_real_distribution<double> phase(gen.phase_min, gen.phase_max);
    std::normal_distribution<double> normal(0.0, 1.0);
    task.train_params.resize(2 * dim);
    task.test_params.resize(2 * dim);
    auto jitter = [&](double value, double std, double lo, double hi) {
      return std::clamp(value + std * normal(rng), lo, hi);
    };
    for (int k = 0; k < dim; ++k) {
      const double a = amp(rng);
      const double p = phase(rng);
      task.train_params[2 * k] = jitter(a, gen.train_noise, gen.amplitude_min, gen.amplitude_max);
      task.train_params[2 * k + 1] = p;
      task.test_params[2 * k] = jitter(a, gen.test_noise, gen.amplitude_min, gen.amplitude_max);
      task.test_params[2 * k + 1] = p;
    }
  }
  return task;
}

double true_loss(const TaskSpec& task, Side side, const Vec& w) {
  check_point(task, w);
  const Vec& p = task.params(side);
  if (task.family == Family::QuadraticBowl) return 0.5 * (w - p).squaredNorm();

  double total = 0.0;
  for (int k = 0; k < task.dim; ++k) {
    const double a = w[2 * k], phi = w[2 * k + 1];
    const double A = p[2 * k], Phi = p[2 * k + 1];
    total += 0.5 * (a * a + A * A) - a * A * std::cos(phi - Phi);
  }
  return total / task.dim;
}

Vec true_grad(const TaskSpec& task, Side side, const Vec& w) {
  check_point(task, w);
  const Vec& p = task.params(side);
  if (task.family == Family::QuadraticBowl) return w - p;

  Vec g(w.size());
  for (int k = 0; k < task.dim; ++k) {
    const double a = w[2 * k], delta = w[2 * k + 1] - p[2 * k + 1];
    const double A = p[2 * k];
    g[2 * k] = a - A * std::cos(delta);
    g[2 * k + 1] = a * A * std::sin(delta);
  }
  return g / task.dim;
}

Vec true_hvp(const TaskSpec& task, Side side, const Vec& w, const Vec& v) {
  check_point(task, w);
  check_point(task, v);
  if (task.family == Family::QuadraticBowl) return v;

  const Vec& p = task.params(side);
  Vec out(w.size());
  for (int k = 0; k < task.dim; ++k) {
    const double a = w[2 * k], delta = w[2 * k + 1] - p[2 * k + 1];
    const double A = p[2 * k];
    const double off = A * std::sin(delta);
    const double phiphi = a * A * std::cos(delta);
    out[2 * k] = v[2 * k] + off * v[2 * k + 1];
    out[2 * k + 1] = off * v[2 * k] + phiphi * v[2 * k + 1];
  }
  return out / task.dim;
}

Eigen::MatrixXd true_hessian(const TaskSpec& task, Side side, const Vec& w) {
  const int n = task.param_dim();
  Eigen::MatrixXd h(n, n);
  for (int j = 0; j < n; ++j) h.col(j) = true_hvp(task, side, w, Vec::Unit(n, j));
  return h;
}

LossConstants constants_of(const TaskSpec& task) { return constants_on(task, task.domain_radius); }

LossConstants constants_on(const TaskSpec& task, double radius) {
  require(radius > 0.0, "certification radius must be positive");
  LossConstants c;
  if (task.family == Family::QuadraticBowl) {
    const double reach =
        radius + std::max(task.train_params.norm(), task.test_params.norm());
    c.L = reach;
    c.beta = 1.0;
    c.H = 0.0;
    c.M = 0.5 * reach * reach;
    return c;
  }
  // Per channel the Hessian is [[1, A sin δ], [A sin δ, aA cos δ]] / dim, with
  // |a| ≤ radius on the ball. Spectral norms are bounded by Frobenius norms.
  const double A = max_amplitude(task);
  const double r = radius;
  const double K = task.dim;
  c.L = std::sqrt(((r + A) * (r + A) + r * r * A * A) / K);
  c.beta = std::sqrt(1.0 + 2.0 * A * A + r * r * A * A) / K;
  c.H = A * std::sqrt(3.0 + r * r) / K;
  c.M = 0.5 * (r + A) * (r + A);
  return c;
}

SampleBatch draw_batch(const TaskSpec& task, Side side, int k, std::mt19937_64& rng) {
  require(k >= 1, "batch size must be >= 1");
  SampleBatch batch;
  if (task.family == Family::QuadraticBowl) {
    const Vec& c = task.params(side);
    batch.points.resize(k, task.dim);
    for (int j = 0; j < k; ++j)
      batch.points.row(j) = (c + gaussian(task.dim, task.sample_spread, rng)).transpose();
  } else {
    std::uniform_real_distribution<double> x(0.0, kTwoPi);
    batch.inputs.resize(k, task.dim);
    for (int j = 0; j < k; ++j)
      for (int ch = 0; ch < task.dim; ++ch) batch.inputs(j, ch) = x(rng);
  }
  return batch;
}

// Per-sample sine loss is r² with r = a sin(x+φ) − A sin(x+Φ); its expectation
// over one period matches true_loss.
Vec batch_grad(const TaskSpec& task, Side side, const SampleBatch& batch, const Vec& w) {
  check_point(task, w);
  if (task.family == Family::QuadraticBowl) {
    if (batch.points.cols() != task.dim) throw ParameterError("batch does not match task");
    return w - batch.points.colwise().mean().transpose();
  }
  if (batch.inputs.cols() != task.dim) throw ParameterError("batch does not match task");
  const Vec& p = task.params(side);
  const int k = static_cast<int>(batch.inputs.rows());
  Vec g = Vec::Zero(w.size());
  for (int ch = 0; ch < task.dim; ++ch) {
    const double a = w[2 * ch], phi = w[2 * ch + 1];
    const double A = p[2 * ch], Phi = p[2 * ch + 1];
    for (int j = 0; j < k; ++j) {
      const double x = batch.inputs(j, ch);
      const double s = std::sin(x + phi), c = std::cos(x + phi);
      const double r = a * s - A * std::sin(x + Phi);
      g[2 * ch] += 2.0 * r * s;
      g[2 * ch + 1] += 2.0 * r * a * c;
    }
  }
  return g / (static_cast<double>(k) * task.dim);
}

Vec batch_hvp(const TaskSpec& task, Side side, const SampleBatch& batch, const Vec& w,
              const Vec& v) {
  check_point(task, w);
  check_point(task, v);
  if (task.family == Family::QuadraticBowl) return v;

  const Vec& p = task.params(side);
  const int k = static_cast<int>(batch.inputs.rows());
  Vec out = Vec::Zero(w.size());
  for (int ch = 0; ch < task.dim; ++ch) {
    const double a = w[2 * ch], phi = w[2 * ch + 1];
    const double A = p[2 * ch], Phi = p[2 * ch + 1];
    double haa = 0.0, hap = 0.0, hpp = 0.0;
    for (int j = 0; j < k; ++j) {
      const double x = batch.inputs(j, ch);
      const double s = std::sin(x + phi), c = std::cos(x + phi);
      const double r = a * s - A * std::sin(x + Phi);
      haa += 2.0 * s * s;
      hap += 2.0 * (a * s * c + r * c);
      hpp += 2.0 * (a * a * c * c - r * a * s);
    }
    out[2 * ch] = haa * v[2 * ch] + hap * v[2 * ch + 1];
    out[2 * ch + 1] = hap * v[2 * ch] + hpp * v[2 * ch + 1];
  }
  return out / (static_cast<double>(k) * task.dim);
}

Vec isotropic_noise(int dim, double sigma, std::mt19937_64& rng) {
  if (sigma == 0.0) return Vec::Zero(dim);
  return gaussian(dim, sigma / std::sqrt(static_cast<double>(dim)), rng);
}

GradientOracle::GradientOracle(TaskSpec task, Side side, double sigma, std::uint64_t seed)
    : task_(std::move(task)), side_(side), sigma_(sigma), rng_(seed) {
  require(sigma >= 0.0, "oracle sigma must be nonnegative");
  task_.validate();
}

Vec GradientOracle::grad(const Vec& w) {
  if (!task_.in_domain(w)) ++violations_;
  Vec g = true_grad(task_, side_, w);
  if (sigma_ > 0.0) {
    const double std = sigma_ / std::sqrt(static_cast<double>(g.size()));
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] += std * normal_(rng_);
  }
  return g;
}

}  // namespace oml
