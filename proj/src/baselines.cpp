#include "oml/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace oml {

std::string to_string(BaselineKind k) { return k == BaselineKind::TFS ? "tfs" : "toe"; }

BaselineKind baseline_kind_from_string(const std::string& s) {
  if (s == "tfs" || s == "TFS") return BaselineKind::TFS;
  if (s == "toe" || s == "TOE") return BaselineKind::TOE;
  throw ParameterError("unknown baseline: " + s);
}

void BaselineConfig::validate() const {
  require(inner_steps >= 1, "baseline inner_steps must be >= 1");
  if (step_size) require(*step_size > 0.0, "baseline step_size must be positive");
  if (toe_buffer_cap) require(*toe_buffer_cap >= 1, "toe_buffer_cap must be >= 1");
}

double default_baseline_step(const std::vector<TaskSpec>& stream) {
  double beta = 0.0;
  for (const auto& t : stream) beta = std::max(beta, constants_of(t).beta);
  require(beta > 0.0, "stream has no curvature to size the baseline step");
  return 0.5 / beta;
}

namespace {

struct Component {
  const TaskSpec* task;
  Side side;
};

Vec train_on(const std::vector<Component>& parts, int dim, int steps, double step) {
  Vec w = Vec::Zero(dim);
  const double weight = 1.0 / static_cast<double>(parts.size());
  for (int k = 0; k < steps; ++k) {
    Vec g = Vec::Zero(dim);
    for (const auto& p : parts) g += true_grad(*p.task, p.side, w);
    w -= step * weight * g;
    require_finite(w, "baseline iterate");
  }
  return w;
}

}  // namespace

std::vector<double> run_baseline(const std::vector<TaskSpec>& stream, const BaselineConfig& cfg) {
  cfg.validate();
  std::vector<double> losses;
  if (stream.empty()) return losses;
  const double step = cfg.step_size.value_or(default_baseline_step(stream));
  const int dim = stream.front().param_dim();

  std::deque<const TaskSpec*> past;
  std::vector<Component> parts;
  for (const auto& task : stream) {
    parts.clear();
    if (cfg.kind == BaselineKind::TOE) {
      for (const TaskSpec* p : past) {
        parts.push_back({p, Side::Train});
        parts.push_back({p, Side::Test});
      }
    }
    parts.push_back({&task, Side::Train});
    const Vec w = train_on(parts, dim, cfg.inner_steps, step);
    losses.push_back(true_loss(task, Side::Test, w));

    past.push_back(&task);
    if (cfg.toe_buffer_cap && past.size() > static_cast<std::size_t>(*cfg.toe_buffer_cap))
      past.pop_front();
  }
  return losses;
}

}  // namespace oml
