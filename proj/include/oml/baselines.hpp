#ifndef OML_BASELINES_HPP
#define OML_BASELINES_HPP

#include "oml/task_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace oml {

/// Per-round retraining baselines. Each round starts from a fresh w = 0 and
/// runs fixed-step gradient descent:
///   TFS - on the current task's train loss only;
///   TOE - on the uniform mixture of every past task's train and test losses
///         plus the current train loss.
/// Both report the current task's test loss at the trained point.
enum class BaselineKind { TFS, TOE };

std::string to_string(BaselineKind k);
BaselineKind baseline_kind_from_string(const std::string& s);

struct BaselineConfig {
  BaselineKind kind = BaselineKind::TFS;
  int inner_steps = 100;
  std::optional<double> step_size;      // unset: 0.5 / β of the stream
  std::optional<int> toe_buffer_cap;    // most recent past tasks TOE keeps

  void validate() const;
};

/// 0.5 / (largest smoothness constant over the stream).
double default_baseline_step(const std::vector<TaskSpec>& stream);

std::vector<double> run_baseline(const std::vector<TaskSpec>& stream, const BaselineConfig& cfg);

}  // namespace oml

#endif  // OML_BASELINES_HPP
