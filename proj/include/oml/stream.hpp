#ifndef OML_STREAM_HPP
#define OML_STREAM_HPP

#include "oml/task_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace oml {

struct StreamConfig {
  Family family = Family::QuadraticBowl;
  int dim = 5;
  double domain_radius = 10.0;
  long T = 200;
  GeneratorParams gen;

  void validate() const;
};

/// Draws T tasks. Task t is generated from its own seed, derived from the
/// stream seed and t, so any single task can be regenerated in isolation.
std::vector<TaskSpec> generate_stream(const StreamConfig& cfg, std::uint64_t seed);

/// The anchor point shared by the tasks of one stream.
Vec stream_anchor(const StreamConfig& cfg, std::uint64_t seed);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Line-delimited task records, one JSON object per task:
/// {"family":..,"dim":..,"train":[..],"test":[..],"radius":..,"sample_spread":..,"seed":..}
void write_stream(std::ostream& out, const std::vector<TaskSpec>& tasks);
std::vector<TaskSpec> read_stream(std::istream& in);

/// Largest base-loss constants over the stream, certified where the meta-loss
/// evaluates them (see certified_task_constants).
LossConstants stream_constants(const std::vector<TaskSpec>& tasks, double alpha);

}  // namespace oml

#endif  // OML_STREAM_HPP
