#include "oml/stream.hpp"

#include "oml/adapter.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>
#include <random>
#include <string>

namespace oml {

using nlohmann::json;

void StreamConfig::validate() const {
  require(dim >= 1, "dim must be >= 1");
  require(domain_radius > 0.0, "domain radius must be positive");
  require(T >= 1, "T must be >= 1");
  require(gen.spread >= 0.0 && gen.train_noise >= 0.0 && gen.test_noise >= 0.0 &&
              gen.sample_spread >= 0.0 && gen.center_scale >= 0.0,
          "generator scales must be nonnegative");
  require(gen.amplitude_min <= gen.amplitude_max && gen.phase_min <= gen.phase_max,
          "generator ranges must be ordered");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Vec stream_anchor(const StreamConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec dir(cfg.dim);
  do {
    for (int i = 0; i < cfg.dim; ++i) dir[i] = normal(rng);
  } while (dir.norm() == 0.0);
  return dir.normalized() * cfg.gen.center_scale;
}

std::vector<TaskSpec> generate_stream(const StreamConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Vec anchor = stream_anchor(cfg, seed);
  std::vector<TaskSpec> tasks;
  tasks.reserve(static_cast<std::size_t>(cfg.T));
  for (long t = 1; t <= cfg.T; ++t) {
    const std::uint64_t task_seed = derive_seed(seed, static_cast<std::uint64_t>(t), 2);
    std::mt19937_64 rng(task_seed);
    TaskSpec task = make_task(cfg.family, cfg.dim, rng, cfg.domain_radius, cfg.gen, anchor);
    task.seed = task_seed;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

namespace {

json to_array(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec from_array(const json& a) {
  if (!a.is_array()) throw InputError("expected a numeric array");
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

void write_stream(std::ostream& out, const std::vector<TaskSpec>& tasks) {
  for (const auto& t : tasks) {
    json rec = {{"family", to_string(t.family)},
                {"dim", t.dim},
                {"train", to_array(t.train_params)},
                {"test", to_array(t.test_params)},
                {"radius", t.domain_radius},
                {"sample_spread", t.sample_spread},
                {"seed", t.seed}};
    out << rec.dump() << '\n';
  }
}

std::vector<TaskSpec> read_stream(std::istream& in) {
  std::vector<TaskSpec> tasks;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      TaskSpec t;
      t.family = family_from_string(rec.at("family").get<std::string>());
      t.dim = rec.at("dim").get<int>();
      t.train_params = from_array(rec.at("train"));
      t.test_params = from_array(rec.at("test"));
      t.domain_radius = rec.at("radius").get<double>();
      t.sample_spread = rec.value("sample_spread", 1.0);
      t.seed = rec.at("seed").get<std::uint64_t>();
      t.validate();
      tasks.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw InputError("stream record " + std::to_string(lineno) + ": " + e.what());
    } catch (const ParameterError& e) {
      throw InputError("stream record " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return tasks;
}

LossConstants stream_constants(const std::vector<TaskSpec>& tasks, double alpha) {
  LossConstants c;
  for (const auto& t : tasks) c = max_of(c, certified_task_constants(t, alpha));
  return c;
}

}  // namespace oml
