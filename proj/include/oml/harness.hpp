#ifndef OML_HARNESS_HPP
#define OML_HARNESS_HPP

#include "oml/adapter.hpp"
#include "oml/analysis.hpp"
#include "oml/baselines.hpp"
#include "oml/stream.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace oml {

struct ExperimentConfig {
  StreamConfig stream;
  long m = 0;  // 0 selects ⌈T/4⌉
  AdapterConfig adapter;
  double eta = 1.0;
  double b1 = 1.0;
  double sigma = 0.5;
  double delta = 0.1;
  std::vector<std::uint64_t> seeds{0};
  std::vector<BaselineConfig> baselines;
  std::optional<Vec> w1;  // unset: the zero vector
  std::string output_dir = "oml_out";
  int threads = 1;

  long window() const;
  Vec initial_point() const;
  void validate() const;
};

/// Config files are JSON objects; every key is optional and unknown keys are
/// rejected. See README for the full key list.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

struct BaselineTrace {
  BaselineConfig config;
  std::vector<double> test_loss;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<TaskSpec> stream;
  RegretLedger ledger;
  std::vector<Vec> iterates;  // w_1 … w_{T+1}
  double max_iterate_norm = 0.0;
  long domain_violations = 0;  // rounds whose w_t or w_{t+1} left the domain ball
  MetaConstants constants;
  BoundInputs bound_inputs;
  double C = 0.0;
  double bound = 0.0;
  double lemma3_sum = 0.0;     // Σ_t F_{t,m}(w_t) − F_{t,m}(w_{t+1})
  Lemma4Result lemma4;         // on the accumulator increments ‖G_t‖², a₀ = b₁²
  std::vector<BaselineTrace> baselines;
  std::optional<std::string> error;  // set when the run stopped on a numeric failure
};

/// Runs Online Meta-Learning with AdaGrad-Norm on one seed's stream, entirely
/// in memory. A numeric failure stops the run and is reported in `error`; the
/// rounds completed so far stay in the ledger.
RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed);
RunResult run_on_stream(const ExperimentConfig& cfg, std::vector<TaskSpec> stream,
                        std::uint64_t seed);

/// All seeds (in parallel across cfg.threads workers), results in seed order.
std::vector<RunResult> run_all(const ExperimentConfig& cfg);

/// Writes config.json, per-seed stream/trace/baseline files and summary.jsonl
/// under cfg.output_dir. Throws NumericError after flushing if any run failed.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg);

extern const std::vector<std::string> kTraceColumns;

void write_trace(const std::filesystem::path& path, const RegretLedger& ledger);
void write_baseline_trace(const std::filesystem::path& path, const std::vector<double>& losses);
nlohmann::json summarize(const RunResult& run);

struct Series {
  std::string label;
  std::vector<double> mean;
  std::vector<double> std_error;
  int runs = 0;
};

struct ComparisonTable {
  long T = 0;
  std::vector<Series> series;
};

/// Per-round mean ± standard error of the test loss for every method found in
/// each run directory (OML traces and every baseline).
ComparisonTable compare(const std::vector<std::filesystem::path>& dirs);
void write_comparison(std::ostream& out, const ComparisonTable& table);

/// Test-loss column of one trace CSV.
std::vector<double> read_test_losses(const std::filesystem::path& csv);

std::string format_double(double v);

}  // namespace oml

#endif  // OML_HARNESS_HPP
