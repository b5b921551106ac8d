// Command-line front end: run, compare, check-bounds, check-lemmas.
//
// Exit codes: 0 success, 1 a check failed, 2 configuration or input error,
// 3 numeric failure during a run.

#include "oml/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <random>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

// Flags that mirror ExperimentConfig. Only flags actually given override the
// config file (or built-in defaults).
struct RunFlags {
  std::string config_path;
  std::optional<long> T, m;
  std::optional<int> dim, batch_size, seed_count, threads;
  std::optional<std::string> family, layout, inner_mode, output_dir;
  std::optional<double> radius, center_scale, spread, train_noise, test_noise, sample_spread;
  std::optional<double> alpha, eta, b1, sigma, delta;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> baselines;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--T", T, "number of rounds");
    app->add_option("--m", m, "window size (default ceil(T/4))");
    app->add_option("--dim", dim, "task dimension");
    app->add_option("--family", family, "QuadraticBowl | SineRegression");
    app->add_option("--radius", radius, "domain radius");
    app->add_option("--layout", layout, "uniform | clustered | antipodal");
    app->add_option("--center-scale", center_scale);
    app->add_option("--spread", spread);
    app->add_option("--train-noise", train_noise);
    app->add_option("--test-noise", test_noise);
    app->add_option("--sample-spread", sample_spread);
    app->add_option("--alpha", alpha, "inner step size");
    app->add_option("--inner-mode", inner_mode, "exact | sampled");
    app->add_option("--batch-size", batch_size);
    app->add_option("--eta", eta);
    app->add_option("--b1", b1);
    app->add_option("--sigma", sigma, "oracle noise scale");
    app->add_option("--delta", delta, "failure probability for the bound");
    app->add_option("--seeds", seeds, "explicit seed list")->delimiter(',');
    app->add_option("--seed-count", seed_count, "use seeds 0..N-1");
    app->add_option("--baselines", baselines, "tfs,toe")->delimiter(',');
    app->add_option("-o,--output-dir", output_dir);
    app->add_option("--threads", threads);
  }

  oml::ExperimentConfig resolve() const {
    oml::ExperimentConfig cfg = config_path.empty() ? oml::ExperimentConfig{}
                                                    : oml::load_config(config_path);
    json j = json::object();
    json g = json::object();
    if (T) j["T"] = *T;
    if (m) j["m"] = *m;
    if (dim) j["dim"] = *dim;
    if (family) j["family"] = *family;
    if (radius) j["domain_radius"] = *radius;
    if (layout) g["layout"] = *layout;
    if (center_scale) g["center_scale"] = *center_scale;
    if (spread) g["spread"] = *spread;
    if (train_noise) g["train_noise"] = *train_noise;
    if (test_noise) g["test_noise"] = *test_noise;
    if (sample_spread) g["sample_spread"] = *sample_spread;
    if (!g.empty()) j["generator"] = g;
    if (alpha) j["alpha"] = *alpha;
    if (inner_mode) j["inner_mode"] = *inner_mode;
    if (batch_size) j["batch_size"] = *batch_size;
    if (eta) j["eta"] = *eta;
    if (b1) j["b1"] = *b1;
    if (sigma) j["sigma"] = *sigma;
    if (delta) j["delta"] = *delta;
    if (!seeds.empty()) j["seeds"] = seeds;
    if (seed_count) j["seed_count"] = *seed_count;
    if (!baselines.empty()) j["baselines"] = baselines;
    if (output_dir) j["output_dir"] = *output_dir;
    if (threads) j["threads"] = *threads;
    cfg = oml::config_from_json(j, cfg);
    cfg.validate();
    return cfg;
  }
};

int cmd_run(const RunFlags& flags) {
  const auto cfg = flags.resolve();
  const auto results = oml::run_experiment(cfg);
  for (const auto& r : results)
    std::cout << "seed " << r.seed << ": R_m(T) = " << oml::format_double(r.ledger.running_regret())
              << ", bound = " << oml::format_double(r.bound) << '\n';
  std::cout << "wrote " << cfg.output_dir << '\n';
  return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out_path) {
  std::vector<fs::path> paths(dirs.begin(), dirs.end());
  const auto table = oml::compare(paths);
  if (out_path.empty()) {
    oml::write_comparison(std::cout, table);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw oml::InputError("cannot write " + out_path);
    oml::write_comparison(out, table);
  }
  return 0;
}

int cmd_check_bounds_dir(const std::string& dir) {
  std::ifstream cfg_in(fs::path(dir) / "config.json");
  std::ifstream in(fs::path(dir) / "summary.jsonl");
  if (!cfg_in || !in) throw oml::InputError(dir + " does not contain config.json and summary.jsonl");
  const double delta = json::parse(cfg_in).at("delta").get<double>();
  int runs = 0, violated = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json s = json::parse(line);
    ++runs;
    if (s.at("bound_violated").get<bool>()) ++violated;
  }
  if (runs == 0) throw oml::InputError("summary.jsonl is empty");
  const double fraction = static_cast<double>(violated) / runs;
  json report = {{"runs", runs}, {"violations", violated}, {"fraction", fraction},
                 {"delta", delta}, {"pass", fraction <= delta}};
  std::cout << report.dump(2) << '\n';
  return fraction <= delta ? 0 : kCheckFailed;
}

int cmd_check_lemmas(const RunFlags& flags, int draws) {
  const auto cfg = flags.resolve();
  json report;
  bool ok = true;

  // Lemma 2 at the initial point with a full window from the first seed.
  {
    const auto stream = oml::generate_stream(cfg.stream, cfg.seeds.front());
    oml::WindowBuffer window(static_cast<int>(cfg.window()));
    for (long t = 1; t <= cfg.window(); ++t)
      window.push(oml::MetaGradientOracle(stream[static_cast<std::size_t>(t - 1)], cfg.adapter,
                                          cfg.sigma,
                                          oml::derive_seed(cfg.seeds.front(), t, 3)));
    const auto r = oml::check_lemma2(window, cfg.initial_point(), draws);
    report["lemma2"] = {{"draws", r.draws},
                        {"mean_sq_deviation", r.mean_sq_deviation},
                        {"sigma_sq_over_m", r.variance_bound},
                        {"max_coord_bias", r.max_coord_bias},
                        {"bias_tolerance", r.bias_tolerance},
                        {"pass", r.pass()}};
    ok = ok && r.pass();
  }

  const auto runs = oml::run_all(cfg);
  {
    std::vector<oml::RegretLedger> ledgers;
    double M = 0.0;
    for (const auto& r : runs) {
      ledgers.push_back(r.ledger);
      M = std::max(M, r.constants.M);
    }
    const auto r = oml::check_lemma3(ledgers, M, cfg.window());
    report["lemma3"] = {{"runs", r.runs},
                        {"mean_telescoped_sum", r.mean_sum},
                        {"std_error", r.std_error},
                        {"bound", r.bound},
                        {"pass", !r.exceeded}};
    ok = ok && !r.exceeded;
  }
  {
    bool all = true;
    json per_run = json::array();
    for (const auto& r : runs) {
      per_run.push_back({{"seed", r.seed}, {"lhs", r.lemma4.lhs}, {"rhs", r.lemma4.rhs}});
      all = all && r.lemma4.holds();
    }
    report["lemma4"] = {{"accumulator_checks", per_run}, {"pass", all}};
    ok = ok && all;
  }
  std::cout << report.dump(2) << '\n';
  return ok ? 0 : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-convex online meta-learning with AdaGrad-Norm: experiments and checks"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "run the experiment and write traces");
  run_flags.attach(run);

  std::vector<std::string> compare_dirs;
  std::string compare_out;
  auto* cmp = app.add_subcommand("compare", "per-round test-loss comparison across run directories");
  cmp->add_option("dirs", compare_dirs, "run output directories")->required();
  cmp->add_option("-o,--out", compare_out, "CSV output (default stdout)");

  auto* bounds = app.add_subcommand("check-bounds", "evaluate the local-regret bound");
  std::string run_dir;
  oml::BoundInputs bi;
  bounds->add_option("--run-dir", run_dir, "check every seed of a finished run");
  bounds->add_option("--T", bi.T);
  bounds->add_option("--m", bi.m);
  bounds->add_option("--eta", bi.eta);
  bounds->add_option("--b1", bi.b1);
  bounds->add_option("--delta", bi.delta);
  bounds->add_option("--sigma", bi.sigma);
  bounds->add_option("--M", bi.M);
  bounds->add_option("--L-prime", bi.L_prime);
  bounds->add_option("--beta-prime", bi.beta_prime);

  RunFlags lemma_flags;
  int draws = 10000;
  auto* lemmas = app.add_subcommand("check-lemmas", "Monte-Carlo checks of the supporting lemmas");
  lemma_flags.attach(lemmas);
  lemmas->add_option("--draws", draws, "oracle draws for the variance check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*cmp) return cmd_compare(compare_dirs, compare_out);
    if (*bounds) {
      if (!run_dir.empty()) return cmd_check_bounds_dir(run_dir);
      const json out = {{"C", oml::theorem1_C(bi)}, {"bound", oml::theorem1_bound(bi)}};
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    if (*lemmas) return cmd_check_lemmas(lemma_flags, draws);
  } catch (const oml::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const oml::ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const oml::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
