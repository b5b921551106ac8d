#include "oml/harness.hpp"

#include "oml/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace oml {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kTraceColumns = {
    "t",       "F_t_at_wt", "F_t_at_wt1",  "grad_norm_sq", "running_regret",
    "b_next",  "eff_step",  "domain_flag", "test_loss"};

long ExperimentConfig::window() const {
  return m > 0 ? m : (stream.T + 3) / 4;
}

Vec ExperimentConfig::initial_point() const {
  const int n = stream.family == Family::SineRegression ? 2 * stream.dim : stream.dim;
  return w1 ? *w1 : Vec(Vec::Zero(n));
}

void ExperimentConfig::validate() const {
  stream.validate();
  adapter.validate();
  require(m >= 0, "m must be positive (or 0 for the default)");
  require(window() >= 1 && window() <= stream.T, "need 1 <= m <= T");
  require(eta > 0.0 && b1 > 0.0, "eta and b1 must be positive");
  require(sigma >= 0.0, "sigma must be nonnegative");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(!seeds.empty(), "at least one seed is required");
  require(threads >= 1, "threads must be >= 1");
  for (const auto& b : baselines) b.validate();
  if (w1) {
    const int n = stream.family == Family::SineRegression ? 2 * stream.dim : stream.dim;
    require(w1->size() == n, "w1 has the wrong dimension");
    require(w1->allFinite(), "w1 must be finite");
  }
}

// ---------------------------------------------------------------------------
// Config (de)serialization

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ParameterError("unknown config key '" + k + "' in " + where);
  }
}

Vec vec_from_json(const json& a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a.at(i).get<double>();
  return v;
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

BaselineConfig baseline_from_json(const json& j) {
  if (j.is_string()) {
    BaselineConfig b;
    b.kind = baseline_kind_from_string(j.get<std::string>());
    return b;
  }
  reject_unknown(j, {"kind", "inner_steps", "step_size", "toe_buffer_cap"}, "baselines");
  BaselineConfig b;
  b.kind = baseline_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("inner_steps")) b.inner_steps = j["inner_steps"].get<int>();
  if (j.contains("step_size") && !j["step_size"].is_null()) b.step_size = j["step_size"].get<double>();
  if (j.contains("toe_buffer_cap") && !j["toe_buffer_cap"].is_null())
    b.toe_buffer_cap = j["toe_buffer_cap"].get<int>();
  return b;
}

json baseline_to_json(const BaselineConfig& b) {
  json j = {{"kind", to_string(b.kind)}, {"inner_steps", b.inner_steps}};
  j["step_size"] = b.step_size ? json(*b.step_size) : json(nullptr);
  j["toe_buffer_cap"] = b.toe_buffer_cap ? json(*b.toe_buffer_cap) : json(nullptr);
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const json& j, ExperimentConfig cfg) {
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  try {
    reject_unknown(j,
                   {"T", "m", "dim", "family", "domain_radius", "generator", "alpha", "inner_mode",
                    "batch_size", "eta", "b1", "sigma", "delta", "seeds", "seed_count", "baselines",
                    "w1", "output_dir", "threads"},
                   "config");
    if (j.contains("T")) cfg.stream.T = j["T"].get<long>();
    if (j.contains("m")) cfg.m = j["m"].get<long>();
    if (j.contains("dim")) cfg.stream.dim = j["dim"].get<int>();
    if (j.contains("family")) cfg.stream.family = family_from_string(j["family"].get<std::string>());
    if (j.contains("domain_radius")) cfg.stream.domain_radius = j["domain_radius"].get<double>();
    if (j.contains("generator")) {
      const json& g = j["generator"];
      reject_unknown(g,
                     {"layout", "center_scale", "spread", "train_noise", "test_noise",
                      "sample_spread", "amplitude", "phase"},
                     "generator");
      auto& gen = cfg.stream.gen;
      if (g.contains("layout")) gen.layout = layout_from_string(g["layout"].get<std::string>());
      if (g.contains("center_scale")) gen.center_scale = g["center_scale"].get<double>();
      if (g.contains("spread")) gen.spread = g["spread"].get<double>();
      if (g.contains("train_noise")) gen.train_noise = g["train_noise"].get<double>();
      if (g.contains("test_noise")) gen.test_noise = g["test_noise"].get<double>();
      if (g.contains("sample_spread")) gen.sample_spread = g["sample_spread"].get<double>();
      if (g.contains("amplitude")) {
        gen.amplitude_min = g["amplitude"].at(0).get<double>();
        gen.amplitude_max = g["amplitude"].at(1).get<double>();
      }
      if (g.contains("phase")) {
        gen.phase_min = g["phase"].at(0).get<double>();
        gen.phase_max = g["phase"].at(1).get<double>();
      }
    }
    if (j.contains("alpha")) cfg.adapter.alpha = j["alpha"].get<double>();
    if (j.contains("inner_mode")) {
      const auto mode = j["inner_mode"].get<std::string>();
      if (mode == "exact") cfg.adapter.inner_mode = InnerMode::ExactExpectation;
      else if (mode == "sampled") cfg.adapter.inner_mode = InnerMode::SampledBatch;
      else throw ParameterError("inner_mode must be 'exact' or 'sampled'");
    }
    if (j.contains("batch_size")) cfg.adapter.batch_size = j["batch_size"].get<int>();
    if (j.contains("eta")) cfg.eta = j["eta"].get<double>();
    if (j.contains("b1")) cfg.b1 = j["b1"].get<double>();
    if (j.contains("sigma")) cfg.sigma = j["sigma"].get<double>();
    if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("seed_count")) {
      const int n = j["seed_count"].get<int>();
      require(n >= 1, "seed_count must be >= 1");
      cfg.seeds.clear();
      for (int s = 0; s < n; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (j.contains("baselines")) {
      cfg.baselines.clear();
      for (const auto& b : j["baselines"]) cfg.baselines.push_back(baseline_from_json(b));
    }
    if (j.contains("w1")) {
      if (j["w1"].is_null()) cfg.w1.reset();
      else cfg.w1 = vec_from_json(j["w1"]);
    }
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  const auto& g = cfg.stream.gen;
  json j;
  j["T"] = cfg.stream.T;
  j["m"] = cfg.window();
  j["dim"] = cfg.stream.dim;
  j["family"] = to_string(cfg.stream.family);
  j["domain_radius"] = cfg.stream.domain_radius;
  j["generator"] = {{"layout", to_string(g.layout)},
                    {"center_scale", g.center_scale},
                    {"spread", g.spread},
                    {"train_noise", g.train_noise},
                    {"test_noise", g.test_noise},
                    {"sample_spread", g.sample_spread},
                    {"amplitude", {g.amplitude_min, g.amplitude_max}},
                    {"phase", {g.phase_min, g.phase_max}}};
  j["alpha"] = cfg.adapter.alpha;
  j["inner_mode"] = cfg.adapter.inner_mode == InnerMode::SampledBatch ? "sampled" : "exact";
  j["batch_size"] = cfg.adapter.batch_size;
  j["eta"] = cfg.eta;
  j["b1"] = cfg.b1;
  j["sigma"] = cfg.sigma;
  j["delta"] = cfg.delta;
  j["seeds"] = cfg.seeds;
  j["baselines"] = json::array();
  for (const auto& b : cfg.baselines) j["baselines"].push_back(baseline_to_json(b));
  j["w1"] = vec_to_json(cfg.initial_point());
  j["output_dir"] = cfg.output_dir;
  j["threads"] = cfg.threads;
  return j;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParameterError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Running

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  return run_on_stream(cfg, generate_stream(cfg.stream, seed), seed);
}

RunResult run_on_stream(const ExperimentConfig& cfg, std::vector<TaskSpec> stream,
                        std::uint64_t seed) {
  cfg.validate();
  if (stream.empty()) throw InputError("empty task stream");
  RunResult r;
  r.seed = seed;
  r.stream = std::move(stream);
  const long T = static_cast<long>(r.stream.size());
  const long m = cfg.window();
  require(m <= T, "window m exceeds stream length");

  AdaGradNorm opt(cfg.initial_point(), cfg.eta, cfg.b1);
  WindowBuffer window(static_cast<int>(m));
  std::vector<double> increments{cfg.b1 * cfg.b1};
  r.iterates.push_back(opt.w());
  r.max_iterate_norm = opt.w().norm();

  try {
    for (long t = 1; t <= T; ++t) {
      const TaskSpec& task = r.stream[static_cast<std::size_t>(t - 1)];
      const Vec wt = opt.w();
      window.push(MetaGradientOracle(task, cfg.adapter, cfg.sigma,
                                     derive_seed(seed, static_cast<std::uint64_t>(t), 3)));
      LedgerRow row;
      row.t = t;
      row.test_loss = window.newest().value(wt);
      row.F_at_wt = window.value(wt);
      row.grad_norm_sq = window.true_grad(wt).squaredNorm();

      const Vec G = window.stoch_grad(wt);
      opt.step(G);
      const Vec& wt1 = opt.w();
      row.F_at_wt1 = window.value(wt1);
      row.b_next = opt.b();
      row.eff_step = opt.effective_step();
      row.domain_flag = !task.in_domain(wt) || !task.in_domain(wt1);
      if (!std::isfinite(row.F_at_wt) || !std::isfinite(row.F_at_wt1) ||
          !std::isfinite(row.test_loss))
        throw NumericError("non-finite loss at round " + std::to_string(t));
      r.ledger.record_round(row);
      increments.push_back(G.squaredNorm());
      if (row.domain_flag) ++r.domain_violations;
      r.lemma3_sum += row.F_at_wt - row.F_at_wt1;
      r.iterates.push_back(wt1);
      r.max_iterate_norm = std::max(r.max_iterate_norm, wt1.norm());
    }
  } catch (const NumericError& e) {
    r.error = e.what();
  }

  const LossConstants base = stream_constants(r.stream, cfg.adapter.alpha);
  r.constants = meta_constants(base, cfg.adapter.alpha);
  r.bound_inputs = BoundInputs{T, m, cfg.eta, cfg.b1, cfg.delta, cfg.sigma,
                               r.constants.M, r.constants.L_prime, r.constants.beta_prime};
  r.C = theorem1_C(r.bound_inputs);
  r.bound = theorem1_bound(r.bound_inputs);
  r.lemma4 = check_lemma4(NonincreasingFunction::reciprocal(), increments);

  if (!r.error) {
    for (const auto& b : cfg.baselines) r.baselines.push_back({b, run_baseline(r.stream, b)});
  }
  return r;
}

std::vector<RunResult> run_all(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<RunResult> results(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < results.size(); i = next++)
      results[i] = run_single(cfg, cfg.seeds[i]);
  };
  const int n = std::min<int>(cfg.threads, static_cast<int>(results.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
  }
  return results;
}

// ---------------------------------------------------------------------------
// Output

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void write_header(std::ostream& out) {
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i)
    out << (i ? "," : "") << kTraceColumns[i];
  out << '\n';
}

std::vector<std::string> baseline_labels(const std::vector<BaselineConfig>& cfgs) {
  std::map<std::string, int> seen;
  std::vector<std::string> labels;
  for (const auto& b : cfgs) {
    const std::string base = to_string(b.kind);
    const int k = seen[base]++;
    labels.push_back(k == 0 ? base : base + std::to_string(k + 1));
  }
  return labels;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

void write_trace(const fs::path& path, const RegretLedger& ledger) {
  auto out = open_out(path);
  write_header(out);
  for (const auto& r : ledger.rows()) {
    out << r.t << ',' << format_double(r.F_at_wt) << ',' << format_double(r.F_at_wt1) << ','
        << format_double(r.grad_norm_sq) << ',' << format_double(r.running_regret) << ','
        << format_double(r.b_next) << ',' << format_double(r.eff_step) << ','
        << (r.domain_flag ? 1 : 0) << ',' << format_double(r.test_loss) << '\n';
  }
}

// Baselines share the trace schema; columns that only exist for the
// meta-learner are written as nan.
void write_baseline_trace(const fs::path& path, const std::vector<double>& losses) {
  auto out = open_out(path);
  write_header(out);
  for (std::size_t i = 0; i < losses.size(); ++i)
    out << i + 1 << ",nan,nan,nan,nan,nan,nan,0," << format_double(losses[i]) << '\n';
}

json summarize(const RunResult& run) {
  json s;
  s["seed"] = run.seed;
  s["T"] = run.bound_inputs.T;
  s["m"] = run.bound_inputs.m;
  s["rounds_completed"] = run.ledger.rounds();
  s["regret"] = run.ledger.running_regret();
  s["C"] = run.C;
  s["theorem1_bound"] = run.bound;
  s["bound_violated"] = run.ledger.running_regret() > run.bound;
  s["constants"] = {{"M", run.constants.M},
                    {"L_prime", run.constants.L_prime},
                    {"beta_prime", run.constants.beta_prime}};
  const double lemma3_bound =
      4.0 * run.constants.M * static_cast<double>(run.bound_inputs.T) /
      static_cast<double>(run.bound_inputs.m);
  s["lemma3"] = {{"telescoped_sum", run.lemma3_sum},
                 {"bound", lemma3_bound},
                 {"exceeded", run.lemma3_sum > lemma3_bound}};
  s["lemma4"] = {{"lhs", run.lemma4.lhs}, {"rhs", run.lemma4.rhs}, {"holds", run.lemma4.holds()}};
  if (run.ledger.rounds() >= 2) s["regret_rate_decreasing"] = regret_rate_decreasing(run.ledger);
  s["max_iterate_norm"] = run.max_iterate_norm;
  s["domain_violations"] = run.domain_violations;
  std::vector<double> oml_losses;
  for (const auto& r : run.ledger.rows()) oml_losses.push_back(r.test_loss);
  s["mean_test_loss"] = mean_of(oml_losses);
  std::vector<BaselineConfig> cfgs;
  for (const auto& b : run.baselines) cfgs.push_back(b.config);
  const auto labels = baseline_labels(cfgs);
  s["baselines"] = json::object();
  for (std::size_t i = 0; i < run.baselines.size(); ++i)
    s["baselines"][labels[i]] = {{"mean_test_loss", mean_of(run.baselines[i].test_loss)}};
  s["error"] = run.error ? json(*run.error) : json(nullptr);
  return s;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "config.json");
    out << to_json(cfg).dump(2) << '\n';
  }
  auto results = run_all(cfg);
  const auto labels = baseline_labels(cfg.baselines);
  auto summary = open_out(dir / "summary.jsonl");
  std::optional<std::string> failure;
  for (const auto& r : results) {
    const std::string tag = "seed" + std::to_string(r.seed);
    {
      auto out = open_out(dir / ("stream_" + tag + ".jsonl"));
      write_stream(out, r.stream);
    }
    write_trace(dir / ("trace_" + tag + ".csv"), r.ledger);
    for (std::size_t i = 0; i < r.baselines.size(); ++i)
      write_baseline_trace(dir / ("baseline_" + labels[i] + "_" + tag + ".csv"),
                           r.baselines[i].test_loss);
    summary << summarize(r).dump() << '\n';
    if (r.error && !failure) failure = "seed " + std::to_string(r.seed) + ": " + *r.error;
  }
  summary.flush();
  if (failure) throw NumericError(*failure);
  return results;
}

// ---------------------------------------------------------------------------
// Comparison

std::vector<double> read_test_losses(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw InputError("cannot read " + csv.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(csv.string() + " is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto it = std::find(header.begin(), header.end(), "test_loss");
  if (it == header.end()) throw InputError(csv.string() + " has no test_loss column");
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<double> losses;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    bool found = false;
    while (std::getline(ss, cell, ',')) {
      if (k++ == col) {
        try {
          losses.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw InputError(csv.string() + ": bad test_loss value '" + cell + "'");
        }
        found = true;
        break;
      }
    }
    if (!found) throw InputError(csv.string() + ": short row");
  }
  return losses;
}

ComparisonTable compare(const std::vector<fs::path>& dirs) {
  if (dirs.empty()) throw InputError("no run directories given");
  ComparisonTable table;
  table.T = -1;
  std::map<std::string, int> dir_names;
  for (const auto& dir : dirs) {
    if (!fs::is_directory(dir)) throw InputError("not a run directory: " + dir.string());
    std::string name = fs::path(dir).lexically_normal().filename().string();
    if (name.empty()) name = fs::path(dir).lexically_normal().parent_path().filename().string();
    const int k = dir_names[name]++;
    if (k > 0) name += "#" + std::to_string(k + 1);

    // method -> sorted trace files
    std::map<std::string, std::vector<fs::path>> methods;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string f = entry.path().filename().string();
      if (entry.path().extension() != ".csv") continue;
      if (f.rfind("trace_seed", 0) == 0) {
        methods["oml"].push_back(entry.path());
      } else if (f.rfind("baseline_", 0) == 0) {
        const auto pos = f.find("_seed");
        if (pos == std::string::npos) continue;
        methods[f.substr(9, pos - 9)].push_back(entry.path());
      }
    }
    if (methods.empty()) throw InputError("no traces found in " + dir.string());

    for (auto& [method, files] : methods) {
      std::sort(files.begin(), files.end());
      std::vector<std::vector<double>> runs;
      for (const auto& f : files) runs.push_back(read_test_losses(f));
      const long T = static_cast<long>(runs.front().size());
      for (const auto& r : runs)
        if (static_cast<long>(r.size()) != T) throw InputError("traces in " + dir.string() + " differ in T");
      if (table.T >= 0 && table.T != T) throw InputError("run directories have mismatched T");
      table.T = T;

      Series s;
      s.label = name + "/" + method;
      s.runs = static_cast<int>(runs.size());
      s.mean.assign(static_cast<std::size_t>(T), 0.0);
      s.std_error.assign(static_cast<std::size_t>(T), 0.0);
      for (std::size_t t = 0; t < static_cast<std::size_t>(T); ++t) {
        double mean = 0.0;
        for (const auto& r : runs) mean += r[t];
        mean /= s.runs;
        double var = 0.0;
        for (const auto& r : runs) var += (r[t] - mean) * (r[t] - mean);
        s.mean[t] = mean;
        s.std_error[t] = s.runs > 1 ? std::sqrt(var / (s.runs - 1) / s.runs) : 0.0;
      }
      table.series.push_back(std::move(s));
    }
  }
  return table;
}

void write_comparison(std::ostream& out, const ComparisonTable& table) {
  out << 't';
  for (const auto& s : table.series) out << ',' << s.label << "_mean," << s.label << "_stderr";
  for (std::size_t i = 1; i < table.series.size(); ++i)
    out << ',' << table.series[i].label << "_minus_" << table.series[0].label;
  out << '\n';
  for (std::size_t t = 0; t < static_cast<std::size_t>(table.T); ++t) {
    out << t + 1;
    for (const auto& s : table.series)
      out << ',' << format_double(s.mean[t]) << ',' << format_double(s.std_error[t]);
    for (std::size_t i = 1; i < table.series.size(); ++i)
      out << ',' << format_double(table.series[i].mean[t] - table.series[0].mean[t]);
    out << '\n';
  }
}

}  // namespace oml
