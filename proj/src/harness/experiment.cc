#include "smooth/harness/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "smooth/core/errors.h"
#include "smooth/core/io.h"
#include "smooth/policy/checkpoint.h"
#include "smooth/ppo/ppo.h"

namespace smooth {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0
                   : std::accumulate(v.begin(), v.end(), 0.0) /
                         static_cast<double>(v.size());
}

// JSON has no NaN; a missing value is written as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number(const json& j) {
  return j.is_null() ? std::nan("") : j.get<double>();
}

}  // namespace

EvaluationResult evaluate_policy(const MeanPolicy& policy,
                                 const EnvFactory& factory,
                                 std::size_t episodes, std::uint64_t seed) {
  EvaluationResult out;
  std::unique_ptr<Environment> env = factory();
  for (std::size_t k = 0; k < episodes; ++k) {
    ActionTrace trace;
    trace.episode = static_cast<int>(k);
    trace.fs = env->control_frequency();
    Vec s = env->reset(seed + k);
    double ret = 0.0;
    for (;;) {
      Vec a = env->clip_action(policy(s));
      trace.actions.push_back(a);
      StepResult r = env->step(s, a);
      ret += r.reward;
      if (r.terminated || r.truncated) break;
      s = std::move(r.next_state);
    }
    out.traces.push_back(std::move(trace));
    out.returns.push_back(ret);
  }
  out.report = smoothness_score(out.traces, out.returns);
  return out;
}

std::string report_json(const EvaluationResult& result) {
  const SmoothnessReport& r = result.report;
  json j;
  j["episodes"] = r.episodes;
  j["return_mean"] = number(r.return_mean);
  j["return_std"] = number(r.return_std);
  j["sm"] = number(r.aggregate);
  j["sm_std"] = number(r.aggregate_std);
  j["sm_per_dim"] = r.per_dim;
  j["sm_per_episode"] = r.per_episode;
  j["returns"] = result.returns;
  return j.dump(2) + "\n";
}

std::string RunRecord::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["name"] = name;
  j["env"] = env_name;
  j["seed"] = seed;
  j["status"] = ok ? "ok" : "failed";
  if (!ok) j["error"] = error;
  j["steps"] = steps;
  j["return_mean"] = number(return_mean);
  j["return_std"] = number(return_std);
  j["sm_mean"] = number(sm_mean);
  j["sm_std"] = number(sm_std);
  j["wall_time_s"] = wall_time_s;
  j["checkpoint"] = checkpoint.generic_string();
  j["metrics"] = metrics.generic_string();
  return j.dump(2) + "\n";
}

RunRecord RunRecord::from_json(const std::string& text) {
  RunRecord r;
  try {
    json j = json::parse(text);
    r.config_hash = j.at("config_hash").get<std::string>();
    r.name = j.at("name").get<std::string>();
    r.env_name = j.at("env").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.ok = j.at("status").get<std::string>() == "ok";
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    r.steps = j.at("steps").get<std::uint64_t>();
    r.return_mean = number(j.at("return_mean"));
    r.return_std = number(j.at("return_std"));
    r.sm_mean = number(j.at("sm_mean"));
    r.sm_std = number(j.at("sm_std"));
    r.wall_time_s = j.at("wall_time_s").get<double>();
    r.checkpoint = j.at("checkpoint").get<std::string>();
    r.metrics = j.at("metrics").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(std::string("bad run record: ") + e.what());
  }
  return r;
}

fs::path experiment_dir(const ExperimentConfig& config) {
  return config.output / config_hash(config);
}

RunRecord run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  auto start = std::chrono::steady_clock::now();
  const fs::path dir = experiment_dir(config) / std::to_string(seed);
  fs::create_directories(dir);

  RunRecord record;
  record.config_hash = config_hash(config);
  record.name = config.name;
  record.env_name = config.env_name;
  record.seed = seed;
  record.checkpoint = dir / "checkpoint.json";
  record.metrics = dir / "metrics.csv";

  PpoConfig ppo = config.ppo;
  ppo.seed = seed;
  EnvFactory factory = config.env_factory();
  std::unique_ptr<Environment> probe = factory();
  ActorNetwork actor = make_actor(*probe, ppo);
  CriticNetwork critic = make_critic(*probe, ppo);

  std::string csv = metrics_csv_header() + "\n";
  try {
    train(factory, actor, critic, config.regularizer, ppo,
          [&](const IterationRecord& it) {
            csv += metrics_csv_row(it) + "\n";
            record.steps = it.steps;
          });
  } catch (const NumericError& e) {
    record.ok = false;
    record.error = e.what();
  }
  write_file_atomic(record.metrics, csv);

  if (record.ok) {
    save_checkpoint(record.checkpoint, actor, critic, record.config_hash);
    EvaluationResult eval =
        evaluate_policy(actor.mean_policy(), factory,
                        config.evaluation.episodes, config.evaluation.seed);
    write_file_atomic(dir / "traces.csv", traces_to_csv(eval.traces));
    write_file_atomic(dir / "report.json", report_json(eval));
    record.return_mean = eval.report.return_mean;
    record.return_std = eval.report.return_std;
    record.sm_mean = eval.report.aggregate;
    record.sm_std = eval.report.aggregate_std;
  } else {
    record.return_mean = record.return_std = std::nan("");
    record.sm_mean = record.sm_std = std::nan("");
  }
  record.wall_time_s = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  write_file_atomic(dir / "record.json", record.to_json());
  return record;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config,
                                      std::size_t threads) {
  fs::create_directories(experiment_dir(config));
  write_file_atomic(experiment_dir(config) / "config.ini",
                    serialize_config(config));
  const std::size_t n = config.seeds.size();
  std::vector<RunRecord> records(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        records[i] = run_seed(config, config.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t slots = std::clamp<std::size_t>(threads, 1, n == 0 ? 1 : n);
  if (slots == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < slots; ++t) pool.emplace_back(worker);
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

std::size_t worker_threads() {
  if (const char* env = std::getenv("SMOOTHCTL_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::vector<RunRecord> load_records(const std::vector<fs::path>& dirs) {
  std::vector<RunRecord> out;
  for (const fs::path& dir : dirs) {
    if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
    std::vector<fs::path> files;
    if (fs::exists(dir / "record.json")) files.push_back(dir / "record.json");
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "record.json")) {
        files.push_back(entry.path() / "record.json");
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error("no run records under " + dir.string());
    for (const fs::path& f : files) {
      out.push_back(RunRecord::from_json(read_file(f)));
    }
  }
  return out;
}

}  // namespace smooth
