#ifndef SMOOTH_HARNESS_EXPERIMENT_H_
#define SMOOTH_HARNESS_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "smooth/harness/config.h"
#include "smooth/metrics/spectrum.h"
#include "smooth/policy/networks.h"

namespace smooth {

struct EvaluationResult {
  std::vector<ActionTrace> traces;
  std::vector<double> returns;
  SmoothnessReport report;
};

// Runs the deterministic mean policy; episode k starts from
// reset(seed + k). No exploration noise is involved.
EvaluationResult evaluate_policy(const MeanPolicy& policy,
                                 const EnvFactory& factory,
                                 std::size_t episodes, std::uint64_t seed);

std::string report_json(const EvaluationResult& result);

struct RunRecord {
  std::string config_hash;
  std::string name;
  std::string env_name;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::uint64_t steps = 0;
  double return_mean = 0.0;
  double return_std = 0.0;
  double sm_mean = 0.0;
  double sm_std = 0.0;
  double wall_time_s = 0.0;
  std::filesystem::path checkpoint;
  std::filesystem::path metrics;

  std::string to_json() const;
  static RunRecord from_json(const std::string& text);
};

// <output>/<config hash>
std::filesystem::path experiment_dir(const ExperimentConfig& config);

// Trains and evaluates one seed, writing checkpoint.json, metrics.csv,
// traces.csv, report.json and record.json under experiment_dir/<seed>.
// NumericError during training yields a failed record instead of throwing.
RunRecord run_seed(const ExperimentConfig& config, std::uint64_t seed);

// All seeds over up to `threads` worker slots; records are in seed order.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config,
                                      std::size_t threads);

// SMOOTHCTL_THREADS when set and positive, else the hardware concurrency.
std::size_t worker_threads();

// record.json files under each directory, searched one level deep.
std::vector<RunRecord> load_records(
    const std::vector<std::filesystem::path>& dirs);

}  // namespace smooth

#endif  // SMOOTH_HARNESS_EXPERIMENT_H_
