#ifndef SMOOTH_HARNESS_COMMANDS_H_
#define SMOOTH_HARNESS_COMMANDS_H_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "smooth/core/errors.h"
#include "smooth/harness/experiment.h"

namespace smooth {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Bad command-line input that is not a config file problem.
class UsageError : public Error {
 public:
  using Error::Error;
};

int cmd_train(const std::filesystem::path& config_path, std::size_t threads,
              std::ostream& out);

int cmd_eval(const std::filesystem::path& checkpoint,
             const std::filesystem::path& config_path, std::size_t episodes,
             std::uint64_t seed, const std::optional<std::filesystem::path>& output,
             std::ostream& out);

struct MethodSummary {
  std::string name;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double return_mean = 0.0;
  double return_std = 0.0;
  double sm_mean = 0.0;
  double sm_std = 0.0;
  double sm_reduction_pct = 0.0;
};

// 100 * (baseline - method) / baseline.
double sm_reduction_percent(double baseline_sm, double method_sm);

// Groups records by method name in first-seen order; statistics are over
// the per-seed means of successful runs. Throws UsageError when the baseline
// name is absent.
std::vector<MethodSummary> summarize(const std::vector<RunRecord>& records,
                                     const std::string& baseline);
// Best return and best (lowest) Sm are bolded.
std::string comparison_markdown(const std::vector<MethodSummary>& rows,
                                const std::string& baseline);
std::string comparison_csv(const std::vector<MethodSummary>& rows);

int cmd_compare(const std::vector<std::filesystem::path>& dirs,
                const std::string& baseline,
                const std::optional<std::filesystem::path>& output_prefix,
                std::ostream& out);

struct VerifyOptions {
  std::string env;
  EnvSettings settings;
  std::size_t anchors = 100;
  std::size_t samples = 10000;
  std::size_t pairs = 10000;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> checkpoint;
};

// Similar-state bound on every anchor plus the composite ratio probe for the
// checkpoint's policy (or a freshly initialized one). Fails on any bound
// violation or non-finite ratio.
int cmd_verify(const VerifyOptions& options, std::ostream& out);

// delta_a.svg, actions.svg and spectrum.svg under <dir>/plots. dir is an
// experiment directory or one seed directory inside it.
int cmd_plot(const std::filesystem::path& dir, std::ostream& out);

// Per-step |a_t - a_{t-1}| averaged over episodes, one vector per seed, and
// their median / min / max across seeds.
struct DeltaABand {
  std::vector<double> median, lo, hi;
};
std::vector<double> mean_action_change(const std::vector<ActionTrace>& traces);
DeltaABand delta_a_band(const std::vector<std::vector<double>>& per_seed);

}  // namespace smooth

#endif  // SMOOTH_HARNESS_COMMANDS_H_
