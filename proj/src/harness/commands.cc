#include "smooth/harness/commands.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "smooth/core/errors.h"
#include "smooth/core/io.h"
#include "smooth/harness/svg.h"
#include "smooth/metrics/probes.h"
#include "smooth/policy/checkpoint.h"
#include "smooth/ppo/ppo.h"

namespace smooth {
namespace {

namespace fs = std::filesystem;

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = sd = std::nan("");
  if (v.empty()) return;
  double s = 0.0;
  for (double x : v) s += x;
  mean = s / static_cast<double>(v.size());
  double q = 0.0;
  for (double x : v) q += (x - mean) * (x - mean);
  sd = std::sqrt(q / static_cast<double>(v.size()));
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

}  // namespace

// ----- train / eval -----

int cmd_train(const fs::path& config_path, std::size_t threads,
              std::ostream& out) {
  ExperimentConfig config = load_config(config_path);
  std::vector<RunRecord> records = run_experiment(config, threads);
  int status = kExitOk;
  out << "experiment " << config.name << " -> "
      << experiment_dir(config).generic_string() << "\n";
  for (const RunRecord& r : records) {
    if (r.ok) {
      out << "  seed " << r.seed << ": return " << fixed(r.return_mean, 3)
          << " sm " << fixed(r.sm_mean, 5) << " (" << fixed(r.wall_time_s, 1)
          << " s)\n";
    } else {
      out << "  seed " << r.seed << ": FAILED " << r.error << "\n";
      status = kExitFailure;
    }
  }
  return status;
}

int cmd_eval(const fs::path& checkpoint, const fs::path& config_path,
             std::size_t episodes, std::uint64_t seed,
             const std::optional<fs::path>& output, std::ostream& out) {
  ExperimentConfig config = load_config(config_path);
  if (episodes == 0) throw UsageError("need at least one episode");
  Checkpoint ckpt = load_checkpoint(checkpoint);
  std::unique_ptr<Environment> env = config.make_env();
  if (ckpt.actor.obs_dim() != env->state_dim() ||
      ckpt.actor.action_dim() != env->action_dim()) {
    throw UsageError("checkpoint does not fit environment " + config.env_name);
  }
  EvaluationResult result = evaluate_policy(
      ckpt.actor.mean_policy(), config.env_factory(), episodes, seed);
  std::string json = report_json(result);
  if (output) write_file_atomic(*output, json);
  out << json;
  return kExitOk;
}

// ----- compare -----

double sm_reduction_percent(double baseline_sm, double method_sm) {
  return 100.0 * (baseline_sm - method_sm) / baseline_sm;
}

std::vector<MethodSummary> summarize(const std::vector<RunRecord>& records,
                                     const std::string& baseline) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : records) {
    if (!groups.contains(r.name)) order.push_back(r.name);
    groups[r.name].push_back(&r);
  }
  if (!groups.contains(baseline)) {
    throw UsageError("baseline '" + baseline + "' not among the runs");
  }
  std::vector<MethodSummary> rows;
  for (const std::string& name : order) {
    MethodSummary s;
    s.name = name;
    std::vector<double> re, sm;
    for (const RunRecord* r : groups[name]) {
      ++s.runs;
      if (!r->ok) {
        ++s.failed;
        continue;
      }
      re.push_back(r->return_mean);
      sm.push_back(r->sm_mean);
    }
    mean_std(re, s.return_mean, s.return_std);
    mean_std(sm, s.sm_mean, s.sm_std);
    rows.push_back(s);
  }
  double base_sm = 0.0;
  for (const MethodSummary& s : rows) {
    if (s.name == baseline) base_sm = s.sm_mean;
  }
  for (MethodSummary& s : rows) {
    s.sm_reduction_pct = sm_reduction_percent(base_sm, s.sm_mean);
  }
  return rows;
}

std::string comparison_markdown(const std::vector<MethodSummary>& rows,
                                const std::string& baseline) {
  double best_re = -std::numeric_limits<double>::infinity();
  double best_sm = std::numeric_limits<double>::infinity();
  for (const MethodSummary& s : rows) {
    if (std::isfinite(s.return_mean)) best_re = std::max(best_re, s.return_mean);
    if (std::isfinite(s.sm_mean)) best_sm = std::min(best_sm, s.sm_mean);
  }
  auto cell = [](double m, double sd, int digits, bool bold) {
    std::string c = fixed(m, digits) + " (" + fixed(sd, digits) + ")";
    return bold ? "**" + c + "**" : c;
  };
  std::ostringstream o;
  o << "| method | runs | re | sm | sm reduction vs " << baseline << " |\n";
  o << "|---|---|---|---|---|\n";
  for (const MethodSummary& s : rows) {
    o << "| " << s.name << " | " << s.runs - s.failed << "/" << s.runs << " | "
      << cell(s.return_mean, s.return_std, 2, s.return_mean == best_re) << " | "
      << cell(s.sm_mean, s.sm_std, 4, s.sm_mean == best_sm) << " | "
      << fixed(s.sm_reduction_pct, 1) << "% |\n";
  }
  return o.str();
}

std::string comparison_csv(const std::vector<MethodSummary>& rows) {
  std::ostringstream o;
  o << "method,runs,failed,return_mean,return_std,sm_mean,sm_std,"
       "sm_reduction_pct\n";
  for (const MethodSummary& s : rows) {
    o << s.name << ',' << s.runs << ',' << s.failed << ','
      << format_double(s.return_mean) << ',' << format_double(s.return_std)
      << ',' << format_double(s.sm_mean) << ',' << format_double(s.sm_std)
      << ',' << format_double(s.sm_reduction_pct) << '\n';
  }
  return o.str();
}

int cmd_compare(const std::vector<fs::path>& dirs, const std::string& baseline,
                const std::optional<fs::path>& output_prefix,
                std::ostream& out) {
  if (dirs.empty()) throw UsageError("no run directories given");
  std::vector<RunRecord> records;
  try {
    records = load_records(dirs);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::vector<MethodSummary> rows = summarize(records, baseline);
  std::string md = comparison_markdown(rows, baseline);
  if (output_prefix) {
    fs::path md_path = *output_prefix;
    md_path += ".md";
    fs::path csv_path = *output_prefix;
    csv_path += ".csv";
    write_file_atomic(md_path, md);
    write_file_atomic(csv_path, comparison_csv(rows));
  }
  out << md;
  return kExitOk;
}

// ----- verify -----

int cmd_verify(const VerifyOptions& options, std::ostream& out) {
  std::unique_ptr<Environment> env =
      make_environment(options.env, options.settings);
  BoundReport bound = check_similar_state_bound(*env, options.anchors,
                                                options.samples, options.seed);
  out << "env " << options.env << ": sigma_xi " << format_double(env->noise_bound())
      << ", K_xi " << format_double(env->noise_sensitivity()) << "\n";
  out << "similar-state bound 2*K_xi*sigma_xi = " << format_double(bound.bound)
      << "\n";
  out << "  " << options.anchors << " anchors x " << options.samples
      << " samples: max diameter " << format_double(bound.max_distance)
      << ", violations " << bound.violations << "\n";

  std::optional<ActorNetwork> actor;
  if (options.checkpoint) {
    actor.emplace(load_checkpoint(*options.checkpoint).actor);
    if (actor->obs_dim() != env->state_dim()) {
      throw UsageError("checkpoint does not fit environment " + options.env);
    }
  } else {
    PpoConfig defaults;
    defaults.seed = options.seed;
    actor.emplace(make_actor(*env, defaults));
  }
  std::vector<Anchor> anchors =
      make_anchors(*env, options.anchors, options.seed + 1);
  RatioStats probe = probe_composite_lipschitz(
      actor->mean_policy(), *env, anchors, options.pairs, options.seed + 2);
  bool finite = std::all_of(probe.ratios.begin(), probe.ratios.end(),
                            [](double r) { return std::isfinite(r); });
  out << "composite ratio over " << probe.ratios.size() << " noise pairs ("
      << probe.skipped << " skipped): median " << format_double(probe.median)
      << ", q90 " << format_double(probe.q90) << ", max "
      << format_double(probe.max) << "\n";
  bool pass = bound.pass() && finite;
  out << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitFailure;
}

// ----- plot -----

std::vector<double> mean_action_change(const std::vector<ActionTrace>& traces) {
  std::size_t steps = std::numeric_limits<std::size_t>::max();
  for (const ActionTrace& t : traces) steps = std::min(steps, t.steps());
  if (traces.empty() || steps < 2) return {};
  std::vector<double> out(steps - 1, 0.0);
  for (const ActionTrace& t : traces) {
    for (std::size_t s = 1; s < steps; ++s) {
      out[s - 1] += l2_distance(t.actions[s], t.actions[s - 1]);
    }
  }
  for (double& v : out) v /= static_cast<double>(traces.size());
  return out;
}

DeltaABand delta_a_band(const std::vector<std::vector<double>>& per_seed) {
  DeltaABand band;
  if (per_seed.empty()) return band;
  std::size_t steps = per_seed[0].size();
  for (const auto& s : per_seed) steps = std::min(steps, s.size());
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> column;
    for (const auto& s : per_seed) column.push_back(s[t]);
    band.median.push_back(median(column));
    band.lo.push_back(*std::min_element(column.begin(), column.end()));
    band.hi.push_back(*std::max_element(column.begin(), column.end()));
  }
  return band;
}

int cmd_plot(const fs::path& dir, std::ostream& out) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  fs::path root = dir;
  std::vector<fs::path> seed_dirs;
  if (fs::exists(dir / "traces.csv")) {
    root = dir.parent_path();
    seed_dirs.push_back(dir);
  } else {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_directory() && fs::exists(e.path() / "traces.csv")) {
        seed_dirs.push_back(e.path());
      }
    }
    std::sort(seed_dirs.begin(), seed_dirs.end());
  }
  if (seed_dirs.empty()) throw UsageError("no traces.csv under " + dir.string());
  if (!fs::exists(root / "config.ini")) {
    throw UsageError("missing config.ini in " + root.string());
  }
  ExperimentConfig config = load_config(root / "config.ini");
  const double fs_hz = config.make_env()->control_frequency();

  std::vector<std::string> labels;
  std::vector<std::vector<ActionTrace>> traces;
  for (const fs::path& d : seed_dirs) {
    labels.push_back("seed " + d.filename().string());
    traces.push_back(traces_from_csv(read_file(d / "traces.csv"), fs_hz));
  }

  const fs::path plots = dir / "plots";
  fs::create_directories(plots);

  std::vector<std::vector<double>> per_seed;
  for (const auto& t : traces) per_seed.push_back(mean_action_change(t));
  DeltaABand band = delta_a_band(per_seed);
  LinePlot delta;
  delta.title = config.name + ": action change per step";
  delta.x_label = "step";
  delta.y_label = "|delta a|";
  Series med{"median over seeds", {}, band.median};
  for (std::size_t t = 0; t < band.median.size(); ++t) {
    med.x.push_back(static_cast<double>(t + 1));
  }
  delta.series.push_back(med);
  delta.bands.push_back({med.x, band.lo, band.hi});
  write_file_atomic(plots / "delta_a.svg", render_svg(delta));

  LinePlot actions;
  actions.title = config.name + ": actions, " + labels[0] + ", episode 0";
  actions.x_label = "step";
  actions.y_label = "action";
  const ActionTrace& first = traces[0].at(0);
  for (std::size_t k = 0; k < first.dims(); ++k) {
    Series s{"a_" + std::to_string(k), {}, first.column(k)};
    for (std::size_t t = 0; t < first.steps(); ++t) {
      s.x.push_back(static_cast<double>(t));
    }
    actions.series.push_back(s);
  }
  write_file_atomic(plots / "actions.svg", render_svg(actions));

  LinePlot spectrum;
  spectrum.title = config.name + ": amplitude spectrum of a_0, episode 0";
  spectrum.x_label = "frequency (Hz)";
  spectrum.y_label = "|X|";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    Spectrum sp = dft_magnitudes(traces[i].at(0).column(0), fs_hz);
    Series s{labels[i],
             {sp.frequencies.begin() + 1, sp.frequencies.end()},
             {sp.magnitudes.begin() + 1, sp.magnitudes.end()}};
    spectrum.series.push_back(s);
  }
  write_file_atomic(plots / "spectrum.svg", render_svg(spectrum));

  out << "wrote " << (plots / "delta_a.svg").generic_string() << ", "
      << (plots / "actions.svg").generic_string() << ", "
      << (plots / "spectrum.svg").generic_string() << "\n";
  return kExitOk;
}

}  // namespace smooth
