#include "smooth/harness/config.h"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "smooth/core/errors.h"
#include "smooth/core/io.h"

namespace smooth {
namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::map<std::string, Section> split_sections(const std::string& text) {
  static const std::set<std::string> known{"experiment", "environment", "ppo",
                                           "regularizer", "evaluation"};
  std::map<std::string, Section> out;
  std::istringstream in(text);
  std::string raw;
  std::string current;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line);
      current = trim(s.substr(1, s.size() - 2));
      if (!known.contains(current)) {
        throw ConfigError("unknown section [" + current + "]", line, current);
      }
      if (out.contains(current)) {
        throw ConfigError("section [" + current + "] repeated", line);
      }
      out[current];
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key = value", line);
    }
    if (current.empty()) throw ConfigError("key outside any section", line);
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line);
    Section& sec = out[current];
    if (sec.contains(key)) {
      throw ConfigError("duplicate key", line, current + "." + key);
    }
    sec[key] = {value, line};
  }
  return out;
}

class Reader {
 public:
  Reader(std::string name, Section section)
      : name_(std::move(name)), section_(std::move(section)) {}

  bool has(const std::string& key) const { return section_.contains(key); }
  int line(const std::string& key) const {
    auto it = section_.find(key);
    return it == section_.end() ? 0 : it->second.line;
  }
  std::string field(const std::string& key) const { return name_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(what, line(key), field(key));
  }

  std::string take_string(const std::string& key) {
    used_.insert(key);
    return section_.at(key).value;
  }

  double parse_double(const std::string& key, const std::string& text) const {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      fail(key, "expected a number, got '" + text + "'");
    }
    return v;
  }

  std::uint64_t parse_uint(const std::string& key,
                           const std::string& text) const {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      fail(key, "expected a non-negative integer, got '" + text + "'");
    }
    return v;
  }

  void number(const std::string& key, double& out) {
    if (has(key)) out = parse_double(key, take_string(key));
  }
  template <typename T>
  void integer(const std::string& key, T& out) {
    if (has(key)) out = static_cast<T>(parse_uint(key, take_string(key)));
  }
  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    std::string v = take_string(key);
    if (v == "true") {
      out = true;
    } else if (v == "false") {
      out = false;
    } else {
      fail(key, "expected true or false, got '" + v + "'");
    }
  }
  template <typename T>
  void integer_list(const std::string& key, std::vector<T>& out) {
    if (!has(key)) return;
    out.clear();
    std::string v = take_string(key);
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
      out.push_back(static_cast<T>(parse_uint(key, trim(item))));
    }
    if (out.empty()) fail(key, "expected a comma-separated list");
  }

  // Remaining keys as numbers, for the open-ended environment section.
  std::map<std::string, std::pair<double, int>> rest_as_numbers() {
    std::map<std::string, std::pair<double, int>> out;
    for (const auto& [key, entry] : section_) {
      if (used_.contains(key)) continue;
      used_.insert(key);
      out[key] = {parse_double(key, entry.value), entry.line};
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, entry] : section_) {
      if (!used_.contains(key)) {
        throw ConfigError("unknown key", entry.line, field(key));
      }
    }
  }

 private:
  std::string name_;
  Section section_;
  std::set<std::string> used_;
};

// Re-raises a field-only ConfigError with the line of that key.
template <typename Fn>
void with_lines(const Reader& reader, const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    if (e.line() > 0) throw;
    std::string key = e.field();
    std::string msg = e.what();
    auto pos = msg.find("] ");
    if (pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ConfigError(msg, reader.line(key), key.empty() ? prefix : prefix + "." + key);
  }
}

std::string join(const auto& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ",";
    out += std::to_string(v);
  }
  return out;
}

std::string serialize(const ExperimentConfig& c, bool for_hash) {
  std::ostringstream o;
  auto num = [](double v) { return format_double(v); };
  o << "[experiment]\n";
  o << "name = " << c.name << "\n";
  if (!for_hash) {
    o << "output = " << c.output.generic_string() << "\n";
    o << "seeds = " << join(c.seeds) << "\n";
  }
  o << "\n[environment]\n";
  o << "name = " << c.env_name << "\n";
  for (const auto& [k, v] : c.env_settings) o << k << " = " << num(v) << "\n";
  const PpoConfig& p = c.ppo;
  o << "\n[ppo]\n";
  o << "n_envs = " << p.n_envs << "\n";
  o << "rollout_len = " << p.rollout_len << "\n";
  o << "epochs = " << p.epochs << "\n";
  o << "minibatch = " << p.minibatch << "\n";
  o << "clip = " << num(p.clip) << "\n";
  o << "gamma = " << num(p.gamma) << "\n";
  o << "gae_lambda = " << num(p.gae_lambda) << "\n";
  o << "value_coef = " << num(p.value_coef) << "\n";
  o << "entropy_coef = " << num(p.entropy_coef) << "\n";
  o << "max_grad_norm = " << num(p.max_grad_norm) << "\n";
  o << "lr = " << num(p.lr) << "\n";
  o << "normalize_advantages = " << (p.normalize_advantages ? "true" : "false")
    << "\n";
  o << "total_steps = " << p.total_steps << "\n";
  o << "hidden = " << join(p.hidden) << "\n";
  o << "log_std_init = " << num(p.log_std_init) << "\n";
  const RegularizerSpec& r = c.regularizer;
  o << "\n[regularizer]\n";
  o << "spatial = " << to_string(r.spatial) << "\n";
  o << "temporal = " << to_string(r.temporal) << "\n";
  o << "lambda_s = " << num(r.lambda_s) << "\n";
  o << "lambda_p = " << num(r.lambda_p) << "\n";
  o << "lambda_t = " << num(r.lambda_t) << "\n";
  o << "caps_sigma = " << num(r.caps_sigma) << "\n";
  o << "eps_t = " << num(r.eps_t) << "\n";
  o << "\n[evaluation]\n";
  o << "episodes = " << c.evaluation.episodes << "\n";
  o << "seed = " << c.evaluation.seed << "\n";
  return o.str();
}

}  // namespace

EnvFactory ExperimentConfig::env_factory() const {
  std::string name = env_name;
  EnvSettings settings = env_settings;
  return [name, settings] { return make_environment(name, settings); };
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, Section> sections = split_sections(text);
  ExperimentConfig c;
  auto reader = [&](const std::string& name) {
    auto it = sections.find(name);
    return Reader(name, it == sections.end() ? Section{} : it->second);
  };

  Reader exp = reader("experiment");
  if (exp.has("name")) c.name = exp.take_string("name");
  if (c.name.empty() || c.name.find_first_of(",|*\"") != std::string::npos) {
    exp.fail("name", "name must be non-empty without , | * or \"");
  }
  if (exp.has("output")) c.output = exp.take_string("output");
  exp.integer_list("seeds", c.seeds);
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() !=
      c.seeds.size()) {
    exp.fail("seeds", "seeds must be distinct");
  }
  exp.reject_unknown();

  Reader env = reader("environment");
  if (!sections.contains("environment") || !env.has("name")) {
    throw ConfigError("missing environment name", 0, "environment.name");
  }
  c.env_name = env.take_string("name");
  std::map<std::string, int> env_lines;
  for (const auto& [key, v] : env.rest_as_numbers()) {
    c.env_settings[key] = v.first;
    env_lines[key] = v.second;
  }
  try {
    make_environment(c.env_name, c.env_settings);
  } catch (const ConfigError& e) {
    std::string field = e.field();
    int line = env_lines.contains(field) ? env_lines[field] : env.line("name");
    std::string msg = e.what();
    auto pos = msg.find("] ");
    if (pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ConfigError(msg, line, "environment." + (field.empty() ? "name" : field));
  }

  Reader ppo = reader("ppo");
  PpoConfig& p = c.ppo;
  ppo.integer("n_envs", p.n_envs);
  ppo.integer("rollout_len", p.rollout_len);
  ppo.integer("epochs", p.epochs);
  ppo.integer("minibatch", p.minibatch);
  ppo.number("clip", p.clip);
  ppo.number("gamma", p.gamma);
  ppo.number("gae_lambda", p.gae_lambda);
  ppo.number("value_coef", p.value_coef);
  ppo.number("entropy_coef", p.entropy_coef);
  ppo.number("max_grad_norm", p.max_grad_norm);
  ppo.number("lr", p.lr);
  ppo.boolean("normalize_advantages", p.normalize_advantages);
  ppo.integer("total_steps", p.total_steps);
  ppo.integer_list("hidden", p.hidden);
  ppo.number("log_std_init", p.log_std_init);
  ppo.reject_unknown();
  with_lines(ppo, "ppo", [&] { p.validate(); });

  Reader reg = reader("regularizer");
  RegularizerSpec& r = c.regularizer;
  with_lines(reg, "regularizer", [&] {
    if (reg.has("spatial")) r.spatial = parse_spatial_method(reg.take_string("spatial"));
    if (reg.has("temporal")) {
      r.temporal = parse_temporal_method(reg.take_string("temporal"));
    }
  });
  reg.number("lambda_s", r.lambda_s);
  reg.number("lambda_p", r.lambda_p);
  reg.number("lambda_t", r.lambda_t);
  reg.number("caps_sigma", r.caps_sigma);
  reg.number("eps_t", r.eps_t);
  reg.reject_unknown();
  with_lines(reg, "regularizer", [&] { r.validate(); });

  Reader ev = reader("evaluation");
  ev.integer("episodes", c.evaluation.episodes);
  ev.integer("seed", c.evaluation.seed);
  if (c.evaluation.episodes == 0) ev.fail("episodes", "must be > 0");
  ev.reject_unknown();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::string serialize_config(const ExperimentConfig& config) {
  return serialize(config, false);
}

std::string config_hash(const ExperimentConfig& config) {
  std::string text = serialize(config, true);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace smooth
