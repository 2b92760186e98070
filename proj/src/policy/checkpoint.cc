#include "smooth/policy/checkpoint.h"

#include <bit>
#include <cstdio>

#include <json.hpp>

#include "smooth/core/errors.h"
#include "smooth/core/io.h"

namespace smooth {
namespace {

using nlohmann::json;

json params_to_json(const std::vector<ParamRef>& params) {
  json out = json::array();
  for (const ParamRef& p : params) {
    out.push_back({{"name", p.name},
                   {"shape", p.tensor->shape()},
                   {"data", p.tensor->values()}});
  }
  return out;
}

void params_from_json(const json& in, std::vector<ParamRef> params) {
  if (!in.is_array() || in.size() != params.size()) {
    throw Error("checkpoint parameter count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const json& entry = in[i];
    if (entry.at("name").get<std::string>() != params[i].name) {
      throw Error("checkpoint parameter " + std::to_string(i) + " is '" +
                  entry.at("name").get<std::string>() + "', expected '" +
                  params[i].name + "'");
    }
    Shape shape = entry.at("shape").get<Shape>();
    if (shape != params[i].tensor->shape()) {
      throw ShapeError("checkpoint parameter '" + params[i].name +
                       "' has shape " + shape_string(shape) + ", expected " +
                       shape_string(params[i].tensor->shape()));
    }
    *params[i].tensor = Tensor(shape, entry.at("data").get<std::vector<double>>());
  }
}

}  // namespace

std::string serialize_checkpoint(const ActorNetwork& actor,
                                 const CriticNetwork& critic,
                                 const std::string& config_hash) {
  const ActorConfig& ac = actor.config();
  json doc;
  doc["format"] = "smoothctl-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["config_hash"] = config_hash;
  doc["actor"] = {{"obs_dim", ac.obs_dim},
                  {"action_dim", ac.action_dim},
                  {"hidden", ac.hidden},
                  {"action_low", ac.action_low},
                  {"action_high", ac.action_high},
                  {"log_std_init", ac.log_std_init},
                  {"head_init_scale", ac.head_init_scale},
                  {"params", params_to_json(
                                 const_cast<ActorNetwork&>(actor).parameters())}};
  doc["critic"] = {{"obs_dim", critic.config().obs_dim},
                   {"hidden", critic.config().hidden},
                   {"params", params_to_json(const_cast<CriticNetwork&>(critic)
                                                 .parameters())}};
  return doc.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "smoothctl-checkpoint") {
      throw Error("not a smoothctl checkpoint");
    }
    int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw Error("unsupported checkpoint version " + std::to_string(version));
    }
    const json& a = doc.at("actor");
    ActorConfig ac;
    ac.obs_dim = a.at("obs_dim").get<std::size_t>();
    ac.action_dim = a.at("action_dim").get<std::size_t>();
    ac.hidden = a.at("hidden").get<std::vector<std::size_t>>();
    ac.action_low = a.at("action_low").get<Vec>();
    ac.action_high = a.at("action_high").get<Vec>();
    ac.log_std_init = a.at("log_std_init").get<double>();
    ac.head_init_scale = a.at("head_init_scale").get<double>();
    const json& c = doc.at("critic");
    CriticConfig cc;
    cc.obs_dim = c.at("obs_dim").get<std::size_t>();
    cc.hidden = c.at("hidden").get<std::vector<std::size_t>>();

    Rng unused(0);
    Checkpoint ckpt{ActorNetwork(ac, unused), CriticNetwork(cc, unused),
                    doc.at("config_hash").get<std::string>()};
    params_from_json(a.at("params"), ckpt.actor.parameters());
    params_from_json(c.at("params"), ckpt.critic.parameters());
    return ckpt;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path,
                     const ActorNetwork& actor, const CriticNetwork& critic,
                     const std::string& config_hash) {
  write_file_atomic(path, serialize_checkpoint(actor, critic, config_hash));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path));
}

std::string parameter_hash(const std::vector<const Tensor*>& params) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const Tensor* t : params) {
    for (double x : t->data()) {
      std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= 1099511628211ULL;
      }
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace smooth
