#include "emi/harness/config.hpp"

#include "emi/error.hpp"

#include <fstream>
#include <set>

namespace emi::harness {

using nlohmann::json;

RunConfig RunConfig::defaults_for(const std::string& env) {
  RunConfig c;
  c.env = env;
  if (env == "boximage") {
    c.emi.lambda_error = 100.0;
    c.emi.lambda_info = 0.01;
    c.emi.lambda_kl = 1.0;
    c.emi.kl_target = RegularizationTarget::Action;
  } else if (env == "fourrooms") {
    c.emi.lambda_error = 100.0;
    c.emi.lambda_info = 0.1;
    c.emi.lambda_kl = 1.0;
    c.emi.kl_target = RegularizationTarget::Action;
    c.intrinsic.mode = IntrinsicMode::Diversity;
  } else if (env == "sparsepoint") {
    c.emi.lambda_error = 5.0;
    c.emi.lambda_info = 1.0;
    c.emi.lambda_kl = 0.0;
    c.emi.kl_target = RegularizationTarget::None;
    c.intrinsic.mode = IntrinsicMode::PredictionError;
  } else {
    throw ConfigError("env: unknown environment '" + env + "'");
  }
  return c;
}

void RunConfig::validate() const {
  if (env != "boximage" && env != "fourrooms" && env != "sparsepoint") {
    throw ConfigError("env: unknown environment '" + env + "'");
  }
  if (iterations < 1) throw ConfigError("iterations: must be >= 1");
  if (steps_per_iteration < 1) throw ConfigError("steps_per_iteration: must be >= 1");
  if (embedding_dim < 1) throw ConfigError("embedding_dim: must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
  emi.validate();
  if (steps_per_iteration < emi.minibatch) {
    throw ConfigError("emi.minibatch: must not exceed steps_per_iteration");
  }
  intrinsic.validate();
  policy.validate();
}

json to_json(const RunConfig& c) {
  json j;
  j["env"] = c.env;
  j["seed"] = c.seed;
  j["iterations"] = c.iterations;
  j["steps_per_iteration"] = c.steps_per_iteration;
  j["embedding_dim"] = c.embedding_dim;
  j["output_dir"] = c.output_dir;
  j["log_wall_clock"] = c.log_wall_clock;
  j["emi"] = {{"lambda_error", c.emi.lambda_error}, {"lambda_info", c.emi.lambda_info},
              {"lambda_kl", c.emi.lambda_kl},       {"regularize", to_string(c.emi.kl_target)},
              {"epochs", c.emi.epochs},             {"minibatch", c.emi.minibatch},
              {"lr", c.emi.lr}};
  j["intrinsic"] = {{"mode", to_string(c.intrinsic.mode)},
                    {"eta", c.intrinsic.eta},
                    {"sigma", c.intrinsic.sigma}};
  j["policy"] = {{"hidden", c.policy.hidden},
                 {"activation", to_string(c.policy.activation)},
                 {"init_log_std", c.policy.init_log_std},
                 {"head_init_scale", c.policy.head_init_scale},
                 {"lr", c.policy.lr},
                 {"baseline_lr", c.policy.baseline_lr},
                 {"discount", c.policy.discount},
                 {"clip_ratio", c.policy.clip_ratio},
                 {"epochs", c.policy.epochs},
                 {"minibatch", c.policy.minibatch},
                 {"entropy_coef", c.policy.entropy_coef},
                 {"normalize_advantages", c.policy.normalize_advantages}};
  return j;
}

namespace {

// Reads doc[key] into `out` when present; type errors become ConfigError
// carrying the dotted path.
template <typename T>
void read(const json& doc, const std::string& prefix, const char* key, T& out) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(prefix + key + ": " + e.what());
  }
}

void reject_unknown(const json& doc, const std::string& prefix, const std::set<std::string>& known) {
  if (!doc.is_object()) throw ConfigError((prefix.empty() ? "<root>" : prefix) + ": expected an object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ConfigError(prefix + key + ": unknown key");
  }
}

template <typename Fn>
void with_path(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    // Messages from the enum parsers don't carry a path yet.
    if (msg.rfind(path, 0) == 0) throw;
    throw ConfigError(path + ": " + msg);
  }
}

}  // namespace

RunConfig config_from_json(const json& doc) {
  reject_unknown(doc, "", {"env", "seed", "iterations", "steps_per_iteration", "embedding_dim",
                           "output_dir", "log_wall_clock", "emi", "intrinsic", "policy"});
  std::string env = "sparsepoint";
  read(doc, "", "env", env);
  RunConfig c = RunConfig::defaults_for(env);
  read(doc, "", "seed", c.seed);
  read(doc, "", "iterations", c.iterations);
  read(doc, "", "steps_per_iteration", c.steps_per_iteration);
  read(doc, "", "embedding_dim", c.embedding_dim);
  read(doc, "", "output_dir", c.output_dir);
  read(doc, "", "log_wall_clock", c.log_wall_clock);

  if (doc.contains("emi")) {
    const json& e = doc.at("emi");
    reject_unknown(e, "emi.", {"lambda_error", "lambda_info", "lambda_kl", "regularize", "epochs",
                               "minibatch", "lr"});
    read(e, "emi.", "lambda_error", c.emi.lambda_error);
    read(e, "emi.", "lambda_info", c.emi.lambda_info);
    read(e, "emi.", "lambda_kl", c.emi.lambda_kl);
    read(e, "emi.", "epochs", c.emi.epochs);
    read(e, "emi.", "minibatch", c.emi.minibatch);
    read(e, "emi.", "lr", c.emi.lr);
    std::string target = to_string(c.emi.kl_target);
    read(e, "emi.", "regularize", target);
    with_path("emi.regularize", [&] { c.emi.kl_target = regularization_from_string(target); });
  }
  if (doc.contains("intrinsic")) {
    const json& r = doc.at("intrinsic");
    reject_unknown(r, "intrinsic.", {"mode", "eta", "sigma"});
    std::string mode = to_string(c.intrinsic.mode);
    read(r, "intrinsic.", "mode", mode);
    with_path("intrinsic.mode", [&] { c.intrinsic.mode = intrinsic_mode_from_string(mode); });
    read(r, "intrinsic.", "eta", c.intrinsic.eta);
    read(r, "intrinsic.", "sigma", c.intrinsic.sigma);
  }
  if (doc.contains("policy")) {
    const json& p = doc.at("policy");
    reject_unknown(p, "policy.", {"hidden", "activation", "init_log_std", "head_init_scale", "lr", "baseline_lr",
                                  "discount", "clip_ratio", "epochs", "minibatch", "entropy_coef",
                                  "normalize_advantages"});
    read(p, "policy.", "hidden", c.policy.hidden);
    std::string act = to_string(c.policy.activation);
    read(p, "policy.", "activation", act);
    with_path("policy.activation", [&] { c.policy.activation = activation_from_string(act); });
    read(p, "policy.", "init_log_std", c.policy.init_log_std);
    read(p, "policy.", "head_init_scale", c.policy.head_init_scale);
    read(p, "policy.", "lr", c.policy.lr);
    read(p, "policy.", "baseline_lr", c.policy.baseline_lr);
    read(p, "policy.", "discount", c.policy.discount);
    read(p, "policy.", "clip_ratio", c.policy.clip_ratio);
    read(p, "policy.", "epochs", c.policy.epochs);
    read(p, "policy.", "minibatch", c.policy.minibatch);
    read(p, "policy.", "entropy_coef", c.policy.entropy_coef);
    read(p, "policy.", "normalize_advantages", c.policy.normalize_advantages);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void save_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(config).dump(2) << '\n';
}

}  // namespace emi::harness
