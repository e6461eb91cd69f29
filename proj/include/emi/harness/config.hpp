#pragma once

#include "emi/agent/policy.hpp"
#include "emi/objective/objective.hpp"
#include "emi/objective/rewards.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace emi::harness {

// Everything a run needs. Serialized as a JSON document; the keys mirror the
// field names below, grouped under "emi", "intrinsic" and "policy".
struct RunConfig {
  std::string env = "sparsepoint";
  std::uint64_t seed = 0;
  int iterations = 200;            // MAXITER
  int steps_per_iteration = 2048;  // n
  int embedding_dim = 2;           // d
  EmiLossConfig emi;               // epochs = OPTITER, minibatch = m
  IntrinsicConfig intrinsic;
  agent::PolicyConfig policy;
  std::string output_dir = "runs/emi";
  // When false the progress.csv "seconds" column is written as 0 so that
  // repeated runs produce byte-identical logs.
  bool log_wall_clock = true;

  // Desk-scale defaults for an environment. Image environments regularize the
  // action embedding (lambda_kl = 1); vector environments do not.
  static RunConfig defaults_for(const std::string& env);
  // ConfigError naming the offending field path.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
// Keys absent from `doc` keep the defaults of doc["env"]; unknown keys and
// wrong types raise ConfigError with the field path.
RunConfig config_from_json(const nlohmann::json& doc);

RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& config);

}  // namespace emi::harness
