#pragma once

#include "emi/model/encoding.hpp"
#include "emi/numcore/matrix.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace emi::envs {

using Observation = std::vector<double>;
// Continuous actions are their vector; discrete actions hold the index as the
// single element.
using Action = std::vector<double>;

struct EnvSpec {
  std::string name;
  ObservationEncoding observation;
  ActionEncoding action;
  std::vector<double> action_low;   // continuous only
  std::vector<double> action_high;  // continuous only
  int max_episode_steps = 1;
  double discount = 0.995;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;     // terminal (goal reached)
  bool clipped = false;  // the move was cut by a boundary or wall
};

// One (s, a, s') experience tuple plus its environment feedback.
struct Transition {
  Observation state;
  Action action;
  Observation next_state;
  double reward = 0.0;
  bool done = false;
  bool truncated = false;  // episode ended by the step cap
  bool clipped = false;
};

// Every source of randomness lives in the instance's own stream, so a run is
// reproducible from (seed, action sequence).
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual Observation reset() = 0;
  virtual StepResult step(const Action& action) = 0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>(std::uint64_t seed)>;

// Names: "boximage", "sparsepoint", "fourrooms".
EnvFactory make_env_factory(const std::string& name);

}  // namespace emi::envs
