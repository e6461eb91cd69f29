#include "emi/envs/sparsepoint.hpp"

#include "emi/error.hpp"

#include <algorithm>
#include <cmath>

namespace emi::envs {

SparsePoint::SparsePoint(std::uint64_t seed) : rng_(seed) {
  spec_.name = "sparsepoint";
  spec_.observation = ObservationEncoding::vector(1);
  spec_.action = ActionEncoding::continuous(1);
  spec_.action_low = {-1.0};
  spec_.action_high = {1.0};
  spec_.max_episode_steps = kEpisodeSteps;
}

Observation SparsePoint::reset() {
  x_ = 0.0;
  return {x_};
}

StepResult SparsePoint::transition(double x, double a, double noise) {
  const double clipped = std::clamp(a, -1.0, 1.0);
  StepResult r;
  const double next = x + kStepScale * clipped + noise;
  r.observation = {next};
  r.clipped = clipped != a;
  if (std::abs(next) >= kGoal) {
    r.reward = 1.0;
    r.done = true;
  }
  return r;
}

StepResult SparsePoint::step(const Action& action) {
  if (action.size() != 1) throw ShapeError("sparsepoint action must have 1 value");
  std::normal_distribution<double> noise(0.0, kNoiseStd);
  StepResult r = transition(x_, action[0], noise(rng_));
  x_ = r.observation[0];
  return r;
}

}  // namespace emi::envs
