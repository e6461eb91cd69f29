#pragma once

#include "emi/envs/env.hpp"

namespace emi::envs {

// 1-D point: x' = x + 0.1 a + N(0, 0.01^2), a in [-1, 1]. The only reward is
// +1 on reaching |x'| >= 5, which ends the episode. Starts at x = 0.
class SparsePoint : public Environment {
 public:
  static constexpr double kStepScale = 0.1;
  static constexpr double kNoiseStd = 0.01;
  static constexpr double kGoal = 5.0;
  static constexpr int kEpisodeSteps = 500;

  explicit SparsePoint(std::uint64_t seed);

  const EnvSpec& spec() const override { return spec_; }
  Observation reset() override;
  StepResult step(const Action& action) override;

  double position() const { return x_; }
  void set_position(double x) { x_ = x; }

  // Deterministic part of a step given the noise draw.
  static StepResult transition(double x, double a, double noise);

 private:
  EnvSpec spec_;
  num::Rng rng_;
  double x_ = 0.0;
};

}  // namespace emi::envs
