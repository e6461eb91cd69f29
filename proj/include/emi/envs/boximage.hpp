#pragma once

#include "emi/envs/env.hpp"

#include <array>

namespace emi::envs {

// A white disk on a black 52x52 image; the hidden position x in [0, 100]^2
// moves by x' = min(max(x + a, 0), 100) with a in [-1, 1]^2. Reward is always 0.
class BoxImage : public Environment {
 public:
  static constexpr int kSize = 52;
  static constexpr double kExtent = 100.0;
  static constexpr double kMinStartNorm = 75.0;
  static constexpr int kDiskRadius = 2;
  static constexpr int kEpisodeSteps = 100;

  explicit BoxImage(std::uint64_t seed);

  const EnvSpec& spec() const override { return spec_; }
  Observation reset() override;
  StepResult step(const Action& action) override;

  const std::array<double, 2>& position() const { return x_; }
  void set_position(const std::array<double, 2>& x) { x_ = x; }
  // Rejection-sampler draws used by the last reset (>= 1).
  int last_reset_draws() const { return last_draws_; }

  // Clipped update; `clipped` reports whether either bound was active.
  static std::array<double, 2> advance(const std::array<double, 2>& x, std::array<double, 2> a,
                                       bool* clipped = nullptr);
  // Disk of radius 2 px centred at pixel (row, col) = (round(x2 * 51/100),
  // round(x1 * 51/100)), cut at the border. Intensities 0 or 1.
  static Observation render(const std::array<double, 2>& x);
  static std::array<int, 2> pixel_center(const std::array<double, 2>& x);

 private:
  EnvSpec spec_;
  num::Rng rng_;
  std::array<double, 2> x_{};
  int last_draws_ = 0;
};

}  // namespace emi::envs
