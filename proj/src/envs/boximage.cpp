#include "emi/envs/boximage.hpp"

#include "emi/error.hpp"

#include <algorithm>
#include <cmath>

namespace emi::envs {

BoxImage::BoxImage(std::uint64_t seed) : rng_(seed) {
  spec_.name = "boximage";
  spec_.observation = ObservationEncoding::image(kSize, kSize);
  spec_.action = ActionEncoding::continuous(2);
  spec_.action_low = {-1.0, -1.0};
  spec_.action_high = {1.0, 1.0};
  spec_.max_episode_steps = kEpisodeSteps;
}

Observation BoxImage::reset() {
  std::uniform_real_distribution<double> coord(0.0, kExtent);
  last_draws_ = 0;
  do {
    x_ = {coord(rng_), coord(rng_)};
    ++last_draws_;
  } while (std::hypot(x_[0], x_[1]) < kMinStartNorm);
  return render(x_);
}

StepResult BoxImage::step(const Action& action) {
  if (action.size() != 2) throw ShapeError("boximage action must have 2 values");
  StepResult r;
  x_ = advance(x_, {action[0], action[1]}, &r.clipped);
  r.observation = render(x_);
  return r;
}

std::array<double, 2> BoxImage::advance(const std::array<double, 2>& x, std::array<double, 2> a,
                                        bool* clipped) {
  bool hit = false;
  std::array<double, 2> next{};
  for (int i = 0; i < 2; ++i) {
    a[i] = std::clamp(a[i], -1.0, 1.0);
    const double raw = x[i] + a[i];
    next[i] = std::min(std::max(raw, 0.0), kExtent);
    hit = hit || next[i] != raw;
  }
  if (clipped) *clipped = hit;
  return next;
}

std::array<int, 2> BoxImage::pixel_center(const std::array<double, 2>& x) {
  const double scale = (kSize - 1) / kExtent;
  return {static_cast<int>(std::lround(x[1] * scale)), static_cast<int>(std::lround(x[0] * scale))};
}

Observation BoxImage::render(const std::array<double, 2>& x) {
  Observation img(static_cast<std::size_t>(kSize * kSize), 0.0);
  const auto [cr, cc] = pixel_center(x);
  for (int dr = -kDiskRadius; dr <= kDiskRadius; ++dr) {
    for (int dc = -kDiskRadius; dc <= kDiskRadius; ++dc) {
      if (dr * dr + dc * dc > kDiskRadius * kDiskRadius) continue;
      const int r = cr + dr;
      const int c = cc + dc;
      if (r < 0 || r >= kSize || c < 0 || c >= kSize) continue;
      img[static_cast<std::size_t>(r * kSize + c)] = 1.0;
    }
  }
  return img;
}

}  // namespace emi::envs
