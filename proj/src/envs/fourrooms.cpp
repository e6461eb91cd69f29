#include "emi/envs/fourrooms.hpp"

#include "emi/error.hpp"

#include <cmath>

namespace emi::envs {

namespace {

bool is_door(const FourRooms::Cell& c) {
  return (c[0] == 10 && (c[1] == 5 || c[1] == 15)) || (c[1] == 10 && (c[0] == 5 || c[0] == 15));
}

}  // namespace

FourRooms::FourRooms(std::uint64_t /*seed*/) {
  spec_.name = "fourrooms";
  spec_.observation = ObservationEncoding::image(kPixels, kPixels);
  spec_.action = ActionEncoding::categorical(4);
  spec_.max_episode_steps = kEpisodeSteps;
}

bool FourRooms::is_wall(const Cell& c) {
  const auto [r, col] = c;
  if (r <= 0 || col <= 0 || r >= kCells - 1 || col >= kCells - 1) return true;
  if (r == 10 || col == 10) return !is_door(c);
  return false;
}

FourRooms::Cell FourRooms::move(const Cell& c, int action, bool* blocked) {
  Cell next = c;
  switch (action) {
    case Up: next[0] -= 1; break;
    case Down: next[0] += 1; break;
    case Left: next[1] -= 1; break;
    case Right: next[1] += 1; break;
    default: throw ShapeError("fourrooms action " + std::to_string(action) + " not in [0, 4)");
  }
  const bool wall = is_wall(next);
  if (blocked) *blocked = wall;
  return wall ? c : next;
}

std::array<int, 2> FourRooms::pixel_span(int i) {
  return {i * kPixels / kCells, (i + 1) * kPixels / kCells};
}

Observation FourRooms::render(const Cell& c) {
  Observation img(static_cast<std::size_t>(kPixels * kPixels), 0.0);
  auto fill = [&img](const Cell& cell, double value) {
    const auto [r0, r1] = pixel_span(cell[0]);
    const auto [c0, c1] = pixel_span(cell[1]);
    for (int r = r0; r < r1; ++r) {
      for (int col = c0; col < c1; ++col) img[static_cast<std::size_t>(r * kPixels + col)] = value;
    }
  };
  // The outer ring is implied by the image border; only interior walls are drawn.
  for (int r = 1; r < kCells - 1; ++r) {
    for (int col = 1; col < kCells - 1; ++col) {
      if (is_wall({r, col})) fill({r, col}, kWallIntensity);
    }
  }
  fill(c, 1.0);
  return img;
}

Observation FourRooms::reset() {
  cell_ = kStart;
  return render(cell_);
}

StepResult FourRooms::step(const Action& action) {
  if (action.size() != 1) throw ShapeError("fourrooms action must be a single index");
  const double a = action[0];
  if (a != std::floor(a)) throw ShapeError("fourrooms action must be an integer index");
  StepResult r;
  cell_ = move(cell_, static_cast<int>(a), &r.clipped);
  r.observation = render(cell_);
  if (cell_ == kGoal) {
    r.reward = 1.0;
    r.done = true;
  }
  return r;
}

}  // namespace emi::envs
