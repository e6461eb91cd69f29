#pragma once

#include "emi/envs/env.hpp"

#include <array>
#include <optional>

namespace emi::envs {

// 21x21 cell maze: outer walls plus a wall cross at row/col 10 splitting four
// 9x9 rooms, joined by single-cell doors at (10,5), (10,15), (5,10), (15,10).
// The agent starts at (1,1) and earns +1 (episode ends) at (19,19), in the
// diagonally opposite room. Moves into walls leave the agent in place.
// Observations are 52x52 images: walls at 0.5, the agent's cell at 1.0.
class FourRooms : public Environment {
 public:
  static constexpr int kCells = 21;
  static constexpr int kPixels = 52;
  static constexpr int kEpisodeSteps = 400;
  static constexpr double kWallIntensity = 0.5;
  enum Move { Up = 0, Down = 1, Left = 2, Right = 3 };

  using Cell = std::array<int, 2>;  // (row, col)
  static constexpr Cell kStart{1, 1};
  static constexpr Cell kGoal{19, 19};

  explicit FourRooms(std::uint64_t seed);

  const EnvSpec& spec() const override { return spec_; }
  Observation reset() override;
  StepResult step(const Action& action) override;

  const Cell& cell() const { return cell_; }
  void set_cell(const Cell& c) { cell_ = c; }

  static bool is_wall(const Cell& c);
  // Throws ShapeError for an index outside {0, 1, 2, 3}.
  static Cell move(const Cell& c, int action, bool* blocked = nullptr);
  static Observation render(const Cell& c);
  // Pixel span [begin, end) covered by cell index i along one axis.
  static std::array<int, 2> pixel_span(int i);

 private:
  EnvSpec spec_;
  Cell cell_ = kStart;
};

}  // namespace emi::envs
