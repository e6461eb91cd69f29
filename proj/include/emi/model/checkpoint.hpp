#pragma once

#include "emi/numcore/matrix.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace emi {

// Text container of named matrices:
//
//   emi-checkpoint 1
//   meta <key> <value to end of line>        (zero or more)
//   matrix <name> <rows> <cols>
//   <cols values, %.17g, space separated>     (one line per row)
//   ...
//   end
//
// Values round-trip exactly through %.17g.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, num::Matrix>> matrices;

  const num::Matrix& at(const std::string& name) const;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

Checkpoint snapshot(const std::vector<std::pair<std::string, num::Matrix*>>& params);
// Copies matrices into `params` by name; ShapeError on a missing name or
// shape mismatch.
void restore(const Checkpoint& checkpoint,
             const std::vector<std::pair<std::string, num::Matrix*>>& params);

}  // namespace emi
