#include "emi/envs/env.hpp"

#include "emi/envs/boximage.hpp"
#include "emi/envs/fourrooms.hpp"
#include "emi/envs/sparsepoint.hpp"
#include "emi/error.hpp"

namespace emi::envs {

EnvFactory make_env_factory(const std::string& name) {
  if (name == "boximage") {
    return [](std::uint64_t seed) { return std::make_unique<BoxImage>(seed); };
  }
  if (name == "sparsepoint") {
    return [](std::uint64_t seed) { return std::make_unique<SparsePoint>(seed); };
  }
  if (name == "fourrooms") {
    return [](std::uint64_t seed) { return std::make_unique<FourRooms>(seed); };
  }
  throw ConfigError("env.name: unknown environment '" + name + "'");
}

}  // namespace emi::envs
