#pragma once

#include "emi/agent/policy.hpp"
#include "emi/agent/rollout.hpp"
#include "emi/numcore/adam.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace emi::agent {

struct UpdateDiagnostics {
  double mean_return = 0.0;  // mean environment return of the buffer's episodes
  double std_return = 0.0;
  double entropy = 0.0;      // mean policy entropy before the update
  double clip_fraction = 0.0;
  double value_loss = 0.0;
  bool policy_updated = false;  // false when every reward in the buffer was equal
};

// How the trajectory continues after step t.
enum class StepEnd : std::uint8_t { Continue, Terminal, Cut };

// R_t = r_t + discount * R_{t+1}, with R_{t+1} replaced by 0 after a terminal
// step and by bootstrap[t] (the value estimate of s'_t) after a cut one.
std::vector<double> discounted_returns(std::span<const double> rewards,
                                       std::span<const StepEnd> ends,
                                       std::span<const double> bootstrap, double discount);

// Clipped-surrogate policy gradient with a squared-error value baseline. The
// policy step is skipped when every reward in the buffer is equal.
// Adam moments persist across updates.
class PolicyTrainer {
 public:
  PolicyTrainer(Policy& policy, const PolicyConfig& config);

  // Uses buffer.rewards (augmented); fills returns and advantages.
  UpdateDiagnostics update(RolloutBuffer& buffer, num::Rng& rng);

  const PolicyConfig& config() const { return config_; }

 private:
  Policy& policy_;
  PolicyConfig config_;
  num::Adam policy_opt_;
  num::Adam baseline_opt_;
};

}  // namespace emi::agent
