#include "emi/agent/policy_update.hpp"

#include "emi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace emi::agent {

using num::Matrix;
using num::Var;

std::vector<double> discounted_returns(std::span<const double> rewards,
                                       std::span<const StepEnd> ends,
                                       std::span<const double> bootstrap, double discount) {
  const std::size_t n = rewards.size();
  if (ends.size() != n || bootstrap.size() != n) throw ShapeError("discounted_returns: length mismatch");
  std::vector<double> out(n);
  double next = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    if (ends[k] == StepEnd::Terminal) {
      next = 0.0;
    } else if (ends[k] == StepEnd::Cut) {
      next = bootstrap[k];
    }
    out[k] = rewards[k] + discount * next;
    next = out[k];
  }
  return out;
}

PolicyTrainer::PolicyTrainer(Policy& policy, const PolicyConfig& config)
    : policy_(policy),
      config_(config),
      policy_opt_(policy.policy_parameters(), num::AdamConfig{config.lr}),
      baseline_opt_(policy.baseline_parameters(), num::AdamConfig{config.baseline_lr}) {
  config_.validate();
}

UpdateDiagnostics PolicyTrainer::update(RolloutBuffer& buffer, num::Rng& rng) {
  const std::size_t n = buffer.size();
  if (n == 0) throw ShapeError("policy_update: empty buffer");
  if (buffer.rewards.size() != n || buffer.log_probs.size() != n || buffer.sampled_actions.size() != n) {
    throw ShapeError("policy_update: buffer columns misaligned");
  }

  const Batch batch = buffer.to_batch();
  const Matrix& obs = batch.states;
  const Matrix sampled = stack_rows(buffer.sampled_actions);

  // Episodes cut by the step cap or by the end of the buffer bootstrap from V(s').
  std::vector<StepEnd> ends(n, StepEnd::Continue);
  std::vector<envs::Observation> tails;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < n; ++i) {
    const envs::Transition& t = buffer.transitions[i];
    if (t.done) {
      ends[i] = StepEnd::Terminal;
    } else if (t.truncated || i + 1 == n) {
      ends[i] = StepEnd::Cut;
      tails.push_back(t.next_state);
      where.push_back(i);
    }
  }
  std::vector<double> bootstrap(n, 0.0);
  if (!tails.empty()) {
    const Matrix v = policy_.values(stack_rows(tails));
    for (std::size_t k = 0; k < where.size(); ++k) bootstrap[where[k]] = v(static_cast<Eigen::Index>(k), 0);
  }
  buffer.returns = discounted_returns(buffer.rewards, ends, bootstrap, config_.discount);

  const Matrix values = policy_.values(obs);
  buffer.advantages.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    buffer.advantages[i] = buffer.returns[i] - values(static_cast<Eigen::Index>(i), 0);
  }
  if (config_.normalize_advantages && n > 1) {
    const double mu = std::accumulate(buffer.advantages.begin(), buffer.advantages.end(), 0.0) /
                      static_cast<double>(n);
    double var = 0.0;
    for (double a : buffer.advantages) var += (a - mu) * (a - mu);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : buffer.advantages) a = (a - mu) / (sd + 1e-8);
  }

  UpdateDiagnostics diag;
  {
    const double m = std::accumulate(buffer.episode_returns.begin(), buffer.episode_returns.end(), 0.0) /
                     static_cast<double>(buffer.episode_returns.size());
    double v = 0.0;
    for (double r : buffer.episode_returns) v += (r - m) * (r - m);
    diag.mean_return = m;
    diag.std_return = std::sqrt(v / static_cast<double>(buffer.episode_returns.size()));
    num::Graph g;
    diag.entropy = mean(policy_.entropy(g, g.constant(obs))).scalar();
  }

  // A batch of identical rewards says nothing about which actions were
  // better; only the baseline is fitted.
  const auto [lo, hi] = std::minmax_element(buffer.rewards.begin(), buffer.rewards.end());
  diag.policy_updated = *lo != *hi;

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const std::size_t mb = static_cast<std::size_t>(config_.minibatch);
  std::size_t clipped = 0, seen = 0;
  double value_loss = 0.0;
  std::size_t value_batches = 0;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t count = std::min(mb, n - start);
      const auto rows = std::span(order).subspan(start, count);
      const auto c = static_cast<Eigen::Index>(count);
      Matrix x(c, obs.cols()), a(c, sampled.cols()), old_lp(c, 1), adv(c, 1), ret(c, 1);
      for (Eigen::Index i = 0; i < c; ++i) {
        const auto r = static_cast<std::size_t>(rows[static_cast<std::size_t>(i)]);
        x.row(i) = obs.row(rows[static_cast<std::size_t>(i)]);
        a.row(i) = sampled.row(rows[static_cast<std::size_t>(i)]);
        old_lp(i, 0) = buffer.log_probs[r];
        adv(i, 0) = buffer.advantages[r];
        ret(i, 0) = buffer.returns[r];
      }

      if (diag.policy_updated) {
        num::Graph g;
        const Var xv = g.constant(x);
        const Var ratio = exp(policy_.log_prob(g, xv, a) - g.constant(old_lp));
        const Var advv = g.constant(adv);
        const Var surrogate =
            g.minimum(ratio * advv, g.clamp(ratio, 1.0 - config_.clip_ratio, 1.0 + config_.clip_ratio) * advv);
        Var loss = -mean(surrogate);
        if (config_.entropy_coef != 0.0) loss = loss - config_.entropy_coef * mean(policy_.entropy(g, xv));
        policy_opt_.step(g.backward(loss));
        for (Eigen::Index i = 0; i < c; ++i) {
          clipped += std::abs(ratio.value()(i, 0) - 1.0) > config_.clip_ratio;
        }
        seen += count;
      }
      {
        num::Graph g;
        const Var err = policy_.value(g, g.constant(x)) - g.constant(ret);
        const Var loss = mean(square(err));
        baseline_opt_.step(g.backward(loss));
        value_loss += loss.scalar();
        ++value_batches;
      }
    }
  }
  for (const auto& [name, m] : policy_.named_parameters()) {
    if (!m->allFinite()) throw NumericError("policy update produced non-finite " + name);
  }
  diag.clip_fraction = seen ? static_cast<double>(clipped) / static_cast<double>(seen) : 0.0;
  diag.value_loss = value_loss / static_cast<double>(value_batches);
  return diag;
}

}  // namespace emi::agent
