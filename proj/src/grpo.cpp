#include "tablerl/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tablerl/errors.hpp"

namespace tablerl {

namespace {

double checked_delta(double logp_current, double logp_reference, double max_abs_delta) {
  double delta = logp_current - logp_reference;
  if (std::fabs(delta) > max_abs_delta) {
    throw OverflowError("log-probability delta " + std::to_string(delta) +
                        " exceeds the bound " + std::to_string(max_abs_delta));
  }
  return delta;
}

}  // namespace

AdvantageSet group_advantages(const std::vector<double>& rewards, double eps_adv) {
  if (rewards.size() < 2) throw GroupTooSmallError(rewards.size());
  double n = static_cast<double>(rewards.size());
  double mu = 0.0;
  for (double r : rewards) mu += r;
  mu /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mu) * (r - mu);
  var /= n;
  AdvantageSet out;
  out.mu = mu;
  out.sigma = std::sqrt(var);
  out.advantages.reserve(rewards.size());
  for (double r : rewards) out.advantages.push_back((r - mu) / (out.sigma + eps_adv));
  return out;
}

double likelihood_ratio(double logp_current, double logp_reference, double max_abs_delta) {
  return std::exp(checked_delta(logp_current, logp_reference, max_abs_delta));
}

double clipped_term(double ratio, double advantage, double eps_clip) {
  double clipped = std::clamp(ratio, 1.0 - eps_clip, 1.0 + eps_clip);
  return std::min(ratio * advantage, clipped * advantage);
}

double kl_estimate(double logp_current, double logp_reference, double max_abs_delta) {
  double delta = checked_delta(logp_reference, logp_current, max_abs_delta);
  return std::exp(delta) - delta - 1.0;
}

double grpo_objective(const GroupBatch& batch, const GrpoConfig& config) {
  std::size_t g = batch.rewards.size();
  if (g < 2 || batch.logp_current.size() != g || batch.logp_reference.size() != g) {
    throw GroupTooSmallError(std::min({g, batch.logp_current.size(), batch.logp_reference.size()}));
  }
  auto advantages = group_advantages(batch.rewards, config.eps_adv);
  double surrogate = 0.0, kl = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    double ratio = likelihood_ratio(batch.logp_current[i], batch.logp_reference[i],
                                    config.max_abs_delta_logp);
    surrogate += clipped_term(ratio, advantages.advantages[i], config.eps_clip);
    kl += kl_estimate(batch.logp_current[i], batch.logp_reference[i],
                      config.max_abs_delta_logp);
  }
  return surrogate / static_cast<double>(g) - config.kl_weight * kl / static_cast<double>(g);
}

}  // namespace tablerl
