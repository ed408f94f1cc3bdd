#pragma once

#include <cstddef>
#include <vector>

namespace tablerl {

/// One sampled group: per-completion rewards and log-probabilities under the
/// current and reference policies. All three lists share length G >= 2.
struct GroupBatch {
  std::vector<double> rewards;
  std::vector<double> logp_current;
  std::vector<double> logp_reference;
};

struct GrpoConfig {
  double eps_adv = 1e-8;
  double eps_clip = 0.2;
  double kl_weight = 0.04;
  /// Log-probability deltas beyond this magnitude are refused instead of
  /// exponentiated.
  double max_abs_delta_logp = 30.0;
};

struct AdvantageSet {
  std::vector<double> advantages;
  double mu = 0.0;
  double sigma = 0.0;
};

/// Group-relative advantages: A_i = (r_i - mu) / (sigma + eps_adv), with mu
/// and sigma the population mean and standard deviation of the group.
/// Throws GroupTooSmallError below two completions.
AdvantageSet group_advantages(const std::vector<double>& rewards, double eps_adv);

/// exp(logp_current - logp_reference). Throws OverflowError when the delta's
/// magnitude exceeds `max_abs_delta`.
double likelihood_ratio(double logp_current, double logp_reference,
                        double max_abs_delta = 30.0);

/// min(ratio * advantage, clamp(ratio, 1 - eps_clip, 1 + eps_clip) * advantage).
double clipped_term(double ratio, double advantage, double eps_clip);

/// Per-sample estimator exp(delta) - delta - 1 with
/// delta = logp_reference - logp_current. Non-negative for all finite inputs.
double kl_estimate(double logp_current, double logp_reference,
                   double max_abs_delta = 30.0);

/// Mean clipped surrogate minus kl_weight times the mean KL estimate.
/// Throws GroupTooSmallError on short or mismatched batches and propagates
/// OverflowError from the ratio guard.
double grpo_objective(const GroupBatch& batch, const GrpoConfig& config);

}  // namespace tablerl
