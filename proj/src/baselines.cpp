#include "sbe/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace sbe::baselines {

std::vector<double> uncontrolled_policy(const Field&, std::size_t action_dim) {
  return std::vector<double>(action_dim, 0.0);
}

std::vector<double> FeedbackController::operator()(const Field& state) const {
  const double ubar = spatial_mean(state);
  std::vector<double> a = block_means(state, action_dim);
  for (double& c : a) c = std::clamp(-gain * (c - ubar), f_min, f_max);
  return a;
}

std::vector<double> feedback_policy(const FeedbackController& controller, const Field& state) {
  return controller(state);
}

Policy make_uncontrolled(std::size_t action_dim) {
  return [action_dim](const Field& s) { return uncontrolled_policy(s, action_dim); };
}

Policy make_feedback(const FeedbackController& controller) {
  return [controller](const Field& s) { return controller(s); };
}

FeedbackController feedback_for(const EnvConfig& config, double gain) {
  return {gain, config.action_dim, config.f_min, config.f_max};
}

TunedGain tune_gain(const EnvConfig& config, const std::vector<double>& candidates,
                    std::size_t episodes_per_gain, std::uint64_t seed, std::size_t workers) {
  if (candidates.empty()) throw std::invalid_argument("tune_gain: no candidate gains");
  TunedGain out{candidates.front(), {}};
  double best = 0.0;
  for (double gain : candidates) {
    const auto results =
        evaluate_policy(config, make_feedback(feedback_for(config, gain)), episodes_per_gain, seed, {}, workers);
    const double mean = summarize_returns(results).mean;
    out.scores.push_back({gain, mean});
    const bool first = out.scores.size() == 1;
    if (first || mean > best || (mean == best && gain < out.gain)) {
      best = mean;
      out.gain = gain;
    }
  }
  return out;
}

}  // namespace sbe::baselines
