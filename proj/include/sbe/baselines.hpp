// Reference controllers restricted to the piecewise-constant action class.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sbe/evaluation.hpp"

namespace sbe::baselines {

// Zero forcing.
std::vector<double> uncontrolled_policy(const Field& state, std::size_t action_dim);

// Proportional feedback on the piecewise-constant basis: each interval is
// forced against its mean deviation from the spatial mean,
//   a_j = clamp(-gain * (mean_j(u) - mean(u)), f_min, f_max).
// This is one reading of the classic suboptimal feedback laws for Burgers'
// flow; it is not the exact law of any particular reference.
struct FeedbackController {
  double gain = 1.0;
  std::size_t action_dim = 4;
  double f_min = -10.0;
  double f_max = 10.0;

  std::vector<double> operator()(const Field& state) const;
};

std::vector<double> feedback_policy(const FeedbackController& controller, const Field& state);

Policy make_uncontrolled(std::size_t action_dim);
Policy make_feedback(const FeedbackController& controller);

FeedbackController feedback_for(const EnvConfig& config, double gain);

struct GainScore {
  double gain;
  double mean_return;
};

struct TunedGain {
  double gain;
  std::vector<GainScore> scores;
};

// Grid search: mean undiscounted return per candidate over the same
// evaluation seeds; ties go to the smallest gain.
TunedGain tune_gain(const EnvConfig& config, const std::vector<double>& candidates,
                    std::size_t episodes_per_gain, std::uint64_t seed, std::size_t workers = 0);

}  // namespace sbe::baselines
