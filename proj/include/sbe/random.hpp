// Seeded random streams.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sbe {

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Labels for the independent per-component streams derived from one master seed.
namespace stream {
inline constexpr std::string_view kSolverNoise = "solver-noise";
inline constexpr std::string_view kEvalNoise = "eval-noise";
inline constexpr std::string_view kInit = "init";
inline constexpr std::string_view kExploration = "exploration";
inline constexpr std::string_view kReplay = "replay-sampling";
}  // namespace stream

std::uint64_t splitmix64(std::uint64_t x);

// Stable seed for (master, label, index); changing one label's consumer
// never shifts another label's sequence.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

}  // namespace sbe
