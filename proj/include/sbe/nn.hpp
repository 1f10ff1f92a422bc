// Dense feed-forward networks with ReLU hidden layers and a linear output
// layer, trained with Adam. Batches are column-major: one sample per column.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sbe/random.hpp"

namespace sbe::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Glorot-uniform: U(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
Matrix xavier_init(std::size_t fan_out, std::size_t fan_in, Rng& rng);
double xavier_bound(std::size_t fan_out, std::size_t fan_in);

struct DenseLayer {
  Matrix weight;  // fan_out x fan_in
  Vector bias;    // fan_out
};

struct Gradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;
  Matrix input;  // d(loss)/d(input), same shape as the forward input
};

class Mlp {
 public:
  Mlp() = default;
  // sizes = {input, hidden..., output}; weights Xavier, biases zero.
  Mlp(std::vector<std::size_t> sizes, Rng& rng);
  // All parameters zero.
  static Mlp zeros(std::vector<std::size_t> sizes);

  // Evaluates and caches activations for a following backward().
  Matrix forward(const Matrix& input);
  // Evaluates without touching the cache.
  Matrix predict(const Matrix& input) const;

  // Reverse-mode pass from d(loss)/d(output) for the cached batch. Throws
  // std::logic_error when no forward() has been cached.
  Gradients backward(const Matrix& upstream, bool parameter_grads = true) const;

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  // Parameters in layer order: weight (column-major), then bias.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(const std::vector<double>& flat);

  // theta <- tau * source + (1 - tau) * theta
  void soft_update_from(const Mlp& source, double tau);

  bool parameters_equal(const Mlp& other) const;
  bool all_finite() const;

 private:
  void check_input(const Matrix& input) const;

  std::vector<std::size_t> sizes_;
  std::vector<DenseLayer> layers_;
  std::vector<Matrix> layer_inputs_;
  std::vector<Matrix> pre_activations_;
  bool has_cache_ = false;
};

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamState() = default;
  AdamState(const Mlp& net, AdamHyper hyper);

  AdamHyper hyper{};
  long step = 0;
  std::vector<Matrix> m_weight, v_weight;
  std::vector<Vector> m_bias, v_bias;
};

// Bias-corrected Adam update. Throws std::domain_error on non-finite
// gradients, leaving parameters and state untouched.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

// Binary checkpoint: magic, layer sizes, then raw little-endian doubles.
// Loading reproduces forward outputs bit-exactly.
void save_mlp(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);

}  // namespace sbe::nn
