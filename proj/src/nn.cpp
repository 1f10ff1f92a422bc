#include "sbe/nn.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace sbe::nn {

double xavier_bound(std::size_t fan_out, std::size_t fan_in) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Matrix xavier_init(std::size_t fan_out, std::size_t fan_in, Rng& rng) {
  if (fan_out == 0 || fan_in == 0) throw std::invalid_argument("xavier_init: zero dimension");
  const double b = xavier_bound(fan_out, fan_in);
  Matrix w(fan_out, fan_in);
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-b, b);
  return w;
}

namespace {

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
  for (auto s : sizes)
    if (s == 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> sizes, Rng& rng) : sizes_(std::move(sizes)) {
  check_sizes(sizes_);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
    layers_.push_back({xavier_init(sizes_[l + 1], sizes_[l], rng), Vector::Zero(sizes_[l + 1])});
}

Mlp Mlp::zeros(std::vector<std::size_t> sizes) {
  check_sizes(sizes);
  Mlp net;
  net.sizes_ = std::move(sizes);
  for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l)
    net.layers_.push_back({Matrix::Zero(net.sizes_[l + 1], net.sizes_[l]), Vector::Zero(net.sizes_[l + 1])});
  return net;
}

void Mlp::check_input(const Matrix& input) const {
  if (static_cast<std::size_t>(input.rows()) != input_size())
    throw std::invalid_argument("Mlp: input has " + std::to_string(input.rows()) + " rows, expected " +
                                std::to_string(input_size()));
}

Matrix Mlp::forward(const Matrix& input) {
  check_input(input);
  const std::size_t n = layers_.size();
  layer_inputs_.resize(n);
  pre_activations_.resize(n);
  Matrix a = input;
  for (std::size_t l = 0; l < n; ++l) {
    layer_inputs_[l] = std::move(a);
    pre_activations_[l].noalias() = layers_[l].weight * layer_inputs_[l];
    pre_activations_[l].colwise() += layers_[l].bias;
    a = l + 1 < n ? Matrix(pre_activations_[l].cwiseMax(0.0)) : pre_activations_[l];
  }
  has_cache_ = true;
  return a;
}

Matrix Mlp::predict(const Matrix& input) const {
  check_input(input);
  Matrix a = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = layers_[l].weight * a;
    z.colwise() += layers_[l].bias;
    a = l + 1 < layers_.size() ? Matrix(z.cwiseMax(0.0)) : std::move(z);
  }
  return a;
}

Gradients Mlp::backward(const Matrix& upstream, bool parameter_grads) const {
  if (!has_cache_) throw std::logic_error("Mlp::backward called without a cached forward pass");
  const std::size_t n = layers_.size();
  if (upstream.rows() != pre_activations_.back().rows() || upstream.cols() != pre_activations_.back().cols())
    throw std::invalid_argument("Mlp::backward: upstream gradient shape mismatch");

  Gradients g;
  if (parameter_grads) {
    g.weight.resize(n);
    g.bias.resize(n);
  }
  Matrix delta = upstream;  // d(loss)/d(pre-activation) of the current layer
  for (std::size_t l = n; l-- > 0;) {
    if (parameter_grads) {
      g.weight[l].noalias() = delta * layer_inputs_[l].transpose();
      g.bias[l] = delta.rowwise().sum();
    }
    Matrix back = layers_[l].weight.transpose() * delta;
    if (l > 0)
      delta = back.cwiseProduct((pre_activations_[l - 1].array() > 0.0).cast<double>().matrix());
    else
      g.input = std::move(back);
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers_) count += layer.weight.size() + layer.bias.size();
  return count;
}

std::vector<double> Mlp::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& layer : layers_) {
    flat.insert(flat.end(), layer.weight.data(), layer.weight.data() + layer.weight.size());
    flat.insert(flat.end(), layer.bias.data(), layer.bias.data() + layer.bias.size());
  }
  return flat;
}

void Mlp::set_flat_parameters(const std::vector<double>& flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("Mlp: flat parameter count mismatch");
  const double* p = flat.data();
  for (auto& layer : layers_) {
    std::memcpy(layer.weight.data(), p, sizeof(double) * layer.weight.size());
    p += layer.weight.size();
    std::memcpy(layer.bias.data(), p, sizeof(double) * layer.bias.size());
    p += layer.bias.size();
  }
  has_cache_ = false;
}

void Mlp::soft_update_from(const Mlp& source, double tau) {
  if (source.sizes_ != sizes_) throw std::invalid_argument("Mlp::soft_update_from: shape mismatch");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weight = tau * source.layers_[l].weight + (1.0 - tau) * layers_[l].weight;
    layers_[l].bias = tau * source.layers_[l].bias + (1.0 - tau) * layers_[l].bias;
  }
}

bool Mlp::parameters_equal(const Mlp& other) const {
  if (sizes_ != other.sizes_) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l)
    if (layers_[l].weight != other.layers_[l].weight || layers_[l].bias != other.layers_[l].bias) return false;
  return true;
}

bool Mlp::all_finite() const {
  for (const auto& layer : layers_)
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  return true;
}

AdamState::AdamState(const Mlp& net, AdamHyper h) : hyper(h) {
  for (const auto& layer : net.layers()) {
    m_weight.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
    v_weight.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
    m_bias.push_back(Vector::Zero(layer.bias.size()));
    v_bias.push_back(Vector::Zero(layer.bias.size()));
  }
}

namespace {

template <class Param>
void adam_update(Param& p, const Param& g, Param& m, Param& v, const AdamHyper& h, double c1, double c2) {
  m = h.beta1 * m + (1.0 - h.beta1) * g;
  v = h.beta2 * v + (1.0 - h.beta2) * g.cwiseProduct(g);
  p.array() -= h.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + h.epsilon);
}

}  // namespace

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  auto& layers = net.layers();
  if (grads.weight.size() != layers.size() || grads.bias.size() != layers.size() ||
      state.m_weight.size() != layers.size())
    throw std::invalid_argument("adam_step: gradient/state shape mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads.weight[l].rows() != layers[l].weight.rows() || grads.weight[l].cols() != layers[l].weight.cols() ||
        grads.bias[l].size() != layers[l].bias.size())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    if (!grads.weight[l].allFinite() || !grads.bias[l].allFinite())
      throw std::domain_error("adam_step: non-finite gradient");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.hyper.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.hyper.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    adam_update(layers[l].weight, grads.weight[l], state.m_weight[l], state.v_weight[l], state.hyper, c1, c2);
    adam_update(layers[l].bias, grads.bias[l], state.m_bias[l], state.v_bias[l], state.hyper, c1, c2);
  }
}

namespace {

constexpr char kMagic[8] = {'S', 'B', 'E', 'M', 'L', 'P', '0', '1'};

void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("load_mlp: truncated checkpoint");
  return v;
}

void read_doubles(std::istream& in, double* dst, std::size_t count) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(sizeof(double) * count));
  if (!in) throw std::runtime_error("load_mlp: truncated checkpoint");
}

}  // namespace

void save_mlp(std::ostream& out, const Mlp& net) {
  out.write(kMagic, sizeof kMagic);
  write_u64(out, net.sizes().size());
  for (auto s : net.sizes()) write_u64(out, s);
  for (const auto& layer : net.layers()) {
    out.write(reinterpret_cast<const char*>(layer.weight.data()),
              static_cast<std::streamsize>(sizeof(double) * layer.weight.size()));
    out.write(reinterpret_cast<const char*>(layer.bias.data()),
              static_cast<std::streamsize>(sizeof(double) * layer.bias.size()));
  }
  if (!out) throw std::runtime_error("save_mlp: write failed");
}

Mlp load_mlp(std::istream& in) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("load_mlp: not an MLP checkpoint");
  const auto count = read_u64(in);
  if (count < 2 || count > 64) throw std::runtime_error("load_mlp: implausible layer count");
  std::vector<std::size_t> sizes(count);
  for (auto& s : sizes) {
    s = read_u64(in);
    if (s == 0 || s > (1u << 24)) throw std::runtime_error("load_mlp: implausible layer size");
  }
  Mlp net = Mlp::zeros(sizes);
  for (auto& layer : net.layers()) {
    read_doubles(in, layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
    read_doubles(in, layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
  return net;
}

}  // namespace sbe::nn
