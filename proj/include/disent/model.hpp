#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "disent/matrix.hpp"
#include "disent/rng.hpp"
#include "disent/stats.hpp"

namespace disent {

/// Fully connected network shape. LeakyReLU on hidden layers, identity on
/// the output layer.
struct MlpSpec {
  std::vector<std::size_t> widths;  // input width first, output width last
  double leaky_slope = 0.01;

  std::size_t num_layers() const noexcept { return widths.empty() ? 0 : widths.size() - 1; }
  void validate() const;
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct DenseLayer {
  Matrix weight;  // in x out
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Per-layer cache of a forward pass: the input to each layer and its
/// pre-activation output.
struct ForwardTape {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre_activations;
};

class Mlp {
 public:
  Mlp() = default;
  /// All weights and biases zero.
  explicit Mlp(MlpSpec spec);
  /// He-normal weights, zero biases.
  static Mlp random(MlpSpec spec, Rng& rng);

  const MlpSpec& spec() const noexcept { return spec_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  std::size_t input_width() const noexcept { return spec_.widths.front(); }
  std::size_t output_width() const noexcept { return spec_.widths.back(); }
  std::size_t num_params() const noexcept;

  /// Appends weights then bias of each layer, in layer order.
  void flatten_into(std::vector<double>& out) const;
  /// Reads num_params() values from the front of `in`; returns the count read.
  std::size_t unflatten_from(std::span<const double> in);

  Matrix forward(const Matrix& x, ForwardTape* tape = nullptr) const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  MlpSpec spec_;
  std::vector<DenseLayer> layers_;
};

struct MlpBackward {
  Mlp param_grads;  // same shapes as the network
  Matrix input_grad;
};

/// Exact reverse-mode gradients of <upstream, net(x)> using a tape from net.forward.
MlpBackward backward(const Mlp& net, const ForwardTape& tape, const Matrix& upstream);

struct ModelSpec {
  MlpSpec encoder;
  MlpSpec classifier;
  std::optional<MlpSpec> adversary;
};

/// Encoder f_theta, main classifier C_phi and optional adversary head C_psi.
struct ModelParams {
  Mlp encoder;
  Mlp classifier;
  std::optional<Mlp> adversary;

  static ModelParams random(const ModelSpec& spec, Rng& rng);

  std::size_t num_params() const noexcept;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// z = f_theta(x) plus the tape needed for backward().
std::pair<Matrix, ForwardTape> encode(const ModelParams& params, const Matrix& x);

struct CrossEntropy {
  double loss = 0.0;
  Matrix dlogits;
};

/// Mean negative log-softmax of the true class over n x 2 logits.
CrossEntropy cross_entropy(const Matrix& logits, std::span<const Label> labels);

/// Fraction of rows whose argmax matches the label; ties go to class 0.
double accuracy(const Matrix& logits, std::span<const Label> labels);

/// Binary checkpoint. Layout, all integers and floats little-endian:
///   "DSNTCKPT" | u32 version=1 | u32 network_count
///   per network: u8 role (0 encoder, 1 classifier, 2 adversary)
///                | u32 width_count | u64 widths... | f64 leaky_slope
///                | per layer: f64 weight[in*out] (row-major) | f64 bias[out]
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace disent
