#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reynet/dense_tensor.hpp"

namespace reynet {

/// Multilayer perceptron: affine layers with a rectifier on every hidden
/// layer and the identity on the output layer.
struct MLPParams {
  std::vector<int> dims;                 ///< d_0, d_1, ..., d_L
  std::vector<Eigen::MatrixXd> weights;  ///< layer k: d_{k+1} x d_k
  std::vector<Eigen::VectorXd> biases;   ///< layer k: d_{k+1}

  static MLPParams zeros(std::vector<int> dims);

  int layers() const noexcept { return static_cast<int>(weights.size()); }
  int input_dim() const noexcept { return dims.front(); }
  int output_dim() const noexcept { return dims.back(); }
  std::size_t parameter_count() const noexcept;
  bool valid() const noexcept;

  /// Shapes equal and every entry finite.
  bool same_shape(const MLPParams& other) const noexcept { return dims == other.dims; }
  bool all_finite() const noexcept;

  void set_zero();
  /// this += scale * other.
  void add_scaled(const MLPParams& other, double scale = 1.0);
  void scale(double factor);

  /// Flattened view in layer order (weights row-major, then bias), for checkpoints and tests.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> values);
};

/// Gradients share the parameter layout.
using MLPGrads = MLPParams;

/// Deterministic init: weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) drawn row-major
/// layer by layer from CounterRng(seed); biases zero.
MLPParams init_params(std::uint64_t seed, const std::vector<int>& dims);

std::vector<double> mlp_forward(const MLPParams& p, std::span<const double> x);

struct MLPGradient {
  MLPGrads params;
  std::vector<double> input;
};

/// Reverse-mode derivatives of upstreamᵀ · mlp_forward(p, x). ReLU'(0) = 0.
MLPGradient mlp_grad(const MLPParams& p, std::span<const double> x, std::span<const double> upstream);

/// Column-batched evaluation. activations[0] is the input, activations[k] the
/// output of layer k (post-rectifier for hidden layers).
struct MLPTape {
  std::vector<Eigen::MatrixXd> activations;
  const Eigen::MatrixXd& output() const { return activations.back(); }
};

void mlp_forward_batch(const MLPParams& p, Eigen::MatrixXd input, MLPTape& tape);

/// Adds the parameter gradients for all columns into `accum`; writes the input
/// gradient when `input_grad` is non-null. `upstream` is consumed.
void mlp_backward_batch(const MLPParams& p, const MLPTape& tape, Eigen::MatrixXd upstream, MLPGrads& accum,
                        Eigen::MatrixXd* input_grad = nullptr);

struct AdamConfig {
  double lr = 1e-3;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  MLPGrads first;
  MLPGrads second;

  static AdamState init(const MLPParams& like, AdamConfig config = {});
};

/// Decoupled weight decay p -= lr*wd*p, then the bias-corrected Adam update.
void adam_step(AdamState& state, MLPParams& params, const MLPGrads& grads);

enum class LossKind { standard_mse, corner_mse };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

struct LossResult {
  double value = 0.0;
  DenseTensor gradient;
};

/// standard_mse: mean over all n^m·b entries. corner_mse: mean over the
/// corner components only (|T_m|·b entries). Gradient is d(value)/d(prediction).
LossResult loss(LossKind kind, const DenseTensor& prediction, const DenseTensor& target);

}  // namespace reynet
