#include "reynet/mlp.hpp"

#include <cmath>

#include "reynet/error.hpp"
#include "reynet/rng.hpp"
#include "reynet/tensor.hpp"

namespace reynet {

MLPParams MLPParams::zeros(std::vector<int> dims) {
  if (dims.size() < 2) throw ShapeError("an MLP needs at least input and output widths");
  for (int d : dims)
    if (d < 1) throw ShapeError("MLP widths must be positive");
  MLPParams p;
  p.dims = std::move(dims);
  for (std::size_t k = 0; k + 1 < p.dims.size(); ++k) {
    p.weights.push_back(Eigen::MatrixXd::Zero(p.dims[k + 1], p.dims[k]));
    p.biases.push_back(Eigen::VectorXd::Zero(p.dims[k + 1]));
  }
  return p;
}

std::size_t MLPParams::parameter_count() const noexcept {
  std::size_t total = 0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    total += static_cast<std::size_t>(weights[k].size() + biases[k].size());
  return total;
}

bool MLPParams::valid() const noexcept {
  if (dims.size() < 2 || weights.size() + 1 != dims.size() || biases.size() != weights.size()) return false;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].rows() != dims[k + 1] || weights[k].cols() != dims[k]) return false;
    if (biases[k].size() != dims[k + 1]) return false;
  }
  return true;
}

bool MLPParams::all_finite() const noexcept {
  for (std::size_t k = 0; k < weights.size(); ++k)
    if (!weights[k].allFinite() || !biases[k].allFinite()) return false;
  return true;
}

void MLPParams::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

void MLPParams::add_scaled(const MLPParams& other, double scale) {
  if (!same_shape(other)) throw ShapeError("MLP parameter shapes differ");
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k] += scale * other.weights[k];
    biases[k] += scale * other.biases[k];
  }
}

void MLPParams::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
}

std::vector<double> MLPParams::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    for (Eigen::Index r = 0; r < weights[k].rows(); ++r)
      for (Eigen::Index c = 0; c < weights[k].cols(); ++c) out.push_back(weights[k](r, c));
    for (Eigen::Index r = 0; r < biases[k].size(); ++r) out.push_back(biases[k](r));
  }
  return out;
}

void MLPParams::unflatten(std::span<const double> values) {
  if (values.size() != parameter_count()) throw ShapeError("flattened parameter count mismatch");
  std::size_t i = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    for (Eigen::Index r = 0; r < weights[k].rows(); ++r)
      for (Eigen::Index c = 0; c < weights[k].cols(); ++c) weights[k](r, c) = values[i++];
    for (Eigen::Index r = 0; r < biases[k].size(); ++r) biases[k](r) = values[i++];
  }
}

MLPParams init_params(std::uint64_t seed, const std::vector<int>& dims) {
  if (dims.empty()) throw ShapeError("init_params: empty layer list");
  MLPParams p = MLPParams::zeros(dims);
  CounterRng rng(seed);
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[k]));
    for (Eigen::Index r = 0; r < p.weights[k].rows(); ++r)
      for (Eigen::Index c = 0; c < p.weights[k].cols(); ++c) p.weights[k](r, c) = rng.uniform(-bound, bound);
  }
  return p;
}

namespace {

// Plain-loop forward pass keeping every layer's output; independent of the
// Eigen product path used by the batched kernels.
std::vector<std::vector<double>> forward_layers(const MLPParams& p, std::span<const double> x) {
  if (static_cast<int>(x.size()) != p.input_dim())
    throw ShapeError("MLP input has " + std::to_string(x.size()) + " entries, expected " +
                     std::to_string(p.input_dim()));
  std::vector<std::vector<double>> acts;
  acts.emplace_back(x.begin(), x.end());
  for (int k = 0; k < p.layers(); ++k) {
    const auto& w = p.weights[static_cast<std::size_t>(k)];
    const auto& b = p.biases[static_cast<std::size_t>(k)];
    const auto& in = acts.back();
    std::vector<double> out(static_cast<std::size_t>(w.rows()));
    const bool hidden = k + 1 < p.layers();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double z = b(r);
      for (Eigen::Index c = 0; c < w.cols(); ++c) z += w(r, c) * in[static_cast<std::size_t>(c)];
      out[static_cast<std::size_t>(r)] = hidden && z < 0.0 ? 0.0 : z;
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

}  // namespace

std::vector<double> mlp_forward(const MLPParams& p, std::span<const double> x) {
  return forward_layers(p, x).back();
}

MLPGradient mlp_grad(const MLPParams& p, std::span<const double> x, std::span<const double> upstream) {
  if (static_cast<int>(upstream.size()) != p.output_dim()) throw ShapeError("mlp_grad: upstream width mismatch");
  const auto acts = forward_layers(p, x);
  MLPGradient g{MLPParams::zeros(p.dims), {}};
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (int k = p.layers() - 1; k >= 0; --k) {
    const auto ks = static_cast<std::size_t>(k);
    const auto& w = p.weights[ks];
    const auto& in = acts[ks];
    if (k + 1 < p.layers()) {
      // Rectifier: pass the gradient only where the output was positive.
      const auto& out = acts[ks + 1];
      for (std::size_t r = 0; r < delta.size(); ++r)
        if (out[r] <= 0.0) delta[r] = 0.0;
    }
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      g.params.biases[ks](r) += delta[static_cast<std::size_t>(r)];
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        g.params.weights[ks](r, c) += delta[static_cast<std::size_t>(r)] * in[static_cast<std::size_t>(c)];
    }
    std::vector<double> prev(static_cast<std::size_t>(w.cols()), 0.0);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) prev[static_cast<std::size_t>(c)] += w(r, c) * delta[static_cast<std::size_t>(r)];
    delta = std::move(prev);
  }
  g.input = std::move(delta);
  return g;
}

void mlp_forward_batch(const MLPParams& p, Eigen::MatrixXd input, MLPTape& tape) {
  if (input.rows() != p.input_dim()) throw ShapeError("mlp_forward_batch: input rows mismatch");
  tape.activations.resize(static_cast<std::size_t>(p.layers()) + 1);
  tape.activations[0] = std::move(input);
  for (int k = 0; k < p.layers(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    auto& out = tape.activations[ks + 1];
    out.noalias() = p.weights[ks] * tape.activations[ks];
    out.colwise() += p.biases[ks];
    if (k + 1 < p.layers()) out = out.cwiseMax(0.0);
  }
}

void mlp_backward_batch(const MLPParams& p, const MLPTape& tape, Eigen::MatrixXd upstream, MLPGrads& accum,
                        Eigen::MatrixXd* input_grad) {
  if (upstream.rows() != p.output_dim() || upstream.cols() != tape.output().cols())
    throw ShapeError("mlp_backward_batch: upstream shape mismatch");
  Eigen::MatrixXd delta = std::move(upstream);
  for (int k = p.layers() - 1; k >= 0; --k) {
    const auto ks = static_cast<std::size_t>(k);
    if (k + 1 < p.layers()) delta = (tape.activations[ks + 1].array() > 0.0).select(delta, 0.0);
    accum.weights[ks].noalias() += delta * tape.activations[ks].transpose();
    accum.biases[ks] += delta.rowwise().sum();
    if (k > 0 || input_grad != nullptr) {
      Eigen::MatrixXd prev = p.weights[ks].transpose() * delta;
      delta = std::move(prev);
    }
  }
  if (input_grad != nullptr) *input_grad = std::move(delta);
}

AdamState AdamState::init(const MLPParams& like, AdamConfig config) {
  return AdamState{config, 0, MLPParams::zeros(like.dims), MLPParams::zeros(like.dims)};
}

void adam_step(AdamState& state, MLPParams& params, const MLPGrads& grads) {
  if (!params.same_shape(grads) || !params.same_shape(state.first))
    throw ShapeError("adam_step: parameter, gradient and moment shapes differ");
  const AdamConfig& c = state.config;
  ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  const double decay = 1.0 - c.lr * c.weight_decay;
  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    p *= decay;
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    p.array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
  };
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    update(params.weights[k], state.first.weights[k], state.second.weights[k], grads.weights[k]);
    update(params.biases[k], state.first.biases[k], state.second.biases[k], grads.biases[k]);
  }
}

std::string to_string(LossKind kind) { return kind == LossKind::corner_mse ? "corner" : "mse"; }

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "mse" || name == "standard_mse") return LossKind::standard_mse;
  if (name == "corner" || name == "corner_mse") return LossKind::corner_mse;
  throw DomainError("unknown loss '" + name + "' (expected mse or corner)");
}

LossResult loss(LossKind kind, const DenseTensor& prediction, const DenseTensor& target) {
  if (!prediction.same_shape(target)) throw ShapeError("loss: prediction and target shapes differ");
  LossResult r{0.0, DenseTensor(prediction.n(), prediction.order(), prediction.channels())};
  if (kind == LossKind::standard_mse) {
    const double count = static_cast<double>(prediction.size());
    for (std::size_t k = 0; k < prediction.size(); ++k) {
      const double diff = prediction[k] - target[k];
      r.value += diff * diff;
      r.gradient[k] = 2.0 * diff / count;
    }
    r.value /= count;
    return r;
  }
  if (prediction.order() < 1) throw ShapeError("corner loss needs a tensor output of order >= 1");
  const auto corners = corner_positions(prediction.n(), prediction.order());
  const std::size_t b = static_cast<std::size_t>(prediction.channels());
  const double count = static_cast<double>(corners.size() * b);
  for (std::size_t pos : corners)
    for (std::size_t c = 0; c < b; ++c) {
      const std::size_t k = pos * b + c;
      const double diff = prediction[k] - target[k];
      r.value += diff * diff;
      r.gradient[k] = 2.0 * diff / count;
    }
  r.value /= count;
  return r;
}

}  // namespace reynet
