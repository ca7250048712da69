#include "reynet/network.hpp"

#include "reynet/error.hpp"
#include "reynet/tensor.hpp"

namespace reynet {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::fnn: return "fnn";
    case ModelKind::reynet: return "reynet";
    case ModelKind::red_reynet: return "red-reynet";
    case ModelKind::inv_reynet: return "inv-reynet";
    case ModelKind::inv_red_reynet: return "inv-red-reynet";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (auto k : {ModelKind::fnn, ModelKind::reynet, ModelKind::red_reynet, ModelKind::inv_reynet,
                 ModelKind::inv_red_reynet})
    if (to_string(k) == name) return k;
  throw DomainError("unknown model kind '" + name + "'");
}

namespace {

bool kind_matches(ModelKind kind, const Network::Model& model) {
  switch (kind) {
    case ModelKind::fnn: return std::holds_alternative<FnnModel>(model);
    case ModelKind::reynet:
    case ModelKind::red_reynet: return std::holds_alternative<EquivariantReyNet>(model);
    case ModelKind::inv_reynet:
    case ModelKind::inv_red_reynet: return std::holds_alternative<InvariantReyNet>(model);
  }
  return false;
}

bool kind_is_reduced(ModelKind k) { return k == ModelKind::red_reynet || k == ModelKind::inv_red_reynet; }

}  // namespace

Network::Network(ModelKind kind, Model model) : kind_(kind), model_(std::move(model)) {
  if (!kind_matches(kind_, model_)) throw DomainError("model kind tag does not match the model");
  const EquivariantReyNet* body = nullptr;
  if (auto* e = std::get_if<EquivariantReyNet>(&model_)) body = e;
  if (auto* i = std::get_if<InvariantReyNet>(&model_)) body = &i->body;
  if (body && body->reduced().has_value() != kind_is_reduced(kind_))
    throw DomainError("model kind '" + to_string(kind_) + "' disagrees with the model's reduced coordinates");
}

Network Network::create(ModelKind kind, Task task, int n, const NetworkOptions& opts, std::uint64_t seed) {
  const TensorShape in{n, 2, 1};
  const TensorShape out = task_output_shape(task, n);
  if (kind == ModelKind::fnn) return Network(kind, FnnModel::create(in, out, opts.hidden, seed));

  const bool reduced = kind_is_reduced(kind);
  std::optional<ReducedSpec> spec;
  if (reduced) spec = ReducedSpec::corner_block(2, opts.stab_restricted);
  if (task_is_invariant(task)) {
    const ReyNetShape body{n, 2, 1, 2, opts.body_channels};
    return Network(reduced ? ModelKind::inv_red_reynet : ModelKind::inv_reynet,
                   InvariantReyNet::create(body, spec, opts.pooling, opts.hidden, 1, seed));
  }
  if (kind == ModelKind::inv_reynet || kind == ModelKind::inv_red_reynet)
    throw DomainError("invariant model requested for an equivariant task");
  const ReyNetShape shape{n, 2, 1, out.order, 1};
  return Network(kind, EquivariantReyNet::create(shape, spec, opts.hidden, seed));
}

bool Network::reduced() const noexcept { return kind_is_reduced(kind_); }

int Network::n() const noexcept { return input_shape().n; }

TensorShape Network::input_shape() const {
  return std::visit(
      [](const auto& m) -> TensorShape {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FnnModel>) return m.input;
        else if constexpr (std::is_same_v<T, EquivariantReyNet>) return m.shape().input();
        else return m.body.shape().input();
      },
      model_);
}

TensorShape Network::output_shape() const {
  return std::visit(
      [](const auto& m) -> TensorShape {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FnnModel>) return m.output;
        else if constexpr (std::is_same_v<T, EquivariantReyNet>) return m.shape().output();
        else return TensorShape{m.body.shape().n, 0, m.head.output_dim()};
      },
      model_);
}

std::vector<MLPParams*> Network::parameters() {
  std::vector<MLPParams*> out;
  std::visit(
      [&out](auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FnnModel>) {
          out.push_back(&m.mlp);
        } else if constexpr (std::is_same_v<T, EquivariantReyNet>) {
          for (auto& p : m.components()) out.push_back(&p);
        } else {
          for (auto& p : m.body.components()) out.push_back(&p);
          out.push_back(&m.head);
        }
      },
      model_);
  return out;
}

std::vector<const MLPParams*> Network::parameters() const {
  auto mut = const_cast<Network*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::vector<MLPGrads> Network::zero_grads() const {
  std::vector<MLPGrads> out;
  for (const auto* p : parameters()) out.push_back(MLPParams::zeros(p->dims));
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t total = 0;
  for (const auto* p : parameters()) total += p->parameter_count();
  return total;
}

namespace {

Eigen::Index flat_size(const TensorShape& s) {
  return static_cast<Eigen::Index>(int_pow(s.n, s.order) * static_cast<std::size_t>(s.channels));
}

Eigen::MatrixXd pool_batch(const EquivariantReyNet& body, Pooling pooling, const Eigen::MatrixXd& y) {
  const auto& s = body.shape();
  const int width = pooled_width(pooling, s.out_order, s.out_channels);
  Eigen::MatrixXd out(width, y.cols());
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    const DenseTensor t(s.n, s.out_order, s.out_channels, std::vector<double>(y.col(k).data(), y.col(k).data() + y.rows()));
    const auto v = pool(t, pooling);
    out.col(k) = Eigen::Map<const Eigen::VectorXd>(v.data(), width);
  }
  return out;
}

Eigen::MatrixXd pool_backward_batch(const EquivariantReyNet& body, Pooling pooling, const Eigen::MatrixXd& y,
                                    const Eigen::MatrixXd& upstream) {
  const auto& s = body.shape();
  Eigen::MatrixXd out(y.rows(), y.cols());
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    const DenseTensor t(s.n, s.out_order, s.out_channels, std::vector<double>(y.col(k).data(), y.col(k).data() + y.rows()));
    const auto d = pool_backward(t, pooling, std::span<const double>(upstream.col(k).data(), static_cast<std::size_t>(upstream.rows())));
    out.col(k) = Eigen::Map<const Eigen::VectorXd>(d.data().data(), y.rows());
  }
  return out;
}

// Mean per-sample loss and its gradient with respect to the prediction.
double batch_loss(LossKind kind, const TensorShape& shape, const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                  Eigen::MatrixXd& grad) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) throw ShapeError("prediction/target shape mismatch");
  const double batch = static_cast<double>(pred.cols());
  if (kind == LossKind::standard_mse) {
    grad = pred - target;
    const double entries = static_cast<double>(pred.rows());
    const double value = grad.squaredNorm() / (entries * batch);
    grad *= 2.0 / (entries * batch);
    return value;
  }
  if (shape.order < 1) throw DomainError("corner loss needs a tensor output of order >= 1");
  const auto corners = corner_positions(shape.n, shape.order);
  const Eigen::Index b = shape.channels;
  const double entries = static_cast<double>(corners.size()) * static_cast<double>(b);
  grad = Eigen::MatrixXd::Zero(pred.rows(), pred.cols());
  double value = 0.0;
  for (std::size_t pos : corners)
    for (Eigen::Index beta = 0; beta < b; ++beta) {
      const Eigen::Index r = static_cast<Eigen::Index>(pos) * b + beta;
      grad.row(r) = pred.row(r) - target.row(r);
      value += grad.row(r).squaredNorm();
    }
  grad *= 2.0 / (entries * batch);
  return value / (entries * batch);
}

}  // namespace

Eigen::MatrixXd Network::predict(const Eigen::MatrixXd& x, Exec exec) const {
  if (x.rows() != flat_size(input_shape())) throw ShapeError("input batch does not match the model's input shape");
  const BatchOptions opts{exec, false};
  return std::visit(
      [&](const auto& m) -> Eigen::MatrixXd {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FnnModel>) {
          MLPTape tape;
          mlp_forward_batch(m.mlp, x, tape);
          return tape.output();
        } else if constexpr (std::is_same_v<T, EquivariantReyNet>) {
          return equiv_forward_batch(m, x, opts);
        } else {
          MLPTape tape;
          mlp_forward_batch(m.head, pool_batch(m.body, m.pooling, equiv_forward_batch(m.body, x, opts)), tape);
          return tape.output();
        }
      },
      model_);
}

double Network::loss_and_grad(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, LossKind loss,
                              std::vector<MLPGrads>& grads, Exec exec) const {
  if (x.rows() != flat_size(input_shape())) throw ShapeError("input batch does not match the model's input shape");
  if (y.rows() != flat_size(output_shape()) || y.cols() != x.cols())
    throw ShapeError("target batch does not match the model's output shape");
  if (grads.size() != parameters().size()) throw ShapeError("gradient list does not match the model");
  if (loss == LossKind::corner_mse && !std::holds_alternative<EquivariantReyNet>(model_))
    throw DomainError("corner loss applies only to equivariant ReyNet models");
  const TensorShape out = output_shape();
  Eigen::MatrixXd dy;
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FnnModel>) {
          MLPTape tape;
          mlp_forward_batch(m.mlp, x, tape);
          const double value = batch_loss(loss, out, tape.output(), y, dy);
          mlp_backward_batch(m.mlp, tape, std::move(dy), grads[0]);
          return value;
        } else if constexpr (std::is_same_v<T, EquivariantReyNet>) {
          const BatchOptions opts{exec, loss == LossKind::corner_mse};
          EquivTape tape;
          const Eigen::MatrixXd pred = equiv_forward_batch(m, x, opts, &tape);
          const double value = batch_loss(loss, out, pred, y, dy);
          equiv_backward_batch(m, x, dy, grads, opts, exec == Exec::parallel ? &tape : nullptr);
          return value;
        } else {
          const BatchOptions opts{exec, false};
          EquivTape body_tape;
          const Eigen::MatrixXd body_out = equiv_forward_batch(m.body, x, opts, &body_tape);
          MLPTape head_tape;
          mlp_forward_batch(m.head, pool_batch(m.body, m.pooling, body_out), head_tape);
          const double value = batch_loss(loss, out, head_tape.output(), y, dy);
          Eigen::MatrixXd pooled_grad;
          mlp_backward_batch(m.head, head_tape, std::move(dy), grads.back(), &pooled_grad);
          std::vector<MLPGrads> body_grads(std::make_move_iterator(grads.begin()),
                                           std::make_move_iterator(grads.end() - 1));
          equiv_backward_batch(m.body, x, pool_backward_batch(m.body, m.pooling, body_out, pooled_grad), body_grads,
                               opts, exec == Exec::parallel ? &body_tape : nullptr);
          std::move(body_grads.begin(), body_grads.end(), grads.begin());
          return value;
        }
      },
      model_);
}

Network Network::transfer(int n_new) const {
  if (!reduced()) throw ShapeError("model '" + to_string(kind_) + "' is tied to n = " + std::to_string(n()) +
                                   "; only reduced models transfer to another n");
  if (const auto* e = std::get_if<EquivariantReyNet>(&model_)) return Network(kind_, transfer_n(*e, n_new));
  const auto& inv = std::get<InvariantReyNet>(model_);
  return Network(kind_, InvariantReyNet{transfer_n(inv.body, n_new), inv.pooling, inv.head});
}

double batch_mse(const Eigen::MatrixXd& prediction, const Eigen::MatrixXd& target) {
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols())
    throw ShapeError("prediction/target shape mismatch");
  if (prediction.size() == 0) throw ShapeError("empty batch");
  return (prediction - target).squaredNorm() / static_cast<double>(prediction.size());
}

Eigen::MatrixXd dataset_inputs(const Dataset& ds) {
  return Eigen::Map<const Eigen::MatrixXd>(ds.inputs.data(), static_cast<Eigen::Index>(ds.input_size()),
                                           static_cast<Eigen::Index>(ds.count));
}

Eigen::MatrixXd dataset_targets(const Dataset& ds) {
  return Eigen::Map<const Eigen::MatrixXd>(ds.targets.data(), static_cast<Eigen::Index>(ds.output_size()),
                                           static_cast<Eigen::Index>(ds.count));
}

}  // namespace reynet
