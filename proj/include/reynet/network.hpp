#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "reynet/data.hpp"
#include "reynet/kernels.hpp"
#include "reynet/mlp.hpp"
#include "reynet/model.hpp"

namespace reynet {

enum class ModelKind { fnn, reynet, red_reynet, inv_reynet, inv_red_reynet };

/// Tags: fnn, reynet, red-reynet, inv-reynet, inv-red-reynet.
std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& name);

struct NetworkOptions {
  std::vector<int> hidden{128, 128};
  int body_channels = 8;  ///< b of the equivariant body of invariant models
  Pooling pooling = Pooling::max_diag_offdiag;
  bool stab_restricted = false;  ///< reduced models: depth-D components read only indices in [D]

  friend bool operator==(const NetworkOptions&, const NetworkOptions&) = default;
};

/// A trainable model for one task: the FNN baseline, an equivariant ReyNet,
/// or an invariant ReyNet. Batches are matrices with one sample per column.
class Network {
 public:
  using Model = std::variant<FnnModel, EquivariantReyNet, InvariantReyNet>;

  Network(ModelKind kind, Model model);

  /// `reynet` / `red_reynet` on an invariant task builds the invariant variant.
  static Network create(ModelKind kind, Task task, int n, const NetworkOptions& opts, std::uint64_t seed);

  ModelKind kind() const noexcept { return kind_; }
  const Model& model() const noexcept { return model_; }
  bool reduced() const noexcept;
  int n() const noexcept;
  TensorShape input_shape() const;
  TensorShape output_shape() const;

  /// Every MLP in a fixed order: FNN body; ReyNet components; invariant body components then head.
  std::vector<MLPParams*> parameters();
  std::vector<const MLPParams*> parameters() const;
  std::vector<MLPGrads> zero_grads() const;
  std::size_t parameter_count() const;

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x, Exec exec = Exec::parallel) const;

  /// Mean over the batch of the per-sample loss; adds d(loss)/d(params) into `grads`.
  double loss_and_grad(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, LossKind loss,
                       std::vector<MLPGrads>& grads, Exec exec = Exec::parallel) const;

  /// Same model at another n (reduced models only).
  Network transfer(int n_new) const;

 private:
  ModelKind kind_;
  Model model_;
};

/// Mean per-sample standard MSE of predictions against targets (columns are samples).
double batch_mse(const Eigen::MatrixXd& prediction, const Eigen::MatrixXd& target);

/// Inputs / targets of a dataset as column-per-sample matrices.
Eigen::MatrixXd dataset_inputs(const Dataset& ds);
Eigen::MatrixXd dataset_targets(const Dataset& ds);

}  // namespace reynet
