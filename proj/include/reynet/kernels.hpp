#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "reynet/mlp.hpp"
#include "reynet/model.hpp"

namespace reynet {

/// Batched ReyNet evaluation. Samples are columns: column s of an input
/// matrix holds the flattened input tensor of sample s (row-major, channel
/// innermost), and the same holds for outputs.
///
/// `parallel` splits the (design element, sample) columns of every component
/// into blocks of kBlockColumns and evaluates the blocks with OpenMP. Each
/// block owns its gradient buffer and buffers are summed in block order, so
/// results do not depend on the thread count. `serial` is the per-sample
/// reference built on equiv_forward / model_backward.
enum class Exec { serial, parallel };

inline constexpr Eigen::Index kBlockColumns = 256;

struct BatchOptions {
  Exec exec = Exec::parallel;
  /// Evaluate only the identity design element of each component, which
  /// produces exactly the corner components. Other entries stay zero.
  bool corner_only = false;
};

/// Activations kept between a forward and a backward pass of the parallel path.
struct EquivTape {
  struct Block {
    std::size_t component = 0;
    Eigen::Index begin = 0;
    Eigen::Index end = 0;
    MLPTape tape;
  };
  Eigen::Index batch = 0;
  bool corner_only = false;
  std::vector<Block> blocks;
};

/// Threads used by the parallel kernels (OpenMP). Defaults to one.
void set_kernel_threads(int threads);
int kernel_threads();

Eigen::MatrixXd equiv_forward_batch(const EquivariantReyNet& model, const Eigen::MatrixXd& x,
                                    const BatchOptions& opts = {}, EquivTape* tape = nullptr);

/// Adds d(Σ_s dy_s · E(x_s)) / d(params) into `accum`. A tape from the
/// matching forward call skips the recomputation.
void equiv_backward_batch(const EquivariantReyNet& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy,
                          std::vector<MLPGrads>& accum, const BatchOptions& opts = {},
                          const EquivTape* tape = nullptr);

}  // namespace reynet
