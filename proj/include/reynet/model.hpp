#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reynet/dense_tensor.hpp"
#include "reynet/group.hpp"
#include "reynet/mlp.hpp"
#include "reynet/reynolds.hpp"
#include "reynet/tableau.hpp"

namespace reynet {

/// Coordinates of the input each component network reads (d-reduced models).
///
/// With `restrict_to_depth`, a component of depth D only reads the listed
/// coordinates whose indices all lie in [D]; such components are invariant
/// under Stab([D]) and the resulting model is exactly equivariant.
struct ReducedSpec {
  std::vector<std::vector<int>> coords;
  bool restrict_to_depth = false;

  /// All multi-indices of [2]^order in row-major order; for order 2 this is
  /// (1,1), (1,2), (2,1), (2,2).
  static ReducedSpec corner_block(int order, bool restrict_to_depth = false);

  std::vector<std::vector<int>> coords_for_depth(int depth) const;
  int max_index() const noexcept;
  void validate(int order) const;

  friend bool operator==(const ReducedSpec&, const ReducedSpec&) = default;
};

struct ReyNetShape {
  int n = 2;
  int in_order = 2;      ///< l
  int in_channels = 1;   ///< a
  int out_order = 2;     ///< m
  int out_channels = 1;  ///< b

  TensorShape input() const noexcept { return {n, in_order, in_channels}; }
  TensorShape output() const noexcept { return {n, out_order, out_channels}; }
  friend bool operator==(const ReyNetShape&, const ReyNetShape&) = default;
};

/// Index maps for one component network N_T, one row per design element g ∈ H_D.
struct ComponentPlan {
  int depth = 1;
  std::size_t design_size = 0;
  int input_width = 0;
  std::vector<std::size_t> gather;   ///< design_size x input_width offsets into the input data
  std::vector<std::size_t> scatter;  ///< design_size output positions φ(g^-1·(1..D), T)

  std::span<const std::size_t> gather_row(std::size_t k) const {
    return {gather.data() + k * static_cast<std::size_t>(input_width), static_cast<std::size_t>(input_width)};
  }
};

/// E = Σ_D Σ_{T ∈ T_{m,D}} τ_{H_D}(N_T ∘ ê_{T,b}).
///
/// Component c belongs to the c-th tableau of enum_basis_tableaux(m). For
/// every g ∈ H_D the component reads the input after the action of g (whole
/// tensor, or only the reduced coordinates) and its output, divided by |H_D|,
/// lands at position φ(g^-1·(1..D), T).
class EquivariantReyNet {
 public:
  EquivariantReyNet(ReyNetShape shape, std::optional<ReducedSpec> reduced, std::vector<MLPParams> components);

  /// Components of widths [input, hidden..., b], initialized from split streams of `seed`.
  static EquivariantReyNet create(ReyNetShape shape, std::optional<ReducedSpec> reduced,
                                  const std::vector<int>& hidden, std::uint64_t seed);

  const ReyNetShape& shape() const noexcept { return shape_; }
  const std::vector<BasisTableau>& tableaux() const noexcept { return tableaux_; }
  const std::optional<ReducedSpec>& reduced() const noexcept { return reduced_; }
  const std::vector<ComponentPlan>& plan() const noexcept { return plan_; }

  std::vector<MLPParams>& components() noexcept { return components_; }
  const std::vector<MLPParams>& components() const noexcept { return components_; }

  /// Input width of the component network for a given depth.
  int component_input_width(int depth) const;
  std::size_t parameter_count() const noexcept;
  /// Σ_D |T_{m,D}|·|H_D|: component evaluations per forward pass.
  std::size_t evaluations_per_forward() const noexcept;

 private:
  void build_plan();

  ReyNetShape shape_;
  std::optional<ReducedSpec> reduced_;
  std::vector<BasisTableau> tableaux_;
  std::vector<MLPParams> components_;
  std::vector<ComponentPlan> plan_;
};

/// Instrumentation filled by equiv_forward.
struct ForwardStats {
  std::size_t mlp_evaluations = 0;
  std::vector<int> writes;  ///< per output position
};

/// Reference forward pass, one sample, canonical order (D ascending, tableaux
/// in enumeration order, design elements in design order).
DenseTensor equiv_forward(const EquivariantReyNet& model, const DenseTensor& x, ForwardStats* stats = nullptr);

/// (g·X) at the listed coordinates, channel innermost, by index lookup.
std::vector<double> reduced_gather(const DenseTensor& x, const Permutation& g, const ReducedSpec& spec);

/// Reference reverse pass: d(upstream · E(x)) / d(component parameters).
std::vector<MLPGrads> model_backward(const EquivariantReyNet& model, const DenseTensor& x,
                                     const DenseTensor& upstream);

/// Re-target a reduced model to another n. Component networks keep their
/// weights; the output layer of each depth-D component is rescaled by
/// |H_D(n_new)| / |H_D(n)| so the per-entry contribution N_T/|H_D| is unchanged.
EquivariantReyNet transfer_n(const EquivariantReyNet& model, int n_new);

enum class Pooling { orbit_sum, max_diag_offdiag };

std::string to_string(Pooling p);
Pooling pooling_from_string(const std::string& name);

/// I = M ∘ pool ∘ E.
struct InvariantReyNet {
  EquivariantReyNet body;
  Pooling pooling = Pooling::max_diag_offdiag;
  MLPParams head;

  static InvariantReyNet create(ReyNetShape body_shape, std::optional<ReducedSpec> reduced, Pooling pooling,
                                const std::vector<int>& hidden, int out_width, std::uint64_t seed);

  std::size_t parameter_count() const noexcept { return body.parameter_count() + head.parameter_count(); }
};

/// Width of the pooled vector for a body output of order m and b channels.
int pooled_width(Pooling pooling, int m, int channels);

/// orbit_sum: orbit totals in canonical tableau order, channel innermost.
/// max_diag_offdiag (m = 2): (max over diagonal entries, max over off-diagonal entries), per channel.
std::vector<double> pool(const DenseTensor& y, Pooling pooling);

/// d(upstream · pool(y)) / dy. Ties in a max go to the first position.
DenseTensor pool_backward(const DenseTensor& y, Pooling pooling, std::span<const double> upstream);

std::vector<double> invariant_forward(const InvariantReyNet& model, const DenseTensor& x);

struct InvariantGrads {
  std::vector<MLPGrads> body;
  MLPGrads head;
};

InvariantGrads invariant_backward(const InvariantReyNet& model, const DenseTensor& x,
                                  std::span<const double> upstream);

/// Plain MLP on the flattened input.
struct FnnModel {
  TensorShape input;
  TensorShape output;
  MLPParams mlp;

  static FnnModel create(TensorShape input, TensorShape output, const std::vector<int>& hidden, std::uint64_t seed);
};

DenseTensor fnn_forward(const FnnModel& model, const DenseTensor& x);

}  // namespace reynet
