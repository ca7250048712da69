#include "reynet/model.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "reynet/error.hpp"
#include "reynet/rng.hpp"
#include "reynet/tensor.hpp"

namespace reynet {

ReducedSpec ReducedSpec::corner_block(int order, bool restrict_to_depth) {
  ReducedSpec spec{{}, restrict_to_depth};
  const std::size_t count = int_pow(2, order);
  for (std::size_t pos = 0; pos < count; ++pos) spec.coords.push_back(unflatten(pos, 2, order));
  return spec;
}

std::vector<std::vector<int>> ReducedSpec::coords_for_depth(int depth) const {
  if (!restrict_to_depth) return coords;
  std::vector<std::vector<int>> out;
  for (const auto& c : coords)
    if (std::all_of(c.begin(), c.end(), [depth](int i) { return i <= depth; })) out.push_back(c);
  return out;
}

int ReducedSpec::max_index() const noexcept {
  int top = 0;
  for (const auto& c : coords)
    for (int i : c) top = std::max(top, i);
  return top;
}

void ReducedSpec::validate(int order) const {
  if (coords.empty()) throw DomainError("reduced model lists no coordinates");
  for (std::size_t a = 0; a < coords.size(); ++a) {
    if (static_cast<int>(coords[a].size()) != order) throw ShapeError("reduced coordinate has the wrong order");
    for (int i : coords[a])
      if (i < 1) throw DomainError("reduced coordinate index must be >= 1");
    for (std::size_t b = 0; b < a; ++b)
      if (coords[a] == coords[b]) throw DomainError("reduced coordinates must be distinct");
  }
}

EquivariantReyNet::EquivariantReyNet(ReyNetShape shape, std::optional<ReducedSpec> reduced,
                                     std::vector<MLPParams> components)
    : shape_(shape), reduced_(std::move(reduced)), tableaux_(), components_(std::move(components)) {
  if (shape_.n < 1 || shape_.in_order < 0 || shape_.in_channels < 1 || shape_.out_order < 1 ||
      shape_.out_channels < 1)
    throw ShapeError("invalid ReyNet shape");
  if (shape_.n < shape_.out_order)
    throw ShapeError("ReyNet needs n >= m (n = " + std::to_string(shape_.n) + ", m = " +
                     std::to_string(shape_.out_order) + ")");
  if (reduced_) {
    reduced_->validate(shape_.in_order);
    if (reduced_->max_index() > shape_.n)
      throw ShapeError("reduced coordinates reach index " + std::to_string(reduced_->max_index()) +
                       " but n = " + std::to_string(shape_.n));
  }
  tableaux_ = enum_basis_tableaux(shape_.out_order);
  if (components_.size() != tableaux_.size())
    throw ShapeError("expected one component network per basis tableau (" + std::to_string(tableaux_.size()) + ")");
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const auto& p = components_[c];
    if (!p.valid()) throw ShapeError("malformed component network");
    if (p.input_dim() != component_input_width(tableaux_[c].depth()) || p.output_dim() != shape_.out_channels)
      throw ShapeError("component " + std::to_string(c) + " has widths incompatible with the model shape");
  }
  build_plan();
}

EquivariantReyNet EquivariantReyNet::create(ReyNetShape shape, std::optional<ReducedSpec> reduced,
                                            const std::vector<int>& hidden, std::uint64_t seed) {
  const auto tableaux = enum_basis_tableaux(shape.out_order);
  std::vector<MLPParams> components;
  const CounterRng root(seed);
  for (std::size_t c = 0; c < tableaux.size(); ++c) {
    const int depth = tableaux[c].depth();
    int width = 0;
    if (reduced) {
      width = static_cast<int>(reduced->coords_for_depth(depth).size()) * shape.in_channels;
    } else {
      width = static_cast<int>(int_pow(shape.n, shape.in_order)) * shape.in_channels;
    }
    std::vector<int> dims{width};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(shape.out_channels);
    components.push_back(init_params(root.split(c + 1).seed(), dims));
  }
  return EquivariantReyNet(shape, std::move(reduced), std::move(components));
}

int EquivariantReyNet::component_input_width(int depth) const {
  if (reduced_) return static_cast<int>(reduced_->coords_for_depth(depth).size()) * shape_.in_channels;
  return static_cast<int>(int_pow(shape_.n, shape_.in_order)) * shape_.in_channels;
}

std::size_t EquivariantReyNet::parameter_count() const noexcept {
  std::size_t total = 0;
  for (const auto& p : components_) total += p.parameter_count();
  return total;
}

std::size_t EquivariantReyNet::evaluations_per_forward() const noexcept {
  std::size_t total = 0;
  for (const auto& p : plan_) total += p.design_size;
  return total;
}

void EquivariantReyNet::build_plan() {
  const int n = shape_.n;
  const int order = shape_.in_order;
  const std::size_t a = static_cast<std::size_t>(shape_.in_channels);
  plan_.clear();
  for (const auto& t : tableaux_) {
    const int depth = t.depth();
    std::vector<std::vector<int>> coords;
    if (reduced_) {
      coords = reduced_->coords_for_depth(depth);
      if (coords.empty())
        throw DomainError("reduced coordinates leave nothing for depth " + std::to_string(depth));
    } else {
      const std::size_t positions = int_pow(n, order);
      for (std::size_t pos = 0; pos < positions; ++pos) coords.push_back(unflatten(pos, n, order));
    }
    const DesignHD design = enumerate_design(n, depth);
    ComponentPlan p;
    p.depth = depth;
    p.design_size = design.size();
    p.input_width = static_cast<int>(coords.size() * a);
    p.gather.reserve(p.design_size * static_cast<std::size_t>(p.input_width));
    p.scatter.reserve(p.design_size);
    for (const auto& g : design.elements) {
      const Permutation inv = invert(g);
      const auto ginv = inv.zero_based();
      for (const auto& coord : coords) {
        std::size_t off = 0;
        for (int i : coord) off = off * static_cast<std::size_t>(n) + static_cast<std::size_t>(ginv[static_cast<std::size_t>(i - 1)]);
        for (std::size_t c = 0; c < a; ++c) p.gather.push_back(off * a + c);
      }
      // φ(g^-1·(1..D), T): position l carries label g^-1(d) for its row d.
      std::vector<int> u(static_cast<std::size_t>(shape_.out_order));
      for (std::size_t d = 0; d < t.rows.size(); ++d)
        for (int l : t.rows[d]) u[static_cast<std::size_t>(l - 1)] = ginv[d];
      std::size_t pos = 0;
      for (int v : u) pos = pos * static_cast<std::size_t>(n) + static_cast<std::size_t>(v);
      p.scatter.push_back(pos);
    }
    plan_.push_back(std::move(p));
  }
}

namespace {

void check_input(const EquivariantReyNet& model, const DenseTensor& x) {
  if (!model.shape().input().matches(x))
    throw ShapeError("ReyNet input shape mismatch: expected n=" + std::to_string(model.shape().n) + ", order " +
                     std::to_string(model.shape().in_order) + ", channels " +
                     std::to_string(model.shape().in_channels));
}

std::vector<double> gather_input(const ComponentPlan& p, std::size_t k, const DenseTensor& x) {
  std::vector<double> in;
  in.reserve(static_cast<std::size_t>(p.input_width));
  for (std::size_t off : p.gather_row(k)) in.push_back(x[off]);
  return in;
}

}  // namespace

DenseTensor equiv_forward(const EquivariantReyNet& model, const DenseTensor& x, ForwardStats* stats) {
  check_input(model, x);
  const auto& s = model.shape();
  const std::size_t b = static_cast<std::size_t>(s.out_channels);
  DenseTensor y(s.n, s.out_order, s.out_channels);
  if (stats) {
    stats->mlp_evaluations = 0;
    stats->writes.assign(y.positions(), 0);
  }
  for (std::size_t c = 0; c < model.plan().size(); ++c) {
    const auto& p = model.plan()[c];
    const double h = static_cast<double>(p.design_size);
    for (std::size_t k = 0; k < p.design_size; ++k) {
      const auto v = mlp_forward(model.components()[c], gather_input(p, k, x));
      const std::size_t pos = p.scatter[k];
      for (std::size_t beta = 0; beta < b; ++beta) y[pos * b + beta] += v[beta] / h;
      if (stats) {
        ++stats->mlp_evaluations;
        ++stats->writes[pos];
      }
    }
  }
  return y;
}

std::vector<double> reduced_gather(const DenseTensor& x, const Permutation& g, const ReducedSpec& spec) {
  if (g.n() != x.n()) throw ShapeError("reduced_gather: permutation and tensor sizes differ");
  spec.validate(x.order());
  const Permutation inv = invert(g);
  const auto ginv = inv.zero_based();
  const std::size_t a = static_cast<std::size_t>(x.channels());
  std::vector<double> out;
  out.reserve(spec.coords.size() * a);
  for (const auto& coord : spec.coords) {
    std::size_t off = 0;
    for (int i : coord) {
      if (i > x.n()) throw DomainError("reduced coordinate index " + std::to_string(i) + " exceeds n");
      off = off * static_cast<std::size_t>(x.n()) + static_cast<std::size_t>(ginv[static_cast<std::size_t>(i - 1)]);
    }
    for (std::size_t c = 0; c < a; ++c) out.push_back(x[off * a + c]);
  }
  return out;
}

std::vector<MLPGrads> model_backward(const EquivariantReyNet& model, const DenseTensor& x,
                                     const DenseTensor& upstream) {
  check_input(model, x);
  const auto& s = model.shape();
  if (!s.output().matches(upstream)) throw ShapeError("model_backward: upstream shape mismatch");
  const std::size_t b = static_cast<std::size_t>(s.out_channels);
  std::vector<MLPGrads> grads;
  for (const auto& p : model.components()) grads.push_back(MLPParams::zeros(p.dims));
  std::vector<double> slice(b);
  for (std::size_t c = 0; c < model.plan().size(); ++c) {
    const auto& p = model.plan()[c];
    const double h = static_cast<double>(p.design_size);
    for (std::size_t k = 0; k < p.design_size; ++k) {
      const std::size_t pos = p.scatter[k];
      bool any = false;
      for (std::size_t beta = 0; beta < b; ++beta) {
        slice[beta] = upstream[pos * b + beta] / h;
        any = any || slice[beta] != 0.0;
      }
      if (!any) continue;
      const auto g = mlp_grad(model.components()[c], gather_input(p, k, x), slice);
      grads[c].add_scaled(g.params);
    }
  }
  return grads;
}

EquivariantReyNet transfer_n(const EquivariantReyNet& model, int n_new) {
  if (!model.reduced()) throw DomainError("transfer_n needs a reduced model; full-input components depend on n");
  ReyNetShape shape = model.shape();
  if (n_new < shape.out_order || n_new < model.reduced()->max_index())
    throw ShapeError("transfer_n: n_new = " + std::to_string(n_new) + " is too small for this model");
  std::vector<MLPParams> components = model.components();
  for (std::size_t c = 0; c < components.size(); ++c) {
    const int depth = model.tableaux()[c].depth();
    const double factor = static_cast<double>(design_size(n_new, depth)) /
                          static_cast<double>(design_size(shape.n, depth));
    if (factor != 1.0) {
      components[c].weights.back() *= factor;
      components[c].biases.back() *= factor;
    }
  }
  shape.n = n_new;
  return EquivariantReyNet(shape, model.reduced(), std::move(components));
}

std::string to_string(Pooling p) { return p == Pooling::orbit_sum ? "orbit_sum" : "max_diag_offdiag"; }

Pooling pooling_from_string(const std::string& name) {
  if (name == "orbit_sum" || name == "sum") return Pooling::orbit_sum;
  if (name == "max_diag_offdiag" || name == "max") return Pooling::max_diag_offdiag;
  throw DomainError("unknown pooling '" + name + "' (expected orbit_sum or max)");
}

int pooled_width(Pooling pooling, int m, int channels) {
  if (pooling == Pooling::max_diag_offdiag) {
    if (m != 2) throw DomainError("max_diag_offdiag pooling needs m = 2");
    return 2 * channels;
  }
  return static_cast<int>(enum_basis_tableaux(m).size()) * channels;
}

InvariantReyNet InvariantReyNet::create(ReyNetShape body_shape, std::optional<ReducedSpec> reduced, Pooling pooling,
                                        const std::vector<int>& hidden, int out_width, std::uint64_t seed) {
  const int width = pooled_width(pooling, body_shape.out_order, body_shape.out_channels);
  std::vector<int> dims{width};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out_width);
  return InvariantReyNet{EquivariantReyNet::create(body_shape, std::move(reduced), hidden, seed), pooling,
                         init_params(CounterRng(seed).split(0).seed(), dims)};
}

std::vector<double> pool(const DenseTensor& y, Pooling pooling) {
  if (pooling == Pooling::orbit_sum) return orbit_sum(y).values;
  if (y.order() != 2) throw DomainError("max_diag_offdiag pooling needs m = 2");
  if (y.n() < 2) throw ShapeError("max_diag_offdiag pooling needs n >= 2");
  const std::size_t n = static_cast<std::size_t>(y.n());
  const std::size_t b = static_cast<std::size_t>(y.channels());
  std::vector<double> out(2 * b, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < b; ++c) {
        double& slot = out[(i == j ? 0 : b) + c];
        slot = std::max(slot, y[(i * n + j) * b + c]);
      }
  return out;
}

DenseTensor pool_backward(const DenseTensor& y, Pooling pooling, std::span<const double> upstream) {
  DenseTensor dy(y.n(), y.order(), y.channels());
  const std::size_t b = static_cast<std::size_t>(y.channels());
  if (pooling == Pooling::orbit_sum) {
    const auto tableaux = enum_basis_tableaux(y.order());
    if (upstream.size() != tableaux.size() * b) throw ShapeError("pool_backward: upstream width mismatch");
    const auto labels = orbit_labels(y.n(), y.order());
    std::vector<double> stab(tableaux.size(), 1.0);
    for (std::size_t k = 0; k < tableaux.size(); ++k)
      for (int i = 2; i <= y.n() - tableaux[k].depth(); ++i) stab[k] *= i;
    for (std::size_t pos = 0; pos < labels.size(); ++pos)
      for (std::size_t c = 0; c < b; ++c) dy[pos * b + c] = stab[labels[pos]] * upstream[labels[pos] * b + c];
    return dy;
  }
  if (upstream.size() != 2 * b) throw ShapeError("pool_backward: upstream width mismatch");
  const std::size_t n = static_cast<std::size_t>(y.n());
  std::vector<double> best(2 * b, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> where(2 * b, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < b; ++c) {
        const std::size_t slot = (i == j ? 0 : b) + c;
        const std::size_t k = (i * n + j) * b + c;
        if (y[k] > best[slot]) {
          best[slot] = y[k];
          where[slot] = k;
        }
      }
  for (std::size_t slot = 0; slot < 2 * b; ++slot) dy[where[slot]] += upstream[slot];
  return dy;
}

std::vector<double> invariant_forward(const InvariantReyNet& model, const DenseTensor& x) {
  return mlp_forward(model.head, pool(equiv_forward(model.body, x), model.pooling));
}

InvariantGrads invariant_backward(const InvariantReyNet& model, const DenseTensor& x,
                                  std::span<const double> upstream) {
  const DenseTensor y = equiv_forward(model.body, x);
  const auto pooled = pool(y, model.pooling);
  auto head = mlp_grad(model.head, pooled, upstream);
  const DenseTensor dy = pool_backward(y, model.pooling, head.input);
  return InvariantGrads{model_backward(model.body, x, dy), std::move(head.params)};
}

FnnModel FnnModel::create(TensorShape input, TensorShape output, const std::vector<int>& hidden, std::uint64_t seed) {
  std::vector<int> dims{static_cast<int>(int_pow(input.n, input.order)) * input.channels};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(static_cast<int>(int_pow(output.n, output.order)) * output.channels);
  return FnnModel{input, output, init_params(CounterRng(seed).split(1).seed(), dims)};
}

DenseTensor fnn_forward(const FnnModel& model, const DenseTensor& x) {
  if (!model.input.matches(x)) throw ShapeError("FNN input shape mismatch");
  return DenseTensor(model.output.n, model.output.order, model.output.channels, mlp_forward(model.mlp, x.data()));
}

}  // namespace reynet
