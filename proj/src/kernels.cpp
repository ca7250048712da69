#include "reynet/kernels.hpp"

#include <algorithm>

#include <omp.h>

#include "reynet/error.hpp"

namespace reynet {

namespace {

int g_threads = 1;

void check_batch(const EquivariantReyNet& model, const Eigen::MatrixXd& x) {
  const auto in = model.shape().input();
  const auto rows = static_cast<Eigen::Index>(int_pow(in.n, in.order) * static_cast<std::size_t>(in.channels));
  if (x.rows() != rows) throw ShapeError("batched input has the wrong number of rows for this model");
}

Eigen::Index output_rows(const EquivariantReyNet& model) {
  const auto out = model.shape().output();
  return static_cast<Eigen::Index>(int_pow(out.n, out.order) * static_cast<std::size_t>(out.channels));
}

Eigen::Index design_rows(const ComponentPlan& p, bool corner_only) {
  return corner_only ? 1 : static_cast<Eigen::Index>(p.design_size);
}

std::vector<EquivTape::Block> make_blocks(const EquivariantReyNet& model, Eigen::Index batch, bool corner_only) {
  std::vector<EquivTape::Block> blocks;
  for (std::size_t c = 0; c < model.plan().size(); ++c) {
    const Eigen::Index total = design_rows(model.plan()[c], corner_only) * batch;
    for (Eigen::Index begin = 0; begin < total; begin += kBlockColumns)
      blocks.push_back({c, begin, std::min(total, begin + kBlockColumns), {}});
  }
  return blocks;
}

Eigen::MatrixXd gather_block(const ComponentPlan& p, const Eigen::MatrixXd& x, Eigen::Index batch,
                             Eigen::Index begin, Eigen::Index end) {
  Eigen::MatrixXd in(p.input_width, end - begin);
  for (Eigen::Index j = begin; j < end; ++j) {
    const auto row = p.gather_row(static_cast<std::size_t>(j / batch));
    const Eigen::Index s = j % batch;
    for (Eigen::Index r = 0; r < p.input_width; ++r) in(r, j - begin) = x(static_cast<Eigen::Index>(row[static_cast<std::size_t>(r)]), s);
  }
  return in;
}

DenseTensor column_tensor(const TensorShape& shape, const Eigen::MatrixXd& x, Eigen::Index s) {
  const auto col = x.col(s);
  return DenseTensor(shape.n, shape.order, shape.channels, std::vector<double>(col.data(), col.data() + col.size()));
}

// Corner entries of one sample: the identity row of every component.
DenseTensor corner_forward(const EquivariantReyNet& model, const DenseTensor& x) {
  const auto& s = model.shape();
  const std::size_t b = static_cast<std::size_t>(s.out_channels);
  DenseTensor y(s.n, s.out_order, s.out_channels);
  for (std::size_t c = 0; c < model.plan().size(); ++c) {
    const auto& p = model.plan()[c];
    std::vector<double> in;
    for (std::size_t off : p.gather_row(0)) in.push_back(x[off]);
    const auto v = mlp_forward(model.components()[c], in);
    for (std::size_t beta = 0; beta < b; ++beta) y[p.scatter[0] * b + beta] = v[beta] / static_cast<double>(p.design_size);
  }
  return y;
}

DenseTensor corner_mask(const EquivariantReyNet& model, const DenseTensor& dy) {
  DenseTensor out(dy.n(), dy.order(), dy.channels());
  const std::size_t b = static_cast<std::size_t>(dy.channels());
  for (const auto& p : model.plan())
    for (std::size_t beta = 0; beta < b; ++beta) out[p.scatter[0] * b + beta] = dy[p.scatter[0] * b + beta];
  return out;
}

}  // namespace

void set_kernel_threads(int threads) {
  if (threads < 1) throw DomainError("thread count must be >= 1");
  g_threads = threads;
}

int kernel_threads() { return g_threads; }

Eigen::MatrixXd equiv_forward_batch(const EquivariantReyNet& model, const Eigen::MatrixXd& x,
                                    const BatchOptions& opts, EquivTape* tape) {
  check_batch(model, x);
  const Eigen::Index batch = x.cols();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(output_rows(model), batch);
  const auto& s = model.shape();

  if (opts.exec == Exec::serial) {
    for (Eigen::Index k = 0; k < batch; ++k) {
      const DenseTensor xs = column_tensor(s.input(), x, k);
      const DenseTensor ys = opts.corner_only ? corner_forward(model, xs) : equiv_forward(model, xs);
      y.col(k) = Eigen::Map<const Eigen::VectorXd>(ys.data().data(), static_cast<Eigen::Index>(ys.size()));
    }
    return y;
  }

  auto blocks = make_blocks(model, batch, opts.corner_only);
  const Eigen::Index b = s.out_channels;
  const auto nblocks = static_cast<std::ptrdiff_t>(blocks.size());
#pragma omp parallel for schedule(dynamic) num_threads(g_threads)
  for (std::ptrdiff_t i = 0; i < nblocks; ++i) {
    auto& blk = blocks[static_cast<std::size_t>(i)];
    const auto& p = model.plan()[blk.component];
    mlp_forward_batch(model.components()[blk.component], gather_block(p, x, batch, blk.begin, blk.end), blk.tape);
    const auto& out = blk.tape.output();
    const double h = static_cast<double>(p.design_size);
    for (Eigen::Index j = blk.begin; j < blk.end; ++j) {
      const auto pos = static_cast<Eigen::Index>(p.scatter[static_cast<std::size_t>(j / batch)]);
      for (Eigen::Index beta = 0; beta < b; ++beta) y(pos * b + beta, j % batch) = out(beta, j - blk.begin) / h;
    }
    if (!tape) blk.tape = MLPTape{};
  }
  if (tape) {
    tape->batch = batch;
    tape->corner_only = opts.corner_only;
    tape->blocks = std::move(blocks);
  }
  return y;
}

void equiv_backward_batch(const EquivariantReyNet& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy,
                          std::vector<MLPGrads>& accum, const BatchOptions& opts, const EquivTape* tape) {
  check_batch(model, x);
  const Eigen::Index batch = x.cols();
  if (dy.rows() != output_rows(model) || dy.cols() != batch) throw ShapeError("batched upstream shape mismatch");
  if (accum.size() != model.components().size()) throw ShapeError("gradient accumulator count mismatch");
  for (std::size_t c = 0; c < accum.size(); ++c)
    if (!accum[c].same_shape(model.components()[c])) throw ShapeError("gradient accumulator shape mismatch");
  const auto& s = model.shape();

  if (opts.exec == Exec::serial) {
    for (Eigen::Index k = 0; k < batch; ++k) {
      const DenseTensor xs = column_tensor(s.input(), x, k);
      DenseTensor up = column_tensor(s.output(), dy, k);
      if (opts.corner_only) up = corner_mask(model, up);
      const auto g = model_backward(model, xs, up);
      for (std::size_t c = 0; c < accum.size(); ++c) accum[c].add_scaled(g[c]);
    }
    return;
  }

  if (tape && (tape->batch != batch || tape->corner_only != opts.corner_only))
    throw ShapeError("tape does not match this backward call");
  std::vector<EquivTape::Block> fresh;
  if (!tape) fresh = make_blocks(model, batch, opts.corner_only);
  const auto& blocks = tape ? tape->blocks : fresh;
  const Eigen::Index b = s.out_channels;
  std::vector<MLPGrads> partial(blocks.size());
  const auto nblocks = static_cast<std::ptrdiff_t>(blocks.size());
#pragma omp parallel for schedule(dynamic) num_threads(g_threads)
  for (std::ptrdiff_t i = 0; i < nblocks; ++i) {
    const auto& blk = blocks[static_cast<std::size_t>(i)];
    const auto& p = model.plan()[blk.component];
    const auto& params = model.components()[blk.component];
    MLPTape local;
    if (!tape) mlp_forward_batch(params, gather_block(p, x, batch, blk.begin, blk.end), local);
    const MLPTape& t = tape ? blk.tape : local;
    const double h = static_cast<double>(p.design_size);
    Eigen::MatrixXd up(b, blk.end - blk.begin);
    for (Eigen::Index j = blk.begin; j < blk.end; ++j) {
      const auto pos = static_cast<Eigen::Index>(p.scatter[static_cast<std::size_t>(j / batch)]);
      for (Eigen::Index beta = 0; beta < b; ++beta) up(beta, j - blk.begin) = dy(pos * b + beta, j % batch) / h;
    }
    auto& g = partial[static_cast<std::size_t>(i)];
    g = MLPParams::zeros(params.dims);
    mlp_backward_batch(params, t, std::move(up), g);
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) accum[blocks[i].component].add_scaled(partial[i]);
}

}  // namespace reynet
