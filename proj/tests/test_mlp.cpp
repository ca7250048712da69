#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reynet/error.hpp"
#include "reynet/mlp.hpp"

using namespace reynet;

namespace {

MLPParams random_params(const std::vector<int>& dims, std::uint64_t seed) {
  auto p = init_params(seed, dims);
  std::mt19937_64 rng(seed);
  auto flat = p.flatten();
  for (auto& v : flat) v += std::uniform_real_distribution<double>(-0.3, 0.3)(rng);
  p.unflatten(flat);
  return p;
}

}  // namespace

TEST(Mlp, InitIsDeterministicAndBounded) {
  const std::vector<int> dims{4, 16, 3};
  const auto a = init_params(11, dims);
  const auto b = init_params(11, dims);
  const auto c = init_params(12, dims);
  EXPECT_EQ(a.flatten(), b.flatten());
  EXPECT_NE(a.flatten(), c.flatten());
  EXPECT_EQ(a.parameter_count(), 4u * 16 + 16 + 16 * 3 + 3);
  for (int k = 0; k < a.layers(); ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[static_cast<std::size_t>(k)]));
    EXPECT_LE(a.weights[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff(), bound);
    EXPECT_EQ(a.biases[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Mlp, ForwardMatchesOracle) {
  std::mt19937_64 rng(1);
  const std::vector<int> dims{5, 7, 6, 2};
  const auto p = random_params(dims, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = oracle::random_tensor(rng, 5, -2, 2);
    const auto y = mlp_forward(p, x);
    EXPECT_LT(oracle::max_abs_diff(y, oracle::mlp(dims, p.flatten(), x)), 1e-13);
  }
  EXPECT_THROW(mlp_forward(p, std::vector<double>(4)), ShapeError);
}

TEST(Mlp, RectifierAtZeroHasZeroDerivative) {
  auto p = MLPParams::zeros({1, 1, 1});
  p.weights[0](0, 0) = 1.0;
  p.weights[1](0, 0) = 1.0;
  const auto g = mlp_grad(p, std::vector<double>{0.0}, std::vector<double>{1.0});
  EXPECT_EQ(g.input[0], 0.0);
  EXPECT_EQ(g.params.weights[0](0, 0), 0.0);
}

TEST(Mlp, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  const std::vector<int> dims{4, 6, 5, 3};
  const auto p = random_params(dims, 5);
  const auto x = oracle::random_tensor(rng, 4);
  const auto w = oracle::random_tensor(rng, 3);
  auto objective = [&](const std::vector<double>& theta) {
    const auto y = oracle::mlp(dims, theta, x);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  };
  const auto g = mlp_grad(p, x, w);
  EXPECT_LT(oracle::max_rel_error(g.params.flatten(), oracle::fd_gradient(objective, p.flatten())), 1e-6);
  auto input_objective = [&](const std::vector<double>& xi) {
    const auto y = oracle::mlp(dims, p.flatten(), xi);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  };
  EXPECT_LT(oracle::max_rel_error(g.input, oracle::fd_gradient(input_objective, x)), 1e-6);
}

TEST(Mlp, BatchMatchesPerSample) {
  std::mt19937_64 rng(3);
  const std::vector<int> dims{3, 8, 2};
  const auto p = random_params(dims, 7);
  Eigen::MatrixXd x(3, 5), up(2, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
  for (Eigen::Index i = 0; i < up.size(); ++i) up.data()[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
  MLPTape tape;
  mlp_forward_batch(p, x, tape);
  auto accum = MLPParams::zeros(dims);
  Eigen::MatrixXd input_grad;
  mlp_backward_batch(p, tape, up, accum, &input_grad);
  auto expected = MLPParams::zeros(dims);
  for (Eigen::Index s = 0; s < 5; ++s) {
    const std::vector<double> xs(x.col(s).data(), x.col(s).data() + 3);
    const std::vector<double> us(up.col(s).data(), up.col(s).data() + 2);
    const auto y = mlp_forward(p, xs);
    for (int r = 0; r < 2; ++r) EXPECT_NEAR(tape.output()(r, s), y[static_cast<std::size_t>(r)], 1e-14);
    const auto g = mlp_grad(p, xs, us);
    expected.add_scaled(g.params);
    for (int r = 0; r < 3; ++r) EXPECT_NEAR(input_grad(r, s), g.input[static_cast<std::size_t>(r)], 1e-14);
  }
  EXPECT_LT(oracle::max_abs_diff(accum.flatten(), expected.flatten()), 1e-13);
}

TEST(Mlp, FlattenRoundTrip) {
  const auto p = random_params({3, 4, 2}, 9);
  auto q = MLPParams::zeros({3, 4, 2});
  q.unflatten(p.flatten());
  EXPECT_EQ(q.flatten(), p.flatten());
  EXPECT_THROW(q.unflatten(std::vector<double>(3)), ShapeError);
}

TEST(Adam, StepMatchesHandComputation) {
  auto p = MLPParams::zeros({1, 1});
  p.weights[0](0, 0) = 0.5;
  p.biases[0](0) = -0.25;
  auto g = MLPParams::zeros({1, 1});
  g.weights[0](0, 0) = 0.2;
  g.biases[0](0) = -0.1;
  AdamConfig cfg;
  auto st = AdamState::init(p, cfg);
  double w = 0.5, m = 0, v = 0;
  for (int t = 1; t <= 3; ++t) {
    adam_step(st, p, g);
    w *= 1 - cfg.lr * cfg.weight_decay;
    m = cfg.beta1 * m + (1 - cfg.beta1) * 0.2;
    v = cfg.beta2 * v + (1 - cfg.beta2) * 0.04;
    const double mh = m / (1 - std::pow(cfg.beta1, t));
    const double vh = v / (1 - std::pow(cfg.beta2, t));
    w -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
    EXPECT_NEAR(p.weights[0](0, 0), w, 1e-15);
  }
  EXPECT_EQ(st.step, 3);
  EXPECT_THROW(adam_step(st, p, MLPParams::zeros({2, 1})), ShapeError);
}

TEST(Loss, StandardAndCorner) {
  const DenseTensor pred(2, 2, 1, {1, 2, 3, 4});
  const DenseTensor target(2, 2, 1, {0, 0, 0, 0});
  const auto mse = loss(LossKind::standard_mse, pred, target);
  EXPECT_DOUBLE_EQ(mse.value, 30.0 / 4);
  EXPECT_DOUBLE_EQ(mse.gradient[3], 2.0 * 4 / 4);
  const auto corner = loss(LossKind::corner_mse, pred, target);
  EXPECT_DOUBLE_EQ(corner.value, (1.0 + 4.0) / 2);
  EXPECT_EQ(corner.gradient[2], 0.0);
  EXPECT_DOUBLE_EQ(corner.gradient[1], 2.0);
  EXPECT_THROW(loss(LossKind::corner_mse, DenseTensor(2, 0, 1), DenseTensor(2, 0, 1)), ShapeError);
  EXPECT_EQ(loss_kind_from_string("corner"), LossKind::corner_mse);
  EXPECT_THROW(loss_kind_from_string("l1"), DomainError);
}
