#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "itas/core/adam.hpp"
#include "itas/core/checkpoint.hpp"
#include "itas/core/errors.hpp"
#include "itas/core/gradcheck.hpp"
#include "itas/core/layers.hpp"
#include "itas/core/matrix.hpp"
#include "itas/core/random.hpp"

using namespace itas;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, RandomSource& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

LayerParams random_layer(std::size_t rows, std::size_t out, RandomSource& rng) {
  LayerParams p(rows, out);
  for (double& v : p.weights.values()) v = rng.normal();
  for (double& v : p.bias) v = rng.normal();
  return p;
}

// Weighted sum of outputs: a linear probe whose gradient wrt the output is W.
double probe(const Matrix& out, const Matrix& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out.values()[i] * w.values()[i];
  return s;
}

}  // namespace

TEST(Matrix, MatmulMatchesHandComputation) {
  const Matrix a = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  const Matrix b = Matrix::from_rows({{7, 8}, {9, 10}, {11, 12}});
  EXPECT_EQ(matmul(a, b), Matrix::from_rows({{58, 64}, {139, 154}}));
}

TEST(Matrix, TransposedProductsAgreeWithNaiveLoops) {
  RandomSource rng(3);
  const Matrix a = random_matrix(4, 3, rng);
  const Matrix b = random_matrix(4, 5, rng);
  Matrix tn(3, 5);
  add_matmul_tn(tn, a, b);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += a(k, i) * b(k, j);
      EXPECT_NEAR(tn(i, j), s, 1e-12);
    }
  }
  const Matrix c = random_matrix(6, 3, rng);
  const Matrix nt = matmul_nt(a, c);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * c(j, k);
      EXPECT_NEAR(nt(i, j), s, 1e-12);
    }
  }
}

TEST(Matrix, ShapeMismatchIsShapeError) {
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
}

TEST(Matrix, AppendColsKeepsEntries) {
  Matrix m = Matrix::from_rows({{1, 2}, {3, 4}});
  m.append_cols(1);
  EXPECT_EQ(m, Matrix::from_rows({{1, 2, 0}, {3, 4, 0}}));
}

TEST(Random, SameSeedSameSequence) {
  RandomSource a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  RandomSource c(42), d(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(c.normal(), d.normal());
}

TEST(Random, SubstreamIgnoresParentState) {
  RandomSource a(7);
  const RandomSource fresh_child = a.substream("replay");
  for (int i = 0; i < 10; ++i) a.next_u64();
  RandomSource late_child = a.substream("replay");
  RandomSource early_child = fresh_child;
  for (int i = 0; i < 10; ++i) EXPECT_EQ(late_child.next_u64(), early_child.next_u64());
  EXPECT_NE(a.substream("init").next_u64(), a.substream("replay").next_u64());
  EXPECT_NE(a.substream(1, 2).next_u64(), a.substream(2, 1).next_u64());
}

TEST(Random, UniformAndIndexRanges) {
  RandomSource rng(11);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ++counts[rng.index(5)];
  }
  for (int c : counts) EXPECT_NEAR(c / 50000.0, 0.2, 0.01);
}

TEST(Random, NormalMoments) {
  RandomSource rng(5);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(Linear, IdentityWeightsPassInputThrough) {
  LayerParams p(2, 2);
  p.weights = Matrix::from_rows({{1, 0}, {0, 1}});
  EXPECT_EQ(linear_forward(p, Matrix::from_rows({{3, 4}})), Matrix::from_rows({{3, 4}}));
}

TEST(Linear, ZeroWeightsGiveBias) {
  LayerParams p(2, 2);
  p.bias = {1, 2};
  EXPECT_EQ(linear_forward(p, Matrix::from_rows({{-5, 9}})), Matrix::from_rows({{1, 2}}));
}

TEST(Linear, HandComputedExample) {
  LayerParams p(2, 2);
  p.weights = Matrix::from_rows({{1, 0}, {0, 2}});
  p.bias = {1, 1};
  EXPECT_EQ(linear_forward(p, Matrix::from_rows({{2, 3}})), Matrix::from_rows({{3, 7}}));
}

TEST(Linear, DimensionMismatchNamesBothShapes) {
  LayerParams p(3, 2);
  try {
    linear_forward(p, Matrix(1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("1x2"), std::string::npos);
    EXPECT_NE(msg.find("3x2"), std::string::npos);
  }
}

TEST(Linear, ZeroUpstreamGradientLeavesParamsUntouched) {
  RandomSource rng(1);
  LayerParams p = random_layer(3, 4, rng);
  const Matrix x = random_matrix(2, 3, rng);
  const Matrix gin = linear_backward(p, x, Matrix(2, 4));
  for (double v : gin.values()) EXPECT_EQ(v, 0.0);
  for (double v : p.grad_weights.values()) EXPECT_EQ(v, 0.0);
  for (double v : p.grad_bias) EXPECT_EQ(v, 0.0);
}

TEST(Linear, ScalarChainRule) {
  LayerParams p(1, 1);
  p.weights(0, 0) = 2.5;
  const Matrix gin = linear_backward(p, Matrix::from_rows({{1.0}}), Matrix::from_rows({{3.0}}));
  EXPECT_DOUBLE_EQ(gin(0, 0), 7.5);
}

TEST(Linear, GradientAccumulationIsAdditive) {
  RandomSource rng(2);
  LayerParams once = random_layer(3, 4, rng);
  LayerParams twice = once;
  const Matrix x = random_matrix(5, 3, rng);
  const Matrix g = random_matrix(5, 4, rng);
  Matrix g2 = g;
  for (double& v : g2.values()) v *= 2.0;
  linear_backward(once, x, g2);
  linear_backward(twice, x, g);
  linear_backward(twice, x, g);
  EXPECT_LT(max_abs_diff(once.grad_weights, twice.grad_weights), 1e-12);
  for (std::size_t i = 0; i < once.grad_bias.size(); ++i) EXPECT_NEAR(once.grad_bias[i], twice.grad_bias[i], 1e-12);
}

TEST(Linear, FiniteDifferenceCheck) {
  RandomSource rng(4);
  LayerParams p = random_layer(3, 4, rng);
  const Matrix x = random_matrix(2, 3, rng);
  const Matrix w = random_matrix(2, 4, rng);
  GradCheckProblem problem;
  problem.evaluate = [&] { return LossEvaluation{probe(linear_forward(p, x), w), 0}; };
  problem.compute_gradients = [&] {
    p.zero_grad();
    linear_backward(p, x, w);
  };
  p.append_slots("linear", problem.params);
  const GradCheckReport report = gradcheck(problem);
  EXPECT_TRUE(report.passed) << report.summary();
  EXPECT_LT(report.max_rel_error, 1e-6);
}

TEST(Linear, InputGradientMatchesFiniteDifferences) {
  RandomSource rng(8);
  LayerParams p = random_layer(3, 4, rng);
  Matrix x = random_matrix(2, 3, rng);
  const Matrix w = random_matrix(2, 4, rng);
  const Matrix gin = linear_backward(p, x, w);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x.values()[i];
    x.values()[i] = orig + 1e-5;
    const double plus = probe(linear_forward(p, x), w);
    x.values()[i] = orig - 1e-5;
    const double minus = probe(linear_forward(p, x), w);
    x.values()[i] = orig;
    EXPECT_NEAR(gin.values()[i], (plus - minus) / 2e-5, 1e-7);
  }
}

// Independent sliding-window convolution.
Matrix conv_oracle(const LayerParams& p, const Matrix& x, std::size_t d) {
  const std::size_t cin = x.cols();
  Matrix out(x.rows(), p.out_dim());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    for (std::size_t o = 0; o < p.out_dim(); ++o) {
      double s = p.bias[o];
      for (long k = -1; k <= 1; ++k) {
        const long src = static_cast<long>(t) + k * static_cast<long>(d);
        if (src < 0 || src >= static_cast<long>(x.rows())) continue;
        for (std::size_t c = 0; c < cin; ++c) s += x(src, c) * p.weights((k + 1) * cin + c, o);
      }
      out(t, o) = s;
    }
  }
  return out;
}

TEST(DilatedConv, CenterTapIsIdentity) {
  const std::size_t c = 3;
  LayerParams p(kKernelTaps * c, c);
  for (std::size_t i = 0; i < c; ++i) p.weights(c + i, i) = 1.0;
  RandomSource rng(9);
  const Matrix x = random_matrix(7, c, rng);
  EXPECT_EQ(dilated_conv1d_forward(p, x, 2), x);
}

TEST(DilatedConv, ZeroInputGivesBias) {
  RandomSource rng(10);
  LayerParams p = random_layer(kKernelTaps * 2, 3, rng);
  const Matrix out = dilated_conv1d_forward(p, Matrix(4, 2), 1);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t o = 0; o < 3; ++o) EXPECT_EQ(out(t, o), p.bias[o]);
  }
}

TEST(DilatedConv, MatchesSlidingWindowOracle) {
  LayerParams p(kKernelTaps * 1, 1);
  p.weights = Matrix::from_rows({{0.5}, {2.0}, {-1.0}});
  p.bias = {0.25};
  const Matrix x = Matrix::from_rows({{1}, {2}, {3}, {4}, {5}});
  const Matrix out = dilated_conv1d_forward(p, x, 2);
  // Hand values: y_t = 0.5 x_{t-2} + 2 x_t - x_{t+2} + 0.25.
  const Matrix expected = Matrix::from_rows({{-0.75}, {0.25}, {1.75}, {9.25}, {11.75}});
  EXPECT_LT(max_abs_diff(out, expected), 1e-12);

  RandomSource rng(12);
  const LayerParams q = random_layer(kKernelTaps * 3, 4, rng);
  const Matrix y = random_matrix(9, 3, rng);
  for (std::size_t d : {1u, 2u, 4u, 8u, 20u}) {
    EXPECT_LT(max_abs_diff(dilated_conv1d_forward(q, y, d), conv_oracle(q, y, d)), 1e-12) << "dilation " << d;
  }
}

TEST(DilatedConv, DilationZeroIsDomainError) {
  LayerParams p(kKernelTaps, 1);
  try {
    dilated_conv1d_forward(p, Matrix(3, 1), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDomain);
  }
}

TEST(DilatedConv, ChannelMismatchIsShapeError) {
  LayerParams p(kKernelTaps * 2, 1);
  try {
    dilated_conv1d_forward(p, Matrix(3, 3), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
}

TEST(DilatedConv, FiniteDifferenceCheck) {
  RandomSource rng(13);
  LayerParams p = random_layer(kKernelTaps * 3, 2, rng);
  Matrix x = random_matrix(6, 3, rng);
  const Matrix w = random_matrix(6, 2, rng);
  GradCheckProblem problem;
  problem.evaluate = [&] { return LossEvaluation{probe(dilated_conv1d_forward(p, x, 2), w), 0}; };
  problem.compute_gradients = [&] {
    p.zero_grad();
    dilated_conv1d_backward(p, x, 2, w);
  };
  p.append_slots("conv", problem.params);
  EXPECT_TRUE(gradcheck(problem).passed);

  const Matrix gin = dilated_conv1d_backward(p, x, 2, w);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x.values()[i];
    x.values()[i] = orig + 1e-5;
    const double plus = probe(dilated_conv1d_forward(p, x, 2), w);
    x.values()[i] = orig - 1e-5;
    const double minus = probe(dilated_conv1d_forward(p, x, 2), w);
    x.values()[i] = orig;
    EXPECT_NEAR(gin.values()[i], (plus - minus) / 2e-5, 1e-7);
  }
}

TEST(Activations, Relu) {
  const Matrix x = Matrix::from_rows({{-2, 0, 3}});
  EXPECT_EQ(relu(x), Matrix::from_rows({{0, 0, 3}}));
  EXPECT_EQ(relu_backward(x, Matrix::from_rows({{5, 5, 5}})), Matrix::from_rows({{0, 0, 5}}));
}

TEST(Activations, SoftmaxUniformAndNormalized) {
  const Matrix p = softmax_rows(Matrix(1, 4, 1.7));
  for (double v : p.values()) EXPECT_DOUBLE_EQ(v, 0.25);
  RandomSource rng(14);
  Matrix logits = random_matrix(20, 6, rng);
  for (double& v : logits.values()) v *= 30.0;
  const Matrix q = softmax_rows(logits);
  for (std::size_t r = 0; r < q.rows(); ++r) {
    double s = 0.0;
    for (double v : q.row(r)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Activations, LogSoftmaxStableAgainstExtendedPrecision) {
  const Matrix lp = log_softmax_rows(Matrix::from_rows({{1000, 0}}));
  ASSERT_TRUE(lp.all_finite());
  // Extended-precision oracle: log softmax_j = x_j - x_max - log(sum exp(x - x_max)).
  const long double tail = std::log1p(std::exp(-1000.0L));
  EXPECT_NEAR(lp(0, 0), static_cast<double>(-tail), 1e-12);
  EXPECT_NEAR(lp(0, 1), static_cast<double>(-1000.0L - tail), 1e-9);

  RandomSource rng(15);
  const Matrix x = random_matrix(5, 4, rng);
  const Matrix y = log_softmax_rows(x);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    long double sum = 0.0L;
    for (double v : x.row(r)) sum += std::exp(static_cast<long double>(v));
    for (std::size_t c = 0; c < x.cols(); ++c) {
      EXPECT_NEAR(y(r, c), static_cast<double>(x(r, c) - std::log(sum)), 1e-12);
    }
  }
}

TEST(Activations, LogSoftmaxBackwardMatchesFiniteDifferences) {
  RandomSource rng(16);
  Matrix x = random_matrix(3, 4, rng);
  const Matrix w = random_matrix(3, 4, rng);
  const Matrix g = log_softmax_backward(log_softmax_rows(x), w);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x.values()[i];
    x.values()[i] = orig + 1e-5;
    const double plus = probe(log_softmax_rows(x), w);
    x.values()[i] = orig - 1e-5;
    const double minus = probe(log_softmax_rows(x), w);
    x.values()[i] = orig;
    EXPECT_NEAR(g.values()[i], (plus - minus) / 2e-5, 1e-7);
  }
}

TEST(LayerParams, ZeroGradClearsAccumulators) {
  RandomSource rng(17);
  LayerParams p = random_layer(2, 3, rng);
  linear_backward(p, random_matrix(4, 2, rng), random_matrix(4, 3, rng));
  p.zero_grad();
  for (double v : p.grad_weights.values()) EXPECT_EQ(v, 0.0);
  for (double v : p.grad_bias) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(p.grad_weights.rows(), p.weights.rows());
  EXPECT_EQ(p.grad_weights.cols(), p.weights.cols());
}

TEST(LayerParams, InitUniformRespectsFanInBound) {
  RandomSource rng(18);
  LayerParams p(16, 8);
  init_uniform(p, 16, rng);
  for (double v : p.weights.values()) EXPECT_LE(std::abs(v), 0.25);
  for (double v : p.bias) EXPECT_LE(std::abs(v), 0.25);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<double> value = {1.0, -2.0};
  std::vector<double> grad = {0.0, 0.0};
  std::vector<ParamSlot> slots = {{"p", value, grad}};
  Adam adam;
  for (int i = 0; i < 10; ++i) adam.step(slots);
  EXPECT_EQ(value[0], 1.0);
  EXPECT_EQ(value[1], -2.0);
  EXPECT_EQ(adam.state().step, 10u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<double> value = {0.5};
  std::vector<double> grad = {3.0};
  std::vector<ParamSlot> slots = {{"p", value, grad}};
  Adam adam(AdamConfig{0.1});
  adam.step(slots);
  // Bias-corrected m/sqrt(v) is g/|g| on the first step.
  EXPECT_NEAR(value[0], 0.5 - 0.1 * 3.0 / (3.0 + 1e-8), 1e-12);
}

TEST(Adam, ConstantGradientDescends) {
  std::vector<double> value = {0.0};
  std::vector<double> grad = {-0.3};
  std::vector<ParamSlot> slots = {{"p", value, grad}};
  Adam adam;
  double last = value[0];
  for (int i = 0; i < 50; ++i) {
    adam.step(slots);
    EXPECT_GT(value[0], last);
    last = value[0];
  }
}

TEST(Adam, QuadraticConvergesToMinimizer) {
  // f(w) = (w - 3)^2, minimizer 3.
  std::vector<double> value = {-1.0};
  std::vector<double> grad = {0.0};
  std::vector<ParamSlot> slots = {{"w", value, grad}};
  Adam adam(AdamConfig{1e-2});
  for (int i = 0; i < 2000; ++i) {
    grad[0] = 2.0 * (value[0] - 3.0);
    adam.step(slots);
  }
  EXPECT_NEAR(value[0], 3.0, 1e-3);
}

TEST(GradCheck, LinearMseToy) {
  RandomSource rng(19);
  LayerParams p = random_layer(4, 2, rng);
  const Matrix x = random_matrix(6, 4, rng);
  const Matrix target = random_matrix(6, 2, rng);
  auto mse_grad = [&](const Matrix& y) {
    Matrix g(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.size(); ++i) g.values()[i] = 2.0 * (y.values()[i] - target.values()[i]) / y.size();
    return g;
  };
  GradCheckProblem problem;
  problem.evaluate = [&] {
    const Matrix y = linear_forward(p, x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::pow(y.values()[i] - target.values()[i], 2);
    return LossEvaluation{s / y.size(), 0};
  };
  problem.compute_gradients = [&] {
    p.zero_grad();
    linear_backward(p, x, mse_grad(linear_forward(p, x)));
  };
  p.append_slots("linear", problem.params);
  const GradCheckReport r = gradcheck(problem);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.max_rel_error, 1e-6);
  EXPECT_EQ(r.checked, 10u);
}

TEST(GradCheck, ReportsWorstCoordinateOfWrongGradient) {
  RandomSource rng(20);
  LayerParams p = random_layer(3, 2, rng);
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix w = random_matrix(4, 2, rng);
  GradCheckProblem problem;
  problem.evaluate = [&] { return LossEvaluation{probe(linear_forward(p, x), w), 0}; };
  problem.compute_gradients = [&] {
    p.zero_grad();
    linear_backward(p, x, w);
    p.grad_bias[1] += 0.5;
  };
  p.append_slots("layer", problem.params);
  const GradCheckReport r = gradcheck(problem);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.worst_param, "layer.bias");
  EXPECT_EQ(r.worst_index, 1u);
}

TEST(GradCheck, NonDeterministicClosureIsDeterminismError) {
  std::vector<double> value = {1.0};
  std::vector<double> grad = {0.0};
  int calls = 0;
  GradCheckProblem problem;
  problem.evaluate = [&] { return LossEvaluation{value[0] + 1e-3 * ++calls, 0}; };
  problem.compute_gradients = [] {};
  problem.params = {{"p", value, grad}};
  try {
    gradcheck(problem);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDeterminism);
  }
}

TEST(GradCheck, SkipsCoordinatesStraddlingAKink) {
  // |w| at w = 0 flips branch; the checker must skip instead of failing.
  std::vector<double> value = {0.0};
  std::vector<double> grad = {0.0};
  GradCheckProblem problem;
  problem.evaluate = [&] { return LossEvaluation{std::abs(value[0]), value[0] > 0 ? 1u : 0u}; };
  problem.compute_gradients = [&] { grad[0] = 0.0; };
  problem.params = {{"w", value, grad}};
  const GradCheckReport r = gradcheck(problem);
  EXPECT_EQ(r.skipped_at_kink, 1u);
  EXPECT_EQ(r.checked, 0u);
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  Checkpoint ck;
  ck.kind = "test";
  ck.hyperparameters = {{"b", "2"}, {"a", "x y"}};
  ck.add_tensor("m", Matrix::from_rows({{1.5, -2}, {3, 1e-300}}));
  ck.add_vector("v", {0.1, 0.2, 0.3});
  const std::string bytes = ck.serialize();
  const Checkpoint back = Checkpoint::deserialize(bytes, "mem");
  EXPECT_EQ(back.kind, "test");
  EXPECT_EQ(back.hyper("a"), "x y");
  EXPECT_EQ(back.tensor("m"), ck.tensor("m"));
  EXPECT_EQ(back.vector("v"), ck.vector("v"));
  EXPECT_EQ(back.serialize(), bytes);
}

TEST(Checkpoint, TruncationIsFormatErrorWithOffset) {
  Checkpoint ck;
  ck.kind = "test";
  ck.add_tensor("m", Matrix(3, 3, 1.0));
  const std::string bytes = ck.serialize();
  try {
    Checkpoint::deserialize(bytes.substr(0, bytes.size() - 5), "mem");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
  }
  try {
    Checkpoint::deserialize("XXXX" + bytes.substr(4), "mem");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
  }
}

TEST(Checkpoint, MissingFileIsIoError) {
  try {
    Checkpoint::load("/nonexistent/dir/x.ckpt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(Errors, ExitCodesAreDistinctPerFamily) {
  EXPECT_EQ(exit_code_for(ErrorKind::kConfig), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::kData), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::kBudget), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::kNumeric), 5);
  EXPECT_EQ(exit_code_for(ErrorKind::kIo), 6);
  EXPECT_EQ(exit_code_for(ErrorKind::kPairing), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::kCache), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::kShape), 5);
}
