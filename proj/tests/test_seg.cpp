#include <gtest/gtest.h>

#include <cmath>

#include "itas/core/errors.hpp"
#include "itas/core/gradcheck.hpp"
#include "itas/core/random.hpp"
#include "itas/seg/losses.hpp"
#include "itas/seg/seg_model.hpp"

using namespace itas;

namespace {

Matrix normal_matrix(std::size_t rows, std::size_t cols, RandomSource& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = scale * rng.normal();
  return m;
}

// Long-double log-softmax used as the reference for the loss oracles.
std::vector<std::vector<long double>> ref_log_probs(const Matrix& logits) {
  std::vector<std::vector<long double>> out(logits.rows(), std::vector<long double>(logits.cols()));
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    long double m = logits(t, 0);
    for (std::size_t a = 1; a < logits.cols(); ++a) m = std::max<long double>(m, logits(t, a));
    long double s = 0;
    for (std::size_t a = 0; a < logits.cols(); ++a) s += std::exp(static_cast<long double>(logits(t, a)) - m);
    for (std::size_t a = 0; a < logits.cols(); ++a) out[t][a] = logits(t, a) - m - std::log(s);
  }
  return out;
}

long double ref_smoothing(const Matrix& logits, double tau) {
  const auto lp = ref_log_probs(logits);
  long double sum = 0;
  for (std::size_t t = 1; t < logits.rows(); ++t) {
    for (std::size_t a = 0; a < logits.cols(); ++a) {
      const long double d = std::min<long double>(std::fabs(lp[t][a] - lp[t - 1][a]), tau);
      sum += d * d;
    }
  }
  return sum / static_cast<long double>(logits.rows() * logits.cols());
}

SegModel make_model(std::size_t dim, std::size_t channels, std::size_t layers, std::size_t classes,
                    std::uint64_t seed) {
  RandomSource rng(seed);
  SegModel model(SegModelConfig{dim, channels, layers}, rng);
  std::vector<ClassId> ids;
  for (std::size_t k = 0; k < classes; ++k) ids.push_back(static_cast<ClassId>(k));
  model.expand_head(ids, LabelMode::kDisjoint, rng);
  return model;
}

}  // namespace

TEST(LossCls, UniformLogitsGiveLnA) {
  const Matrix logits(5, 4, 0.7);
  const std::vector<int> y = {0, 3, 1, 2, 2};
  EXPECT_NEAR(loss_cls(logits, y), std::log(4.0), 1e-12);
}

TEST(LossCls, ConfidentCorrectIsNearZero) {
  Matrix logits(3, 3, 0.0);
  const std::vector<int> y = {2, 0, 1};
  for (std::size_t t = 0; t < 3; ++t) logits(t, static_cast<std::size_t>(y[t])) = 20.0;
  EXPECT_LE(loss_cls(logits, y), 1e-6);
  EXPECT_GE(loss_cls(logits, y), 0.0);
}

TEST(LossCls, TwoFrameHandValue) {
  const Matrix logits = Matrix::from_rows({{1, 0}, {0, 1}});
  const std::vector<int> y = {0, 1};
  // Both frames: -log(e / (e + 1)) = log(1 + e^-1).
  EXPECT_NEAR(loss_cls(logits, y), std::log1p(std::exp(-1.0)), 1e-12);
}

TEST(LossCls, TargetOutsideHeadIsLabelingError) {
  const Matrix logits(2, 3, 0.0);
  const std::vector<int> y = {0, 3};
  try {
    loss_cls(logits, y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLabeling);
  }
}

TEST(LossSm, TimeConstantLogitsGiveZero) {
  Matrix logits(6, 3);
  for (std::size_t t = 0; t < 6; ++t) logits.row(t)[1] = 2.0;
  EXPECT_EQ(loss_sm(logits, 4.0), 0.0);
  EXPECT_EQ(loss_sm(Matrix(1, 3, 5.0), 4.0), 0.0);
}

TEST(LossSm, ClampedTermContributesTauSquared) {
  const Matrix logits = Matrix::from_rows({{0, 0}, {10, 0}});
  const double d0 = std::fabs(-std::log(2.0) + std::log1p(std::exp(-10.0)));
  // The second class moves by about 9.3 nats, well past tau = 4.
  const double expected = (d0 * d0 + 16.0) / 4.0;
  EXPECT_NEAR(loss_sm(logits, 4.0), expected, 1e-12);
  EXPECT_NEAR(loss_sm(logits, 4.0), static_cast<double>(ref_smoothing(logits, 4.0)), 1e-12);
}

TEST(LossSm, BoundedByTauSquaredAndMatchesOracle) {
  RandomSource rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix logits = normal_matrix(2 + rng.index(10), 2 + rng.index(5), rng, 8.0);
    const double tau = 0.5 + 4.0 * rng.uniform();
    const double v = loss_sm(logits, tau);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, tau * tau);
    EXPECT_NEAR(v, static_cast<double>(ref_smoothing(logits, tau)), 1e-10);
  }
}

TEST(LossSm, InvariantToPerFrameShift) {
  RandomSource rng(12);
  const Matrix logits = normal_matrix(8, 4, rng, 3.0);
  Matrix shifted = logits;
  for (std::size_t t = 0; t < 8; ++t) {
    const double c = 10.0 * rng.normal();
    for (double& v : shifted.row(t)) v += c;
  }
  EXPECT_NEAR(loss_sm(logits, 4.0), loss_sm(shifted, 4.0), 1e-10);
}

TEST(LossTas, LambdaZeroEqualsCrossEntropy) {
  RandomSource rng(13);
  const Matrix logits = normal_matrix(7, 3, rng);
  const std::vector<int> y = {0, 0, 1, 1, 2, 2, 2};
  EXPECT_EQ(loss_tas(logits, y, TasLossConfig{0.0, 4.0}), loss_cls(logits, y));
  const TasLossConfig def;
  EXPECT_EQ(def.lambda, 0.15);
  EXPECT_EQ(def.tau, 4.0);
  EXPECT_NEAR(loss_tas(logits, y, def), loss_cls(logits, y) + 0.15 * loss_sm(logits, 4.0), 1e-12);
}

TEST(LossTas, InvalidConfigIsConfigError) {
  EXPECT_THROW((TasLossConfig{-0.1, 4.0}.validate()), Error);
  EXPECT_THROW((TasLossConfig{0.1, 0.0}.validate()), Error);
}

TEST(LossTas, FullGradientMatchesFiniteDifferences) {
  RandomSource rng(14);
  const Matrix logits = normal_matrix(6, 3, rng, 0.8);
  const std::vector<int> y = {0, 1, 2, 2, 1, 0};
  const TasLossConfig cfg{0.5, 4.0};
  const TasLossResult r = tas_loss_with_grad(logits, y, cfg, SmoothingGradient::kFull);
  EXPECT_NEAR(r.total, loss_tas(logits, y, cfg), 1e-12);
  const double h = 1e-6;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    Matrix plus = logits, minus = logits;
    plus.values()[i] += h;
    minus.values()[i] -= h;
    const double numeric = (loss_tas(plus, y, cfg) - loss_tas(minus, y, cfg)) / (2 * h);
    EXPECT_NEAR(r.grad_logits.values()[i], numeric, 1e-7) << "coordinate " << i;
  }
}

TEST(LossTas, DetachedGradientDiffersFromFullOnlyInSmoothing) {
  RandomSource rng(15);
  const Matrix logits = normal_matrix(5, 3, rng);
  const std::vector<int> y = {0, 1, 2, 0, 1};
  const TasLossResult detached = tas_loss_with_grad(logits, y, TasLossConfig{0.0, 4.0});
  const TasLossResult full = tas_loss_with_grad(logits, y, TasLossConfig{0.0, 4.0}, SmoothingGradient::kFull);
  EXPECT_LT(max_abs_diff(detached.grad_logits, full.grad_logits), 1e-15);
  const TasLossResult d2 = tas_loss_with_grad(logits, y, TasLossConfig{1.0, 4.0});
  const TasLossResult f2 = tas_loss_with_grad(logits, y, TasLossConfig{1.0, 4.0}, SmoothingGradient::kFull);
  EXPECT_EQ(d2.total, f2.total);
  EXPECT_GT(max_abs_diff(d2.grad_logits, f2.grad_logits), 1e-6);
}

TEST(SegModel, ShapesAndMinimalSequence) {
  SegModel model = make_model(5, 8, 3, 4, 1);
  FeatureSequence x;
  RandomSource rng(2);
  x.values = normal_matrix(1, 5, rng);
  const Matrix out = model.forward(x);
  EXPECT_EQ(out.rows(), 1u);
  EXPECT_EQ(out.cols(), 4u);
  EXPECT_TRUE(out.all_finite());
  x.values = normal_matrix(4, 6, rng);
  try {
    model.forward(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
}

TEST(SegModel, ReceptiveFieldOfFourBlocksIsFifteenFrames) {
  SegModel model = make_model(4, 6, 4, 3, 3);
  RandomSource rng(4);
  FeatureSequence x;
  x.values = normal_matrix(80, 4, rng);
  const Matrix base = model.forward(x);
  const std::size_t t0 = 40;
  for (double& v : x.values.row(t0)) v += 5.0;
  const Matrix moved = model.forward(x);
  for (std::size_t t = 0; t < 80; ++t) {
    const std::size_t dist = t > t0 ? t - t0 : t0 - t;
    double diff = 0.0;
    for (std::size_t a = 0; a < 3; ++a) diff = std::max(diff, std::fabs(base(t, a) - moved(t, a)));
    if (dist > 15) {
      EXPECT_EQ(diff, 0.0) << "frame " << t;
    } else if (dist == 0) {
      EXPECT_GT(diff, 0.0);
    }
  }
}

TEST(SegModel, GradcheckCombinedLossOnTwentyFrames) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    RandomSource rng(seed);
    SegModel model(SegModelConfig{8, 6, 3}, rng);
    model.expand_head(std::vector<ClassId>{0, 1, 2}, LabelMode::kDisjoint, rng);
    for (double& w : model.head().weights.values()) w = 0.5 * rng.normal();
    const Matrix input = normal_matrix(20, 8, rng);
    std::vector<int> targets(20);
    for (int& t : targets) t = static_cast<int>(rng.index(3));
    const TasLossConfig cfg;
    const Matrix frozen = log_softmax_rows(model.forward_trace(input).logits);

    GradCheckProblem problem;
    problem.evaluate = [&]() {
      const SegModel::Trace trace = model.forward_trace(input);
      const TasLossResult r = tas_loss_with_grad(trace.logits, targets, cfg, SmoothingGradient::kDetachPrevious, &frozen);
      return LossEvaluation{r.total, SegModel::relu_signature(trace) ^ (r.clamp_signature * 0x9e3779b97f4a7c15ULL)};
    };
    problem.compute_gradients = [&]() {
      model.zero_grad();
      const SegModel::Trace trace = model.forward_trace(input);
      const TasLossResult r = tas_loss_with_grad(trace.logits, targets, cfg, SmoothingGradient::kDetachPrevious, &frozen);
      model.backward(trace, r.grad_logits);
    };
    problem.params = model.parameters();
    const GradCheckReport report = gradcheck(problem);
    EXPECT_TRUE(report.passed) << report.summary();
    EXPECT_GT(report.checked, 100u);
  }
}

TEST(SegModel, ExpandHeadKeepsExistingLogits) {
  SegModel model = make_model(4, 6, 2, 2, 5);
  RandomSource rng(6);
  FeatureSequence x;
  x.values = normal_matrix(10, 4, rng);
  const Matrix before = model.forward(x);
  model.expand_head(std::vector<ClassId>{7, 3}, LabelMode::kDisjoint, rng);
  const Matrix after = model.forward(x);
  ASSERT_EQ(after.cols(), 4u);
  for (std::size_t t = 0; t < 10; ++t) {
    EXPECT_EQ(after(t, 0), before(t, 0));
    EXPECT_EQ(after(t, 1), before(t, 1));
  }
  EXPECT_EQ(model.class_ids(), (std::vector<ClassId>{0, 1, 7, 3}));
  EXPECT_EQ(model.column_of(3), std::optional<std::size_t>(3));
}

TEST(SegModel, DuplicateClassesDependOnLabelMode) {
  SegModel model = make_model(4, 6, 2, 2, 5);
  RandomSource rng(6);
  try {
    model.expand_head(std::vector<ClassId>{1, 2}, LabelMode::kDisjoint, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLabelSpace);
  }
  model.expand_head(std::vector<ClassId>{1, 2}, LabelMode::kBlurry, rng);
  EXPECT_EQ(model.class_ids(), (std::vector<ClassId>{0, 1, 2}));
}

TEST(SegModel, UnknownClassIsModelLabelMismatch) {
  SegModel model = make_model(4, 6, 2, 2, 5);
  try {
    model.columns_for(SegmentLabeling::from_framewise({0, 5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kModelLabelMismatch);
  }
}

TEST(Predict, ArgmaxAndTieBreak) {
  RandomSource rng(7);
  SegModel model(SegModelConfig{2, 4, 1}, rng);
  model.expand_head(std::vector<ClassId>{9, 4, 6}, LabelMode::kDisjoint, rng);
  FeatureSequence x;
  x.values = normal_matrix(6, 2, rng);
  // A zero head ties every class; the lowest id (4) wins regardless of column.
  model.head().weights.fill(0.0);
  for (double& b : model.head().bias) b = 0.0;
  EXPECT_EQ(predict(model, x).framewise(), std::vector<ClassId>(6, 4));
  // Unique maxima: bias column 2 (class 6) on top.
  model.head().bias[2] = 1.0;
  EXPECT_EQ(predict(model, x).framewise(), std::vector<ClassId>(6, 6));
  // Two-way tie between class 9 and class 6.
  model.head().bias[0] = 1.0;
  EXPECT_EQ(predict(model, x).framewise(), std::vector<ClassId>(6, 6));
}

TEST(Predict, ArgmaxOfForwardOnRandomModels) {
  SegModel model = make_model(3, 5, 2, 4, 8);
  RandomSource rng(9);
  FeatureSequence x;
  x.values = normal_matrix(30, 3, rng);
  const Matrix logits = model.forward(x);
  const SegmentLabeling pred = predict(model, x);
  ASSERT_EQ(pred.frames(), 30u);
  for (std::size_t t = 0; t < 30; ++t) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < 4; ++a) {
      if (logits(t, a) > logits(t, best)) best = a;
    }
    EXPECT_EQ(pred.framewise()[t], model.class_ids()[best]);
  }
  EXPECT_NO_THROW(SegmentLabeling::from_segments(pred.segments()));
}

TEST(Training, OverfitsOneSequence) {
  SegModel model = make_model(6, 16, 3, 3, 10);
  RandomSource rng(11);
  LabeledVideo item;
  item.features.values = normal_matrix(40, 6, rng);
  item.labels = SegmentLabeling::from_segments({{0, 0, 12}, {2, 12, 15}, {1, 27, 13}});
  Adam optimizer(AdamConfig{0.01});
  const TasLossConfig cfg;
  const double first = train_on_sequence(model, optimizer, item, cfg).total;
  double last = first;
  for (int e = 1; e < 200; ++e) last = train_on_sequence(model, optimizer, item, cfg).total;
  EXPECT_LT(last, first);
  EXPECT_EQ(predict(model, item.features).framewise(), item.labels.framewise());
}

TEST(Checkpoint, SegModelRoundTripIsByteIdentical) {
  SegModel model = make_model(4, 6, 3, 5, 12);
  const std::string bytes = model.to_checkpoint().serialize();
  const SegModel back = SegModel::from_checkpoint(Checkpoint::deserialize(bytes, "mem"));
  EXPECT_EQ(back.to_checkpoint().serialize(), bytes);
  EXPECT_EQ(back.class_ids(), model.class_ids());
  RandomSource rng(13);
  FeatureSequence x;
  x.values = normal_matrix(9, 4, rng);
  EXPECT_EQ(back.forward(x), model.forward(x));
}
