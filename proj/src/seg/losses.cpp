#include "itas/seg/losses.hpp"

#include <cmath>
#include <string>

#include "itas/core/errors.hpp"
#include "itas/core/layers.hpp"

namespace itas {

void TasLossConfig::validate() const {
  if (!(lambda >= 0.0)) fail(ErrorKind::kConfig, "smoothing weight lambda must be >= 0");
  if (!(tau > 0.0)) fail(ErrorKind::kConfig, "truncation threshold tau must be > 0");
}

namespace {

void check_targets(const Matrix& logits, std::span<const int> targets) {
  if (targets.size() != logits.rows()) {
    fail(ErrorKind::kConsistency, std::to_string(targets.size()) + " targets for " + std::to_string(logits.rows()) +
                                      " frames of logits");
  }
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] < 0 || static_cast<std::size_t>(targets[t]) >= logits.cols()) {
      fail(ErrorKind::kLabeling, "target " + std::to_string(targets[t]) + " at frame " + std::to_string(t + 1) +
                                     " outside " + std::to_string(logits.cols()) + " classes");
    }
  }
}

}  // namespace

double loss_cls(const Matrix& logits, std::span<const int> targets) {
  return tas_loss_with_grad(logits, targets, TasLossConfig{0.0, 4.0}).cls;
}

double loss_sm(const Matrix& logits, double tau) {
  if (!(tau > 0.0)) fail(ErrorKind::kConfig, "truncation threshold tau must be > 0");
  const std::size_t frames = logits.rows();
  const std::size_t classes = logits.cols();
  if (frames < 2 || classes == 0) return 0.0;
  const Matrix lp = log_softmax_rows(logits);
  double sum = 0.0;
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t a = 0; a < classes; ++a) {
      const double delta = std::min(std::abs(lp(t, a) - lp(t - 1, a)), tau);
      sum += delta * delta;
    }
  }
  return sum / static_cast<double>(frames * classes);
}

double loss_tas(const Matrix& logits, std::span<const int> targets, const TasLossConfig& config) {
  return tas_loss_with_grad(logits, targets, config).total;
}

TasLossResult tas_loss_with_grad(const Matrix& logits, std::span<const int> targets, const TasLossConfig& config,
                                 SmoothingGradient mode, const Matrix* previous_log_probs) {
  config.validate();
  check_targets(logits, targets);
  const std::size_t frames = logits.rows();
  const std::size_t classes = logits.cols();
  if (previous_log_probs && (previous_log_probs->rows() != frames || previous_log_probs->cols() != classes)) {
    fail(ErrorKind::kShape, "previous log-probs " + previous_log_probs->shape_string() + " vs logits " +
                                logits.shape_string());
  }

  TasLossResult result;
  const Matrix lp = log_softmax_rows(logits);
  Matrix grad_lp(frames, classes);
  if (frames == 0) {
    result.grad_logits = Matrix(0, classes);
    return result;
  }

  const double inv_frames = 1.0 / static_cast<double>(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const auto y = static_cast<std::size_t>(targets[t]);
    result.cls -= lp(t, y);
    grad_lp(t, y) -= inv_frames;
  }
  result.cls *= inv_frames;

  if (frames >= 2 && classes > 0) {
    const Matrix& prev = previous_log_probs ? *previous_log_probs : lp;
    const double norm = 1.0 / static_cast<double>(frames * classes);
    std::uint64_t signature = 0xcbf29ce484222325ULL;
    double sum = 0.0;
    for (std::size_t t = 1; t < frames; ++t) {
      for (std::size_t a = 0; a < classes; ++a) {
        const double diff = lp(t, a) - prev(t - 1, a);
        if (std::abs(diff) >= config.tau) {
          sum += config.tau * config.tau;
          signature = (signature ^ (t * classes + a)) * 0x100000001b3ULL;
          continue;
        }
        sum += diff * diff;
        const double g = config.lambda * 2.0 * diff * norm;
        grad_lp(t, a) += g;
        if (mode == SmoothingGradient::kFull && !previous_log_probs) grad_lp(t - 1, a) -= g;
      }
    }
    result.sm = sum * norm;
    result.clamp_signature = signature;
  }
  result.total = result.cls + config.lambda * result.sm;
  result.grad_logits = log_softmax_backward(lp, grad_lp);
  return result;
}

}  // namespace itas
