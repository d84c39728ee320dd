#pragma once

#include <cstdint>
#include <span>

#include "itas/core/matrix.hpp"

namespace itas {

struct TasLossConfig {
  double lambda = 0.15;  // smoothing weight
  double tau = 4.0;      // truncation of per-class log-probability jumps

  void validate() const;
};

// Frame-wise cross-entropy averaged over frames. `targets` are head columns;
// a target >= number of columns is a labeling error.
double loss_cls(const Matrix& logits, std::span<const int> targets);

// Truncated smoothing loss: (1 / (T*A)) * sum over t >= 2 and classes of
// min(|log p_t(a) - log p_{t-1}(a)|, tau)^2. Zero for a single frame.
double loss_sm(const Matrix& logits, double tau);

double loss_tas(const Matrix& logits, std::span<const int> targets, const TasLossConfig& config);

struct TasLossResult {
  double cls = 0.0;
  double sm = 0.0;
  double total = 0.0;
  Matrix grad_logits;
  // Fingerprint of which terms hit the truncation.
  std::uint64_t clamp_signature = 0;
};

enum class SmoothingGradient {
  // Previous-frame log-probabilities are treated as constants.
  kDetachPrevious,
  // Exact gradient of the symmetric expression.
  kFull,
};

// Loss and gradient with respect to the logits. When `previous_log_probs` is
// given, the previous-frame term of the smoothing loss reads those values
// instead of the log-softmax of `logits` (and never receives gradient).
TasLossResult tas_loss_with_grad(const Matrix& logits, std::span<const int> targets, const TasLossConfig& config,
                                 SmoothingGradient mode = SmoothingGradient::kDetachPrevious,
                                 const Matrix* previous_log_probs = nullptr);

}  // namespace itas
