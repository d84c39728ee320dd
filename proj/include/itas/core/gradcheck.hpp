#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "itas/core/layers.hpp"

namespace itas {

// Loss value plus a fingerprint of every non-smooth branch taken while
// computing it (ReLU gates, clamps). Two evaluations with different
// fingerprints straddle a kink, where central differences are meaningless.
struct LossEvaluation {
  double value = 0.0;
  std::uint64_t branch_signature = 0;
};

struct GradCheckProblem {
  // Evaluates the loss at the current parameter values. Must be deterministic.
  std::function<LossEvaluation()> evaluate;
  // Zeroes and refills the gradient accumulators at the current values.
  std::function<void()> compute_gradients;
  std::vector<ParamSlot> params;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor for the relative error, so coordinates whose true
  // gradient is ~0 are judged on absolute error instead.
  double abs_floor = 1e-6;
  // 0 checks every coordinate; otherwise at most this many per tensor, chosen
  // by `sample_seed`.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t sample_seed = 0;
};

struct GradCheckReport {
  bool passed = true;
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_at_kink = 0;

  std::string summary() const;
};

// Central-difference check of analytic gradients. Throws a determinism error
// if two evaluations at identical parameters disagree.
GradCheckReport gradcheck(GradCheckProblem& problem, const GradCheckOptions& options = {});

}  // namespace itas
