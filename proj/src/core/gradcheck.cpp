#include "itas/core/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "itas/core/errors.hpp"
#include "itas/core/random.hpp"

namespace itas {

std::string GradCheckReport::summary() const {
  std::ostringstream out;
  out << (passed ? "PASS" : "FAIL") << " checked=" << checked << " skipped_at_kink=" << skipped_at_kink
      << " max_rel_error=" << max_rel_error;
  if (!worst_param.empty()) {
    out << " worst=" << worst_param << "[" << worst_index << "] analytic=" << worst_analytic
        << " numeric=" << worst_numeric;
  }
  return out.str();
}

GradCheckReport gradcheck(GradCheckProblem& problem, const GradCheckOptions& options) {
  const LossEvaluation first = problem.evaluate();
  const LossEvaluation second = problem.evaluate();
  if (first.value != second.value || first.branch_signature != second.branch_signature) {
    fail(ErrorKind::kDeterminism, "loss closure returned different values for identical parameters");
  }
  problem.compute_gradients();

  GradCheckReport report;
  RandomSource sampler(options.sample_seed);
  for (ParamSlot& slot : problem.params) {
    std::vector<std::size_t> coords(slot.value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_tensor != 0 && coords.size() > options.max_coords_per_tensor) {
      sampler.shuffle(coords);
      coords.resize(options.max_coords_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t i : coords) {
      const double original = slot.value[i];
      slot.value[i] = original + options.step;
      const LossEvaluation plus = problem.evaluate();
      slot.value[i] = original - options.step;
      const LossEvaluation minus = problem.evaluate();
      slot.value[i] = original;
      if (plus.branch_signature != first.branch_signature || minus.branch_signature != first.branch_signature) {
        ++report.skipped_at_kink;
        continue;
      }
      const double numeric = (plus.value - minus.value) / (2.0 * options.step);
      const double analytic = slot.grad[i];
      const double denom = std::max({std::abs(numeric), std::abs(analytic), options.abs_floor});
      const double rel = std::abs(numeric - analytic) / denom;
      ++report.checked;
      if (std::isnan(rel) || rel > report.max_rel_error || report.worst_param.empty()) {
        report.max_rel_error = std::isnan(rel) ? INFINITY : rel;
        report.worst_param = slot.name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.checked > 0 && report.max_rel_error <= options.tolerance;
  return report;
}

}  // namespace itas
