#include "itas/core/adam.hpp"

#include <cmath>

#include "itas/core/errors.hpp"

namespace itas {

void Adam::step(std::span<const ParamSlot> slots) {
  if (state_.first_moment.empty()) {
    for (const ParamSlot& slot : slots) {
      state_.first_moment.emplace_back(slot.value.size(), 0.0);
      state_.second_moment.emplace_back(slot.value.size(), 0.0);
    }
  }
  if (state_.first_moment.size() != slots.size()) {
    fail(ErrorKind::kShape, "optimizer tracks " + std::to_string(state_.first_moment.size()) +
                                " tensors, got " + std::to_string(slots.size()));
  }
  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const ParamSlot& slot = slots[s];
    auto& m = state_.first_moment[s];
    auto& v = state_.second_moment[s];
    if (m.size() != slot.value.size() || slot.grad.size() != slot.value.size()) {
      fail(ErrorKind::kShape, "optimizer moment shape mismatch for " + slot.name);
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double g = slot.grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      slot.value[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace itas
