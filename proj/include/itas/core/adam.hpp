#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "itas/core/layers.hpp"

namespace itas {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;
};

// Adaptive-moment optimizer with bias correction. The slot list passed to
// step() must keep the same order and sizes between calls; moments are sized
// lazily on the first step.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<const ParamSlot> slots);

  const AdamConfig& config() const noexcept { return config_; }
  void set_learning_rate(double lr) noexcept { config_.learning_rate = lr; }
  const OptimizerState& state() const noexcept { return state_; }

 private:
  AdamConfig config_;
  OptimizerState state_;
};

}  // namespace itas
