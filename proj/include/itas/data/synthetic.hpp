#pragma once

#include <string>
#include <utility>
#include <vector>

#include "itas/core/random.hpp"
#include "itas/data/types.hpp"

namespace itas {

// Procedural corpus description. Every action name owns a base vector and a
// drift vector; a frame at progress c within a segment is
// base + c * drift + noise * N(0, I).
struct SyntheticSpec {
  int tasks = 3;
  int actions_per_task = 4;
  // Actions per task drawn from a pool of names common to every task.
  int shared_actions = 0;
  int videos_per_task = 25;
  int dim = 16;
  int min_segment_length = 8;
  int max_segment_length = 20;
  // Probability of dropping each scripted action from a video (at least two
  // segments are always kept when the task has two or more actions).
  double skip_probability = 0.25;
  double noise = 0.3;
  // |drift| of every action.
  double drift = 4.0;
  // Per-coordinate standard deviation of base vectors.
  double base_scale = 1.0;
  double train_fraction = 0.8;

  void validate() const;
};

struct ActionPrototype {
  std::string name;
  std::vector<double> base;
  std::vector<double> drift;
};

struct SyntheticCorpus {
  std::vector<TaskDataset> tasks;
  LabelSpace space{LabelMode::kDisjoint};
  // Indexed by global class id of `space`.
  std::vector<ActionPrototype> prototypes;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec, const RandomSource& rng);

// Re-labels datasets so that equal action names share one global id.
std::pair<std::vector<TaskDataset>, LabelSpace> split_blurry(const std::vector<TaskDataset>& datasets,
                                                             const LabelSpace& names);

}  // namespace itas
