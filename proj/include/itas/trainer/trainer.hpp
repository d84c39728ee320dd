#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "itas/core/random.hpp"
#include "itas/data/types.hpp"
#include "itas/metrics/metrics.hpp"
#include "itas/replay/replay.hpp"
#include "itas/seg/losses.hpp"
#include "itas/seg/seg_model.hpp"
#include "itas/tca/tca_model.hpp"

namespace itas {

enum class Strategy { kFinetune, kExemplar, kTca, kOriginal };

const char* to_string(Strategy strategy);
Strategy parse_strategy(const std::string& text);

struct SegTrainConfig {
  std::size_t epochs = 50;
  double learning_rate = 5e-4;
  // Sequences per optimizer step; gradients are averaged over the batch.
  std::size_t batch_size = 1;
  TasLossConfig loss;
};

struct IncrementalRun {
  Strategy strategy = Strategy::kTca;
  ReplayMode replay_mode = ReplayMode::kCoherent;
  // Task ids in arrival order; empty means the order of the datasets.
  std::vector<int> task_order;
  std::size_t replay_budget = 60;
  SegModelConfig seg;  // input_dim is taken from the data when zero
  SegTrainConfig seg_train;
  TcaConfig tca;       // feature_dim is taken from the data when zero
  TcaTrainConfig tca_train;
  std::uint64_t seed = 0;
  LabelMode label_mode = LabelMode::kDisjoint;
};

// Logs every read of task data made by the run loop. Training data of a task
// becomes sealed once its stage ends; reading it afterwards is a violation.
class TaskDataAccess {
 public:
  struct Event {
    std::size_t stage = 0;
    int task = 0;
    bool train = false;
    bool violation = false;
  };

  explicit TaskDataAccess(std::span<const TaskDataset> tasks);

  void begin_stage(std::size_t stage) { stage_ = stage; }
  void seal(int task);
  const TaskDataset& train_data(int task);
  const std::vector<LabeledVideo>& test_data(int task);

  const std::vector<Event>& log() const noexcept { return log_; }
  std::size_t violations() const;

 private:
  const TaskDataset& find(int task) const;

  std::span<const TaskDataset> tasks_;
  std::vector<int> sealed_;
  std::size_t stage_ = 0;
  std::vector<Event> log_;
};

// Metrics after one stage, over the test sets of all tasks seen so far.
struct StageSnapshot {
  std::size_t stage = 0;  // 1-based
  int task = 0;           // task trained at this stage
  std::vector<TaskReport> reports;
  SegmentScores aggregate;
  ConfusionMatrix confusion;
  std::size_t replay_videos = 0;
  std::vector<double> seg_epoch_losses;
  std::vector<double> tca_epoch_losses;
};

struct RunHistory {
  std::vector<int> task_order;
  std::vector<StageSnapshot> stages;

  // Rows are stages, columns are tasks in arrival order, cells are
  // "acc/edit/f1@10/f1@25/f1@50" or "-" for tasks not seen yet.
  void write(std::ostream& out) const;
  const StageSnapshot& final_stage() const;
};

struct RunResult {
  SegModel model;
  RunHistory history;
  DecoderCache decoders;
  std::vector<SequencePool> pools;
  std::vector<TaskDataAccess::Event> access_log;
  std::size_t access_violations = 0;
};

// Called after each stage with the state the run directory needs.
struct StageArtifacts {
  const StageSnapshot& snapshot;
  const SegModel& model;
  const TcaModel* decoder;    // trained at this stage, if any
  const SequencePool* pool;   // stored at this stage, if any
  std::span<const ReplayVideo> replay;
};
using StageObserver = std::function<void(const StageArtifacts&)>;

// Incremental loop: for each task in order, grow the head, assemble the replay
// set for previous tasks, train the segmentation model on current plus replay
// data, train and cache the task's decoder (tca strategy), store the task's
// replay memory and evaluate on every seen task.
RunResult run(const IncrementalRun& config, std::span<const TaskDataset> tasks, std::size_t total_classes,
              const StageObserver& observer = {});

// Epochs over the shuffled union of real and replay items. Returns the mean
// loss per epoch.
std::vector<double> train_stage(SegModel& model, std::span<const LabeledVideo> real,
                                std::span<const ReplayVideo> replay, const SegTrainConfig& config,
                                RandomSource& rng);

TaskReport evaluate_task(const SegModel& model, int task, std::span<const LabeledVideo> test,
                         ConfusionMatrix* confusion = nullptr);

}  // namespace itas
