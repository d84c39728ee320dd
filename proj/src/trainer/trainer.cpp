#include "itas/trainer/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "itas/core/adam.hpp"
#include "itas/core/errors.hpp"

namespace itas {

const char* to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kFinetune: return "finetune";
    case Strategy::kExemplar: return "exemplar";
    case Strategy::kTca: return "tca";
    case Strategy::kOriginal: return "original";
  }
  return "tca";
}

Strategy parse_strategy(const std::string& text) {
  if (text == "finetune") return Strategy::kFinetune;
  if (text == "exemplar") return Strategy::kExemplar;
  if (text == "tca") return Strategy::kTca;
  if (text == "original") return Strategy::kOriginal;
  fail(ErrorKind::kConfig, "strategy must be finetune, exemplar, tca or original, got '" + text + "'");
}

TaskDataAccess::TaskDataAccess(std::span<const TaskDataset> tasks) : tasks_(tasks) {}

const TaskDataset& TaskDataAccess::find(int task) const {
  for (const TaskDataset& t : tasks_) {
    if (t.task == task) return t;
  }
  fail(ErrorKind::kData, "no dataset for task " + std::to_string(task));
}

void TaskDataAccess::seal(int task) {
  if (std::find(sealed_.begin(), sealed_.end(), task) == sealed_.end()) sealed_.push_back(task);
}

const TaskDataset& TaskDataAccess::train_data(int task) {
  const bool sealed = std::find(sealed_.begin(), sealed_.end(), task) != sealed_.end();
  log_.push_back({stage_, task, true, sealed});
  return find(task);
}

const std::vector<LabeledVideo>& TaskDataAccess::test_data(int task) {
  log_.push_back({stage_, task, false, false});
  return find(task).test;
}

std::size_t TaskDataAccess::violations() const {
  return static_cast<std::size_t>(std::count_if(log_.begin(), log_.end(), [](const Event& e) { return e.violation; }));
}

void RunHistory::write(std::ostream& out) const {
  out << "stage\ttask";
  for (int t : task_order) out << "\ttask" << t;
  out << "\taggregate\n";
  auto cell = [](const SegmentScores& s) {
    std::string text = format_score(s.acc) + "/" + format_score(s.edit);
    for (double f : s.f1) text += "/" + format_score(f);
    return text;
  };
  for (const StageSnapshot& snap : stages) {
    out << snap.stage << '\t' << snap.task;
    for (int t : task_order) {
      auto it = std::find_if(snap.reports.begin(), snap.reports.end(), [&](const TaskReport& r) { return r.task == t; });
      out << '\t' << (it == snap.reports.end() ? std::string("-") : cell(it->scores));
    }
    out << '\t' << cell(snap.aggregate) << '\n';
  }
}

const StageSnapshot& RunHistory::final_stage() const {
  if (stages.empty()) fail(ErrorKind::kConsistency, "run history is empty");
  return stages.back();
}

std::vector<double> train_stage(SegModel& model, std::span<const LabeledVideo> real,
                                std::span<const ReplayVideo> replay, const SegTrainConfig& config,
                                RandomSource& rng) {
  if (config.batch_size == 0) fail(ErrorKind::kConfig, "seg batch size must be >= 1");
  config.loss.validate();

  struct Item {
    const FeatureSequence* features;
    std::vector<int> targets;
  };
  std::vector<Item> items;
  items.reserve(real.size() + replay.size());
  for (const LabeledVideo& v : real) items.push_back({&v.features, model.columns_for(v.labels)});
  for (const ReplayVideo& v : replay) items.push_back({&v.features, model.columns_for(v.labels)});

  std::vector<double> epoch_losses;
  if (items.empty()) return epoch_losses;
  Adam optimizer(AdamConfig{config.learning_rate});
  std::vector<std::size_t> order(items.size());
  for (std::size_t e = 0; e < config.epochs; ++e) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    double sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - begin);
      model.zero_grad();
      for (std::size_t k = begin; k < end; ++k) {
        const Item& item = items[order[k]];
        const SegModel::Trace trace = model.forward_trace(item.features->values);
        TasLossResult loss = tas_loss_with_grad(trace.logits, item.targets, config.loss);
        if (!std::isfinite(loss.total)) {
          fail(ErrorKind::kNumeric, "non-finite loss on '" + item.features->source_id + "'");
        }
        sum += loss.total;
        if (scale != 1.0) {
          for (double& g : loss.grad_logits.values()) g *= scale;
        }
        model.backward(trace, loss.grad_logits);
      }
      optimizer.step(model.parameters());
    }
    epoch_losses.push_back(sum / static_cast<double>(items.size()));
  }
  return epoch_losses;
}

TaskReport evaluate_task(const SegModel& model, int task, std::span<const LabeledVideo> test,
                         ConfusionMatrix* confusion) {
  TaskScorer scorer;
  for (const LabeledVideo& v : test) {
    const SegmentLabeling pred = predict(model, v.features);
    scorer.add(pred, v.labels);
    if (confusion != nullptr) confusion->accumulate(pred, v.labels);
  }
  return {task, scorer.scores()};
}

namespace {

std::vector<int> resolve_order(const IncrementalRun& config, std::span<const TaskDataset> tasks) {
  std::vector<int> natural;
  for (const TaskDataset& t : tasks) natural.push_back(t.task);
  if (config.task_order.empty()) return natural;
  std::vector<int> a = config.task_order;
  std::vector<int> b = natural;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b || std::adjacent_find(a.begin(), a.end()) != a.end()) {
    fail(ErrorKind::kConfig, "task order must be a permutation of the dataset's task ids");
  }
  return config.task_order;
}

}  // namespace

RunResult run(const IncrementalRun& config, std::span<const TaskDataset> tasks, std::size_t total_classes,
              const StageObserver& observer) {
  if (tasks.empty()) fail(ErrorKind::kData, "incremental run needs at least one task");
  for (const TaskDataset& t : tasks) t.validate();
  const std::vector<int> order = resolve_order(config, tasks);
  const bool uses_replay = config.strategy != Strategy::kFinetune;
  if (uses_replay && order.size() > 1 && config.replay_budget < order.size() - 1) {
    fail(ErrorKind::kBudget, "replay budget " + std::to_string(config.replay_budget) + " is below the " +
                                 std::to_string(order.size() - 1) + " previous tasks of the last stage");
  }

  std::size_t dim = 0;
  for (const TaskDataset& t : tasks) {
    for (const LabeledVideo& v : t.train) {
      if (dim == 0) dim = v.features.dim();
      if (v.features.dim() != dim) fail(ErrorKind::kShape, "feature dimensions differ across videos");
    }
  }

  const RandomSource root(config.seed);
  const RandomSource init = root.substream("init");
  const RandomSource training = root.substream("training");
  const RandomSource replay_root = root.substream("replay");

  SegModelConfig seg_config = config.seg;
  if (seg_config.input_dim == 0) seg_config.input_dim = dim;
  if (seg_config.input_dim != dim) fail(ErrorKind::kShape, "seg.input_dim does not match the feature dimension");
  TcaConfig tca_config = config.tca;
  if (tca_config.feature_dim == 0) tca_config.feature_dim = dim;

  RandomSource model_init = init.substream("seg");
  RunResult result{SegModel(seg_config, model_init), {}, {}, {}, {}, 0};
  result.history.task_order = order;

  TaskDataAccess access(tasks);
  ExemplarStore exemplars;
  RetainedVideos retained;
  std::vector<int> previous;

  for (std::size_t s = 0; s < order.size(); ++s) {
    const int task = order[s];
    access.begin_stage(s + 1);
    const TaskDataset& current = access.train_data(task);

    RandomSource head_rng = init.substream("head", s);
    result.model.expand_head(current.classes, config.label_mode, head_rng);

    std::vector<ReplayVideo> replay;
    if (uses_replay && !previous.empty()) {
      const RandomSource stage_rng = replay_root.substream("stage", s);
      switch (config.strategy) {
        case Strategy::kTca:
          replay = build_replay_set(result.decoders, result.pools, config.replay_budget, config.replay_mode,
                                    stage_rng);
          break;
        case Strategy::kExemplar:
          replay = build_exemplar_set(exemplars, previous, config.replay_budget, stage_rng);
          break;
        case Strategy::kOriginal:
          replay = original_replay(retained, previous, config.replay_budget, stage_rng);
          break;
        case Strategy::kFinetune:
          break;
      }
    }

    StageSnapshot snap;
    snap.stage = s + 1;
    snap.task = task;
    snap.replay_videos = replay.size();
    RandomSource seg_rng = training.substream("seg", s);
    snap.seg_epoch_losses = train_stage(result.model, current.train, replay, config.seg_train, seg_rng);

    const TcaModel* decoder = nullptr;
    const SequencePool* pool = nullptr;
    switch (config.strategy) {
      case Strategy::kTca: {
        RandomSource tca_init = init.substream("tca", static_cast<std::uint64_t>(task));
        TcaModel model(tca_config, current.classes, tca_init);
        RandomSource tca_rng = training.substream("tca", static_cast<std::uint64_t>(task));
        snap.tca_epoch_losses = train_tca(model, current, config.tca_train, tca_rng).epoch_losses;
        auto [it, inserted] = result.decoders.insert_or_assign(task, std::move(model));
        (void)inserted;
        decoder = &it->second;
        result.pools.push_back(build_pool(current));
        pool = &result.pools.back();
        break;
      }
      case Strategy::kExemplar:
        exemplars.add_task(current);
        break;
      case Strategy::kOriginal:
        retained[task] = current.train;
        break;
      case Strategy::kFinetune:
        break;
    }
    access.seal(task);
    previous.push_back(task);

    snap.confusion = ConfusionMatrix(total_classes);
    for (int seen : previous) {
      snap.reports.push_back(evaluate_task(result.model, seen, access.test_data(seen), &snap.confusion));
    }
    snap.aggregate = aggregate(snap.reports);
    result.history.stages.push_back(std::move(snap));
    if (observer) observer({result.history.stages.back(), result.model, decoder, pool, replay});
  }

  result.access_log = access.log();
  result.access_violations = access.violations();
  return result;
}

}  // namespace itas
