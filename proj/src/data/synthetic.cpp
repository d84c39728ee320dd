#include "itas/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "itas/core/errors.hpp"
#include "itas/tca/coherence.hpp"

namespace itas {

void SyntheticSpec::validate() const {
  auto positive = [](int v, const char* what) {
    if (v < 1) fail(ErrorKind::kConfig, std::string("synthetic ") + what + " must be >= 1, got " + std::to_string(v));
  };
  positive(tasks, "tasks");
  positive(actions_per_task, "actions_per_task");
  positive(videos_per_task, "videos_per_task");
  positive(dim, "dim");
  positive(min_segment_length, "min_segment_length");
  if (max_segment_length < min_segment_length) {
    fail(ErrorKind::kConfig, "synthetic max_segment_length is below min_segment_length");
  }
  if (shared_actions < 0 || shared_actions > actions_per_task) {
    fail(ErrorKind::kConfig, "synthetic shared_actions must lie in [0, actions_per_task]");
  }
  if (noise < 0.0 || drift < 0.0 || base_scale < 0.0) {
    fail(ErrorKind::kConfig, "synthetic noise, drift and base_scale must be non-negative");
  }
  if (skip_probability < 0.0 || skip_probability >= 1.0) {
    fail(ErrorKind::kConfig, "synthetic skip_probability must lie in [0, 1)");
  }
  if (train_fraction <= 0.0 || train_fraction > 1.0) {
    fail(ErrorKind::kConfig, "synthetic train_fraction must lie in (0, 1]");
  }
}

namespace {

ActionPrototype draw_prototype(const std::string& name, const SyntheticSpec& spec, const RandomSource& rng) {
  RandomSource stream = rng.substream("prototype:" + name);
  ActionPrototype proto{name, std::vector<double>(static_cast<std::size_t>(spec.dim)),
                        std::vector<double>(static_cast<std::size_t>(spec.dim))};
  for (double& v : proto.base) v = spec.base_scale * stream.normal();
  double norm = 0.0;
  for (double& v : proto.drift) {
    v = stream.normal();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : proto.drift) v = norm > 0.0 ? spec.drift * v / norm : 0.0;
  return proto;
}

std::string two_digits(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec, const RandomSource& rng) {
  spec.validate();
  SyntheticCorpus corpus;

  std::vector<std::string> shared_names;
  for (int k = 0; k < spec.shared_actions; ++k) shared_names.push_back("common_act" + two_digits(k));

  std::map<std::string, ActionPrototype> prototypes;
  auto prototype_of = [&](const std::string& name) -> const ActionPrototype& {
    auto it = prototypes.find(name);
    if (it == prototypes.end()) it = prototypes.emplace(name, draw_prototype(name, spec, rng)).first;
    return it->second;
  };

  for (int b = 0; b < spec.tasks; ++b) {
    // Vocabulary: shared names first, then this task's own actions.
    std::vector<std::string> vocabulary = shared_names;
    for (int k = spec.shared_actions; k < spec.actions_per_task; ++k) {
      vocabulary.push_back("task" + two_digits(b) + "_act" + two_digits(k - spec.shared_actions));
    }
    std::vector<ClassId> ids;
    for (const std::string& name : vocabulary) {
      const ClassId id = corpus.space.intern(b, name);
      if (static_cast<std::size_t>(id) == corpus.prototypes.size()) corpus.prototypes.push_back(prototype_of(name));
      ids.push_back(id);
    }

    // The task's procedural script is a fixed ordering of its actions.
    RandomSource script_rng = rng.substream("script", static_cast<std::uint64_t>(b));
    std::vector<ClassId> script = ids;
    script_rng.shuffle(script);

    TaskDataset ds;
    ds.task = b;
    const int n_train = std::max(1, static_cast<int>(std::lround(spec.train_fraction * spec.videos_per_task)));
    const std::size_t min_kept = std::min<std::size_t>(2, script.size());
    for (int v = 0; v < spec.videos_per_task; ++v) {
      RandomSource video_rng = rng.substream("video", static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(v));
      std::vector<ClassId> kept;
      do {
        kept.clear();
        for (ClassId a : script) {
          if (video_rng.uniform() >= spec.skip_probability) kept.push_back(a);
        }
      } while (kept.size() < min_kept);

      std::vector<Segment> segments;
      std::size_t start = 0;
      for (ClassId a : kept) {
        const auto length = static_cast<std::size_t>(video_rng.integer(spec.min_segment_length, spec.max_segment_length));
        segments.push_back({a, start, length});
        start += length;
      }
      FeatureSequence features;
      features.values = Matrix(start, static_cast<std::size_t>(spec.dim));
      features.source_id = "task" + two_digits(b) + "_vid" + two_digits(v / 10) + std::to_string(v % 10);
      for (const Segment& s : segments) {
        const ActionPrototype& proto = corpus.prototypes[static_cast<std::size_t>(s.action)];
        for (std::size_t i = 0; i < s.length; ++i) {
          const double c = coherence(i + 1, s.length).value();
          auto row = features.values.row(s.start + i);
          for (std::size_t d = 0; d < row.size(); ++d) {
            row[d] = proto.base[d] + c * proto.drift[d] + spec.noise * video_rng.normal();
          }
        }
      }
      LabeledVideo item{std::move(features), SegmentLabeling::from_segments(std::move(segments))};
      (v < n_train ? ds.train : ds.test).push_back(std::move(item));
    }
    ds.classes = ids;
    std::sort(ds.classes.begin(), ds.classes.end());
    corpus.tasks.push_back(std::move(ds));
  }
  return corpus;
}

std::pair<std::vector<TaskDataset>, LabelSpace> split_blurry(const std::vector<TaskDataset>& datasets,
                                                             const LabelSpace& names) {
  LabelSpace blurry(LabelMode::kBlurry);
  std::map<ClassId, ClassId> remap;
  for (const TaskDataset& ds : datasets) {
    for (ClassId c : ds.classes) remap[c] = blurry.intern(ds.task, names.name_of(c));
  }
  std::vector<TaskDataset> out;
  out.reserve(datasets.size());
  auto relabel = [&](ClassId c) { return remap.at(c); };
  for (const TaskDataset& ds : datasets) {
    TaskDataset copy;
    copy.task = ds.task;
    std::set<ClassId> classes;
    for (ClassId c : ds.classes) classes.insert(remap.at(c));
    copy.classes.assign(classes.begin(), classes.end());
    for (const LabeledVideo& v : ds.train) copy.train.push_back({v.features, v.labels.remapped(relabel)});
    for (const LabeledVideo& v : ds.test) copy.test.push_back({v.features, v.labels.remapped(relabel)});
    out.push_back(std::move(copy));
  }
  return {std::move(out), std::move(blurry)};
}

}  // namespace itas
