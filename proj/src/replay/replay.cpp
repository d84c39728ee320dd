#include "itas/replay/replay.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "itas/core/checkpoint.hpp"
#include "itas/core/errors.hpp"
#include "itas/data/io.hpp"

namespace itas {

const char* to_string(ReplayMode mode) {
  switch (mode) {
    case ReplayMode::kCoherent: return "coherent";
    case ReplayMode::kStatic: return "static";
    case ReplayMode::kRandom: return "random";
  }
  return "coherent";
}

ReplayMode parse_replay_mode(const std::string& text) {
  if (text == "coherent") return ReplayMode::kCoherent;
  if (text == "static") return ReplayMode::kStatic;
  if (text == "random") return ReplayMode::kRandom;
  fail(ErrorKind::kConfig, "replay mode must be coherent, static or random, got '" + text + "'");
}

SequencePool build_pool(const TaskDataset& task) {
  if (task.train.empty()) fail(ErrorKind::kPool, "task " + std::to_string(task.task) + " has no training videos");
  SequencePool pool;
  pool.task = task.task;
  for (const LabeledVideo& v : task.train) pool.structures.push_back(v.labels.segments());
  return pool;
}

std::size_t sample_structure(const SequencePool& pool, RandomSource& rng) {
  if (pool.structures.empty()) fail(ErrorKind::kPool, "sequence pool of task " + std::to_string(pool.task) + " is empty");
  return rng.index(pool.structures.size());
}

namespace {

std::vector<double> draw_latent(std::size_t dim, RandomSource& rng) {
  std::vector<double> z(dim);
  for (double& v : z) v = rng.normal();
  return z;
}

}  // namespace

Matrix generate_segment(const TcaModel& decoder, ClassId action, std::size_t length, ReplayMode mode,
                        RandomSource& rng) {
  if (length == 0) fail(ErrorKind::kDomain, "segment length must be >= 1");
  const std::size_t slot = decoder.slot_of(action);
  const std::size_t z_dim = decoder.config().latent_dim;
  Matrix z(length, z_dim);
  std::vector<double> coherence_values(length, kConstantCoherence);
  if (mode == ReplayMode::kRandom) {
    for (std::size_t i = 0; i < length; ++i) {
      const std::vector<double> draw = draw_latent(z_dim, rng);
      std::copy(draw.begin(), draw.end(), z.row(i).begin());
    }
  } else {
    const std::vector<double> shared = draw_latent(z_dim, rng);
    for (std::size_t i = 0; i < length; ++i) std::copy(shared.begin(), shared.end(), z.row(i).begin());
    if (mode == ReplayMode::kCoherent) {
      for (std::size_t i = 0; i < length; ++i) coherence_values[i] = coherence(i + 1, length).value();
    }
  }
  const std::vector<std::size_t> slots(length, slot);
  return decoder.decode_rows(z, slots, coherence_values);
}

ReplayVideo generate_video(const DecoderCache& decoders, const SequencePool& pool, ReplayMode mode,
                           RandomSource& rng) {
  auto it = decoders.find(pool.task);
  if (it == decoders.end()) fail(ErrorKind::kCache, "no cached decoder for task " + std::to_string(pool.task));
  const TcaModel& decoder = it->second;
  const std::size_t index = sample_structure(pool, rng);
  const SegmentStructure& structure = pool.structures[index];

  std::size_t frames = 0;
  for (const Segment& s : structure) frames += s.length;
  ReplayVideo video;
  video.features.values = Matrix(frames, decoder.config().feature_dim);
  for (const Segment& s : structure) {
    const Matrix seg = generate_segment(decoder, s.action, s.length, mode, rng);
    for (std::size_t i = 0; i < s.length; ++i) {
      std::copy(seg.row(i).begin(), seg.row(i).end(), video.features.values.row(s.start + i).begin());
    }
  }
  video.labels = SegmentLabeling::from_segments(structure);
  video.provenance = {pool.task, index, to_string(mode)};
  video.features.source_id = "replay_task" + std::to_string(pool.task) + "_s" + std::to_string(index);
  return video;
}

std::vector<std::size_t> replay_budget(std::size_t budget, std::size_t previous_tasks) {
  if (previous_tasks == 0) fail(ErrorKind::kBudget, "replay needs at least one previous task");
  if (budget < previous_tasks) {
    fail(ErrorKind::kBudget, "replay budget " + std::to_string(budget) + " cannot cover " +
                                 std::to_string(previous_tasks) + " previous tasks");
  }
  std::vector<std::size_t> counts(previous_tasks, budget / previous_tasks);
  for (std::size_t k = 0; k < budget % previous_tasks; ++k) ++counts[k];
  return counts;
}

std::vector<ReplayVideo> build_replay_set(const DecoderCache& decoders, std::span<const SequencePool> pools,
                                          std::size_t budget, ReplayMode mode, const RandomSource& rng) {
  const std::vector<std::size_t> counts = replay_budget(budget, pools.size());
  std::vector<ReplayVideo> videos;
  videos.reserve(budget);
  for (std::size_t p = 0; p < pools.size(); ++p) {
    for (std::size_t k = 0; k < counts[p]; ++k) {
      RandomSource stream = rng.substream(static_cast<std::uint64_t>(pools[p].task), k);
      videos.push_back(generate_video(decoders, pools[p], mode, stream));
    }
  }
  return videos;
}

void ExemplarStore::add_task(const TaskDataset& task) {
  std::vector<ExemplarSequence>& entries = store_[task.task];
  entries.clear();
  for (const LabeledVideo& v : task.train) {
    ExemplarSequence seq;
    seq.structure = v.labels.segments();
    seq.mean_frames = Matrix(seq.structure.size(), v.features.dim());
    for (std::size_t n = 0; n < seq.structure.size(); ++n) {
      const Segment& s = seq.structure[n];
      auto mean = seq.mean_frames.row(n);
      for (std::size_t i = 0; i < s.length; ++i) {
        auto frame = v.features.values.row(s.start + i);
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += frame[d];
      }
      for (double& m : mean) m /= static_cast<double>(s.length);
    }
    entries.push_back(std::move(seq));
  }
}

const std::vector<ExemplarSequence>& ExemplarStore::sequences(int task) const {
  auto it = store_.find(task);
  if (it == store_.end() || it->second.empty()) {
    fail(ErrorKind::kPool, "no exemplars stored for task " + std::to_string(task));
  }
  return it->second;
}

FeatureSequence inflate(const ExemplarSequence& sequence) {
  std::size_t frames = 0;
  for (const Segment& s : sequence.structure) frames += s.length;
  FeatureSequence out;
  out.values = Matrix(frames, sequence.mean_frames.cols());
  for (std::size_t n = 0; n < sequence.structure.size(); ++n) {
    const Segment& s = sequence.structure[n];
    for (std::size_t i = 0; i < s.length; ++i) {
      std::copy(sequence.mean_frames.row(n).begin(), sequence.mean_frames.row(n).end(),
                out.values.row(s.start + i).begin());
    }
  }
  return out;
}

std::vector<ReplayVideo> build_exemplar_set(const ExemplarStore& store, std::span<const int> tasks,
                                            std::size_t budget, const RandomSource& rng) {
  const std::vector<std::size_t> counts = replay_budget(budget, tasks.size());
  std::vector<ReplayVideo> videos;
  for (std::size_t p = 0; p < tasks.size(); ++p) {
    const auto& entries = store.sequences(tasks[p]);
    for (std::size_t k = 0; k < counts[p]; ++k) {
      RandomSource stream = rng.substream(static_cast<std::uint64_t>(tasks[p]), k);
      const std::size_t index = stream.index(entries.size());
      ReplayVideo video;
      video.features = inflate(entries[index]);
      video.features.source_id = "exemplar_task" + std::to_string(tasks[p]) + "_s" + std::to_string(index);
      video.labels = SegmentLabeling::from_segments(entries[index].structure);
      video.provenance = {tasks[p], index, "exemplar"};
      videos.push_back(std::move(video));
    }
  }
  return videos;
}

std::vector<ReplayVideo> original_replay(const RetainedVideos& retained, std::span<const int> tasks,
                                         std::size_t budget, const RandomSource& rng) {
  const std::vector<std::size_t> counts = replay_budget(budget, tasks.size());
  std::vector<ReplayVideo> videos;
  for (std::size_t p = 0; p < tasks.size(); ++p) {
    auto it = retained.find(tasks[p]);
    if (it == retained.end() || it->second.empty()) {
      fail(ErrorKind::kPool, "no retained videos for task " + std::to_string(tasks[p]));
    }
    for (std::size_t k = 0; k < counts[p]; ++k) {
      RandomSource stream = rng.substream(static_cast<std::uint64_t>(tasks[p]), k);
      const std::size_t index = stream.index(it->second.size());
      const LabeledVideo& source = it->second[index];
      videos.push_back({source.features, source.labels, {tasks[p], index, "original"}});
    }
  }
  return videos;
}

void save_pool(const std::filesystem::path& path, const SequencePool& pool) {
  std::string text;
  for (const SegmentStructure& structure : pool.structures) {
    for (std::size_t n = 0; n < structure.size(); ++n) {
      if (n > 0) text += ' ';
      text += std::to_string(structure[n].action) + ":" + std::to_string(structure[n].length);
    }
    text += '\n';
  }
  write_file_bytes(path, text);
}

SequencePool load_pool(const std::filesystem::path& path, int task) {
  SequencePool pool;
  pool.task = task;
  std::istringstream in(read_file_bytes(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string token;
    SegmentStructure structure;
    std::size_t start = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      char* end_a = nullptr;
      char* end_l = nullptr;
      const long action = colon == std::string::npos ? -1 : std::strtol(token.c_str(), &end_a, 10);
      const long length = colon == std::string::npos ? 0 : std::strtol(token.c_str() + colon + 1, &end_l, 10);
      if (colon == std::string::npos || end_a != token.c_str() + colon || *end_l != '\0' || action < 0 ||
          length <= 0) {
        fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) + ": bad segment token '" + token + "'");
      }
      structure.push_back({static_cast<ClassId>(action), start, static_cast<std::size_t>(length)});
      start += static_cast<std::size_t>(length);
    }
    if (structure.empty()) continue;
    SegmentLabeling::from_segments(structure);
    pool.structures.push_back(std::move(structure));
  }
  if (pool.structures.empty()) fail(ErrorKind::kPool, path.string() + " holds no structures");
  return pool;
}

void dump_replay(const std::filesystem::path& dir, std::span<const ReplayVideo> videos, const LabelSpace& space) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t k = 0; k < videos.size(); ++k) {
    const ReplayVideo& v = videos[k];
    char stem[128];
    std::snprintf(stem, sizeof stem, "task%d_idx%zu_%s_%04zu", v.provenance.task, v.provenance.structure_index,
                  v.provenance.mode.c_str(), k);
    save_features(dir / (std::string(stem) + ".fseq"), v.features);
    save_labels(dir / (std::string(stem) + ".txt"), v.labels, space);
  }
}

}  // namespace itas
