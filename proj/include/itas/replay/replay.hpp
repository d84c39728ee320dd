#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "itas/core/random.hpp"
#include "itas/data/types.hpp"
#include "itas/tca/tca_model.hpp"

namespace itas {

enum class ReplayMode {
  kCoherent,  // one z per segment, coherence sweeps 0 -> 1
  kStatic,    // one z per segment, constant coherence
  kRandom,    // fresh z per frame, constant coherence
};

inline constexpr double kConstantCoherence = 0.5;

const char* to_string(ReplayMode mode);
ReplayMode parse_replay_mode(const std::string& text);

using SegmentStructure = std::vector<Segment>;

// Symbolic action structures (order and durations) of one task's training
// videos. Holds no features.
struct SequencePool {
  int task = 0;
  std::vector<SegmentStructure> structures;

  std::size_t size() const noexcept { return structures.size(); }
};

SequencePool build_pool(const TaskDataset& task);

// Uniform draw with replacement; returns an index into pool.structures.
std::size_t sample_structure(const SequencePool& pool, RandomSource& rng);

struct ReplayProvenance {
  int task = 0;
  std::size_t structure_index = 0;
  std::string mode;
};

struct ReplayVideo {
  FeatureSequence features;
  SegmentLabeling labels;
  ReplayProvenance provenance;
};

// length x D features for one segment of `action`.
Matrix generate_segment(const TcaModel& decoder, ClassId action, std::size_t length, ReplayMode mode,
                        RandomSource& rng);

using DecoderCache = std::map<int, TcaModel>;

// Samples a structure from `pool`, generates each segment with the pool's
// task decoder and concatenates them in timestamp order.
ReplayVideo generate_video(const DecoderCache& decoders, const SequencePool& pool, ReplayMode mode,
                           RandomSource& rng);

// Videos per previous task: floor(M / n) each, the remainder M mod n going to
// the first tasks in order. Requires M >= n >= 1.
std::vector<std::size_t> replay_budget(std::size_t budget, std::size_t previous_tasks);

// Exactly `budget` generated videos drawn from `pools` (in the given order).
// Video k of pool p uses rng.substream(task, k).
std::vector<ReplayVideo> build_replay_set(const DecoderCache& decoders, std::span<const SequencePool> pools,
                                          std::size_t budget, ReplayMode mode, const RandomSource& rng);

// Exemplar baseline memory: one mean frame per segment per training video.
struct ExemplarSequence {
  SegmentStructure structure;
  Matrix mean_frames;  // one row per segment
};

class ExemplarStore {
 public:
  void add_task(const TaskDataset& task);
  const std::vector<ExemplarSequence>& sequences(int task) const;
  bool has_task(int task) const { return store_.count(task) != 0; }

 private:
  std::map<int, std::vector<ExemplarSequence>> store_;
};

// Replicates each stored mean frame across its segment's duration.
FeatureSequence inflate(const ExemplarSequence& sequence);

std::vector<ReplayVideo> build_exemplar_set(const ExemplarStore& store, std::span<const int> tasks,
                                            std::size_t budget, const RandomSource& rng);

using RetainedVideos = std::map<int, std::vector<LabeledVideo>>;

// Upper-bound baseline: real stored videos, same budgeting rule.
std::vector<ReplayVideo> original_replay(const RetainedVideos& retained, std::span<const int> tasks,
                                         std::size_t budget, const RandomSource& rng);

// Pool files: one structure per line as "action:length" tokens.
void save_pool(const std::filesystem::path& path, const SequencePool& pool);
SequencePool load_pool(const std::filesystem::path& path, int task);

// Writes <dir>/<task>_<index>_<mode>_<k>.fseq plus matching .txt label files.
void dump_replay(const std::filesystem::path& dir, std::span<const ReplayVideo> videos, const LabelSpace& space);

}  // namespace itas
