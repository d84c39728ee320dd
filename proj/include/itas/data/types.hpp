#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "itas/core/matrix.hpp"

namespace itas {

using ClassId = int;

// T x D frame features of one video.
struct FeatureSequence {
  Matrix values;
  std::string source_id;
  double frame_rate = 15.0;

  std::size_t frames() const noexcept { return values.rows(); }
  std::size_t dim() const noexcept { return values.cols(); }

  // T >= 1, D >= 1 and every value finite.
  void validate() const;
};

// One action segment. `start` is 0-based inside the library; files and
// user-facing tables use 1-based frame indices.
struct Segment {
  ClassId action = 0;
  std::size_t start = 0;
  std::size_t length = 0;

  bool operator==(const Segment&) const = default;
};

// Ordered segments and the equivalent frame-wise label vector. Construction
// enforces the segment chain: the first segment starts at frame 0, each next
// start equals previous start + length, lengths are positive, and adjacent
// segments carry different actions.
class SegmentLabeling {
 public:
  SegmentLabeling() = default;

  static SegmentLabeling from_framewise(std::vector<ClassId> framewise);
  static SegmentLabeling from_segments(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  const std::vector<ClassId>& framewise() const noexcept { return framewise_; }
  std::size_t frames() const noexcept { return framewise_.size(); }
  bool empty() const noexcept { return framewise_.empty(); }

  // Applies `map` to every class id; merges neighbours that become equal.
  template <typename Fn>
  SegmentLabeling remapped(Fn&& map) const {
    std::vector<ClassId> relabeled = framewise_;
    for (ClassId& c : relabeled) c = map(c);
    return from_framewise(std::move(relabeled));
  }

  bool operator==(const SegmentLabeling& other) const { return framewise_ == other.framewise_; }

 private:
  std::vector<Segment> segments_;
  std::vector<ClassId> framewise_;
};

struct LabeledVideo {
  FeatureSequence features;
  SegmentLabeling labels;
};

struct TaskDataset {
  int task = 0;
  std::vector<ClassId> classes;  // sorted, unique
  std::vector<LabeledVideo> train;
  std::vector<LabeledVideo> test;

  // Every label belongs to `classes` and labels match feature lengths.
  void validate() const;
};

enum class LabelMode { kDisjoint, kBlurry };

const char* to_string(LabelMode mode);
LabelMode parse_label_mode(const std::string& text);

// Global class table. Disjoint mode gives every (task, name) pair its own id;
// blurry mode gives every distinct name one id shared by all tasks.
class LabelSpace {
 public:
  explicit LabelSpace(LabelMode mode = LabelMode::kDisjoint) : mode_(mode) {}

  LabelMode mode() const noexcept { return mode_; }
  std::size_t num_classes() const noexcept { return names_.size(); }

  // Returns the id for (task, name), allocating the next dense id if new.
  ClassId intern(int task, const std::string& name);
  std::optional<ClassId> find(int task, const std::string& name) const;
  // Throws a labeling error for unknown names.
  ClassId id_of(int task, const std::string& name) const;
  const std::string& name_of(ClassId id) const;
  // Task that first introduced the id.
  int owner_of(ClassId id) const;

  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  LabelMode mode_;
  std::map<std::pair<int, std::string>, ClassId> table_;
  std::vector<std::string> names_;
  std::vector<int> owners_;
};

}  // namespace itas
