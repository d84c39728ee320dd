#include "itas/data/types.hpp"

#include <algorithm>

#include "itas/core/errors.hpp"

namespace itas {

void FeatureSequence::validate() const {
  if (frames() == 0 || dim() == 0) {
    fail(ErrorKind::kData, "feature sequence '" + source_id + "' has shape " + values.shape_string());
  }
  if (!values.all_finite()) fail(ErrorKind::kData, "feature sequence '" + source_id + "' has non-finite values");
}

SegmentLabeling SegmentLabeling::from_framewise(std::vector<ClassId> framewise) {
  SegmentLabeling out;
  for (std::size_t t = 0; t < framewise.size(); ++t) {
    if (framewise[t] < 0) fail(ErrorKind::kLabeling, "negative class id at frame " + std::to_string(t + 1));
    if (t == 0 || framewise[t] != framewise[t - 1]) {
      out.segments_.push_back({framewise[t], t, 1});
    } else {
      ++out.segments_.back().length;
    }
  }
  out.framewise_ = std::move(framewise);
  return out;
}

SegmentLabeling SegmentLabeling::from_segments(std::vector<Segment> segments) {
  SegmentLabeling out;
  std::size_t expected_start = 0;
  for (std::size_t n = 0; n < segments.size(); ++n) {
    const Segment& s = segments[n];
    if (s.length == 0) fail(ErrorKind::kLabeling, "segment " + std::to_string(n + 1) + " has zero length");
    if (s.start != expected_start) {
      fail(ErrorKind::kLabeling, "segment " + std::to_string(n + 1) + " starts at frame " +
                                     std::to_string(s.start + 1) + ", expected " +
                                     std::to_string(expected_start + 1));
    }
    if (s.action < 0) fail(ErrorKind::kLabeling, "segment " + std::to_string(n + 1) + " has negative class id");
    if (n > 0 && segments[n - 1].action == s.action) {
      fail(ErrorKind::kLabeling, "segments " + std::to_string(n) + " and " + std::to_string(n + 1) +
                                     " share action " + std::to_string(s.action));
    }
    expected_start += s.length;
  }
  out.framewise_.reserve(expected_start);
  for (const Segment& s : segments) out.framewise_.insert(out.framewise_.end(), s.length, s.action);
  out.segments_ = std::move(segments);
  return out;
}

void TaskDataset::validate() const {
  auto check = [&](const std::vector<LabeledVideo>& items, const char* split) {
    for (const LabeledVideo& item : items) {
      item.features.validate();
      if (item.labels.frames() != item.features.frames()) {
        fail(ErrorKind::kConsistency, std::string(split) + " item '" + item.features.source_id + "' has " +
                                          std::to_string(item.labels.frames()) + " labels for " +
                                          std::to_string(item.features.frames()) + " frames");
      }
      for (const Segment& s : item.labels.segments()) {
        if (!std::binary_search(classes.begin(), classes.end(), s.action)) {
          fail(ErrorKind::kLabeling, "class " + std::to_string(s.action) + " in '" + item.features.source_id +
                                         "' is outside task " + std::to_string(task) + "'s class set");
        }
      }
    }
  };
  check(train, "train");
  check(test, "test");
}

const char* to_string(LabelMode mode) { return mode == LabelMode::kDisjoint ? "disjoint" : "blurry"; }

LabelMode parse_label_mode(const std::string& text) {
  if (text == "disjoint") return LabelMode::kDisjoint;
  if (text == "blurry") return LabelMode::kBlurry;
  fail(ErrorKind::kConfig, "label mode must be 'disjoint' or 'blurry', got '" + text + "'");
}

ClassId LabelSpace::intern(int task, const std::string& name) {
  const auto key = std::make_pair(mode_ == LabelMode::kDisjoint ? task : 0, name);
  auto it = table_.find(key);
  if (it != table_.end()) return it->second;
  const ClassId id = static_cast<ClassId>(names_.size());
  table_.emplace(key, id);
  names_.push_back(name);
  owners_.push_back(task);
  return id;
}

std::optional<ClassId> LabelSpace::find(int task, const std::string& name) const {
  auto it = table_.find(std::make_pair(mode_ == LabelMode::kDisjoint ? task : 0, name));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

ClassId LabelSpace::id_of(int task, const std::string& name) const {
  auto id = find(task, name);
  if (!id) fail(ErrorKind::kLabeling, "unknown action '" + name + "' for task " + std::to_string(task));
  return *id;
}

const std::string& LabelSpace::name_of(ClassId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= names_.size()) {
    fail(ErrorKind::kLabeling, "class id " + std::to_string(id) + " outside label space of " +
                                   std::to_string(names_.size()));
  }
  return names_[static_cast<std::size_t>(id)];
}

int LabelSpace::owner_of(ClassId id) const {
  name_of(id);
  return owners_[static_cast<std::size_t>(id)];
}

}  // namespace itas
