#pragma once

#include <array>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "itas/data/types.hpp"

namespace itas {

inline constexpr std::array<double, 3> kOverlapThresholds = {0.10, 0.25, 0.50};

struct SegmentScores {
  double acc = 0.0;
  double edit = 0.0;
  std::array<double, 3> f1 = {0.0, 0.0, 0.0};  // at 10%, 25%, 50% overlap
};

struct SegmentMatch {
  double threshold = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

// 100 * matching frames / T. Length mismatch is a consistency error.
double frame_accuracy(const SegmentLabeling& pred, const SegmentLabeling& gt);

// Unit-cost Levenshtein distance between two label strings.
std::size_t levenshtein(std::span<const ClassId> a, std::span<const ClassId> b);

// 100 * (1 - distance / max segment count) over segment label sequences.
double edit_score(const SegmentLabeling& pred, const SegmentLabeling& gt);

// Greedy in-order matching: each predicted segment takes the unmatched
// same-class ground-truth segment of highest IoU, and counts as a hit when
// IoU >= threshold.
std::pair<double, SegmentMatch> f1_at(const SegmentLabeling& pred, const SegmentLabeling& gt, double threshold);
// Same matching over raw segment lists, which may hold adjacent segments of
// one class (over-segmented output).
std::pair<double, SegmentMatch> f1_at(std::span<const Segment> pred, std::span<const Segment> gt, double threshold);

// Scores over the videos of one task: Acc pools frames, Edit is the per-video
// mean, F1 pools tp/fp/fn counts.
class TaskScorer {
 public:
  void add(const SegmentLabeling& pred, const SegmentLabeling& gt);
  SegmentScores scores() const;
  std::size_t videos() const noexcept { return videos_; }

 private:
  std::size_t videos_ = 0;
  std::size_t frames_ = 0;
  std::size_t correct_ = 0;
  double edit_sum_ = 0.0;
  std::array<SegmentMatch, 3> matches_{};
};

struct TaskReport {
  int task = 0;
  SegmentScores scores;
};

// Row = ground truth class, column = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 0) : classes_(classes), counts_(classes * classes, 0) {}

  void accumulate(const SegmentLabeling& pred, const SegmentLabeling& gt);
  std::size_t classes() const noexcept { return classes_; }
  std::size_t count(ClassId gt, ClassId pred) const;
  std::size_t total() const;
  std::size_t row_total(ClassId gt) const;
  std::size_t trace() const;

  // Row-normalized values; rows without instances are reported empty.
  struct NormalizedRow {
    bool empty = true;
    std::vector<double> values;
  };
  std::vector<NormalizedRow> normalized() const;

  // Header line of class names, then one line per ground-truth class with its
  // row-normalized values, or "-" entries for rows without instances.
  void write(std::ostream& out, const std::vector<std::string>& class_names) const;

 private:
  std::size_t classes_;
  std::vector<std::size_t> counts_;
};

struct MetricsReport {
  std::vector<TaskReport> tasks;
  SegmentScores aggregate;
  ConfusionMatrix confusion;

  // Tab-separated: header, one row per task, then an "aggregate" row.
  void write_table(std::ostream& out) const;
};

// Unweighted mean over task reports.
SegmentScores aggregate(std::span<const TaskReport> reports);

std::string format_score(double value);

}  // namespace itas
