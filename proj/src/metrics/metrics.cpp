#include "itas/metrics/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "itas/core/errors.hpp"

namespace itas {

double frame_accuracy(const SegmentLabeling& pred, const SegmentLabeling& gt) {
  if (pred.frames() != gt.frames()) {
    fail(ErrorKind::kConsistency, "prediction has " + std::to_string(pred.frames()) + " frames, ground truth " +
                                      std::to_string(gt.frames()));
  }
  if (gt.frames() == 0) return 100.0;
  std::size_t correct = 0;
  for (std::size_t t = 0; t < gt.frames(); ++t) correct += pred.framewise()[t] == gt.framewise()[t];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(gt.frames());
}

std::size_t levenshtein(std::span<const ClassId> a, std::span<const ClassId> b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

std::vector<ClassId> segment_string(const SegmentLabeling& labels) {
  std::vector<ClassId> out;
  for (const Segment& s : labels.segments()) out.push_back(s.action);
  return out;
}

SegmentMatch match_segments(std::span<const Segment> ps, std::span<const Segment> gs, double threshold) {
  SegmentMatch m;
  m.threshold = threshold;
  std::vector<bool> used(gs.size(), false);
  for (const Segment& p : ps) {
    double best_iou = -1.0;
    std::size_t best = gs.size();
    for (std::size_t g = 0; g < gs.size(); ++g) {
      if (used[g] || gs[g].action != p.action) continue;
      const std::size_t lo = std::max(p.start, gs[g].start);
      const std::size_t hi = std::min(p.start + p.length, gs[g].start + gs[g].length);
      const double inter = hi > lo ? static_cast<double>(hi - lo) : 0.0;
      const double uni = static_cast<double>(p.length + gs[g].length) - inter;
      const double iou = inter / uni;
      if (iou > best_iou) {
        best_iou = iou;
        best = g;
      }
    }
    if (best < gs.size() && best_iou >= threshold) {
      used[best] = true;
      ++m.tp;
    } else {
      ++m.fp;
    }
  }
  m.fn = static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
  return m;
}

double f1_from(const SegmentMatch& m) {
  const std::size_t denom = 2 * m.tp + m.fp + m.fn;
  if (denom == 0) return 100.0;
  return 100.0 * 2.0 * static_cast<double>(m.tp) / static_cast<double>(denom);
}

}  // namespace

double edit_score(const SegmentLabeling& pred, const SegmentLabeling& gt) {
  const std::vector<ClassId> p = segment_string(pred);
  const std::vector<ClassId> g = segment_string(gt);
  const std::size_t longest = std::max(p.size(), g.size());
  if (longest == 0) return 100.0;
  return 100.0 * (1.0 - static_cast<double>(levenshtein(p, g)) / static_cast<double>(longest));
}

std::pair<double, SegmentMatch> f1_at(std::span<const Segment> pred, std::span<const Segment> gt, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) fail(ErrorKind::kDomain, "overlap threshold must lie in (0, 1)");
  const SegmentMatch m = match_segments(pred, gt, threshold);
  return {f1_from(m), m};
}

std::pair<double, SegmentMatch> f1_at(const SegmentLabeling& pred, const SegmentLabeling& gt, double threshold) {
  return f1_at(pred.segments(), gt.segments(), threshold);
}

void TaskScorer::add(const SegmentLabeling& pred, const SegmentLabeling& gt) {
  if (pred.frames() != gt.frames()) {
    fail(ErrorKind::kConsistency, "prediction has " + std::to_string(pred.frames()) + " frames, ground truth " +
                                      std::to_string(gt.frames()));
  }
  ++videos_;
  frames_ += gt.frames();
  for (std::size_t t = 0; t < gt.frames(); ++t) correct_ += pred.framewise()[t] == gt.framewise()[t];
  edit_sum_ += edit_score(pred, gt);
  for (std::size_t k = 0; k < kOverlapThresholds.size(); ++k) {
    const SegmentMatch m = match_segments(pred.segments(), gt.segments(), kOverlapThresholds[k]);
    matches_[k].threshold = m.threshold;
    matches_[k].tp += m.tp;
    matches_[k].fp += m.fp;
    matches_[k].fn += m.fn;
  }
}

SegmentScores TaskScorer::scores() const {
  SegmentScores s;
  s.acc = frames_ == 0 ? 100.0 : 100.0 * static_cast<double>(correct_) / static_cast<double>(frames_);
  s.edit = videos_ == 0 ? 100.0 : edit_sum_ / static_cast<double>(videos_);
  for (std::size_t k = 0; k < matches_.size(); ++k) s.f1[k] = f1_from(matches_[k]);
  return s;
}

void ConfusionMatrix::accumulate(const SegmentLabeling& pred, const SegmentLabeling& gt) {
  if (pred.frames() != gt.frames()) {
    fail(ErrorKind::kConsistency, "confusion update with " + std::to_string(pred.frames()) + " vs " +
                                      std::to_string(gt.frames()) + " frames");
  }
  for (std::size_t t = 0; t < gt.frames(); ++t) {
    const ClassId g = gt.framewise()[t];
    const ClassId p = pred.framewise()[t];
    if (g < 0 || p < 0 || static_cast<std::size_t>(g) >= classes_ || static_cast<std::size_t>(p) >= classes_) {
      fail(ErrorKind::kLabeling, "class id outside confusion matrix of " + std::to_string(classes_) + " classes");
    }
    ++counts_[static_cast<std::size_t>(g) * classes_ + static_cast<std::size_t>(p)];
  }
}

std::size_t ConfusionMatrix::count(ClassId gt, ClassId pred) const {
  return counts_.at(static_cast<std::size_t>(gt) * classes_ + static_cast<std::size_t>(pred));
}

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (std::size_t v : counts_) sum += v;
  return sum;
}

std::size_t ConfusionMatrix::row_total(ClassId gt) const {
  std::size_t sum = 0;
  for (std::size_t p = 0; p < classes_; ++p) sum += counts_.at(static_cast<std::size_t>(gt) * classes_ + p);
  return sum;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t sum = 0;
  for (std::size_t c = 0; c < classes_; ++c) sum += counts_[c * classes_ + c];
  return sum;
}

std::vector<ConfusionMatrix::NormalizedRow> ConfusionMatrix::normalized() const {
  std::vector<NormalizedRow> rows(classes_);
  for (std::size_t g = 0; g < classes_; ++g) {
    const std::size_t total_g = row_total(static_cast<ClassId>(g));
    rows[g].values.assign(classes_, 0.0);
    if (total_g == 0) continue;
    rows[g].empty = false;
    for (std::size_t p = 0; p < classes_; ++p) {
      rows[g].values[p] = static_cast<double>(counts_[g * classes_ + p]) / static_cast<double>(total_g);
    }
  }
  return rows;
}

void ConfusionMatrix::write(std::ostream& out, const std::vector<std::string>& class_names) const {
  out << "gt\\pred";
  for (std::size_t c = 0; c < classes_; ++c) out << '\t' << (c < class_names.size() ? class_names[c] : std::to_string(c));
  out << '\n';
  const auto rows = normalized();
  char buffer[32];
  for (std::size_t g = 0; g < classes_; ++g) {
    out << (g < class_names.size() ? class_names[g] : std::to_string(g));
    for (std::size_t p = 0; p < classes_; ++p) {
      if (rows[g].empty) {
        out << "\t-";
      } else {
        std::snprintf(buffer, sizeof buffer, "%.4f", rows[g].values[p]);
        out << '\t' << buffer;
      }
    }
    out << '\n';
  }
}

std::string format_score(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", value);
  return buffer;
}

void MetricsReport::write_table(std::ostream& out) const {
  out << "task\tacc\tedit\tf1@10\tf1@25\tf1@50\n";
  auto row = [&](const std::string& label, const SegmentScores& s) {
    out << label << '\t' << format_score(s.acc) << '\t' << format_score(s.edit);
    for (double f : s.f1) out << '\t' << format_score(f);
    out << '\n';
  };
  for (const TaskReport& t : tasks) row(std::to_string(t.task), t.scores);
  row("aggregate", aggregate);
}

SegmentScores aggregate(std::span<const TaskReport> reports) {
  SegmentScores mean;
  if (reports.empty()) return mean;
  for (const TaskReport& r : reports) {
    mean.acc += r.scores.acc;
    mean.edit += r.scores.edit;
    for (std::size_t k = 0; k < mean.f1.size(); ++k) mean.f1[k] += r.scores.f1[k];
  }
  const double n = static_cast<double>(reports.size());
  mean.acc /= n;
  mean.edit /= n;
  for (double& f : mean.f1) f /= n;
  return mean;
}

}  // namespace itas
