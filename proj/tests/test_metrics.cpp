#include <gtest/gtest.h>

#include <sstream>

#include "itas/core/errors.hpp"
#include "itas/core/random.hpp"
#include "itas/metrics/metrics.hpp"

using namespace itas;

namespace {

SegmentLabeling labels(std::initializer_list<ClassId> frames) { return SegmentLabeling::from_framewise(frames); }

SegmentLabeling from_runs(std::initializer_list<std::pair<ClassId, std::size_t>> runs) {
  std::vector<Segment> segs;
  std::size_t start = 0;
  for (auto [a, len] : runs) {
    segs.push_back({a, start, len});
    start += len;
  }
  return SegmentLabeling::from_segments(segs);
}

SegmentLabeling random_labeling(RandomSource& rng, std::size_t classes, std::size_t max_segments) {
  std::vector<Segment> segs;
  std::size_t start = 0;
  ClassId prev = -1;
  const std::size_t n = 1 + rng.index(max_segments);
  for (std::size_t k = 0; k < n; ++k) {
    ClassId a;
    do {
      a = static_cast<ClassId>(rng.index(classes));
    } while (a == prev);
    const std::size_t len = 1 + rng.index(8);
    segs.push_back({a, start, len});
    start += len;
    prev = a;
  }
  return SegmentLabeling::from_segments(segs);
}

// Full-table Levenshtein, written independently of the library's version.
std::size_t dp_levenshtein(const std::vector<ClassId>& a, const std::vector<ClassId>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    }
  }
  return d[a.size()][b.size()];
}

std::vector<ClassId> segment_string(const SegmentLabeling& l) {
  std::vector<ClassId> s;
  for (const Segment& seg : l.segments()) s.push_back(seg.action);
  return s;
}

SegmentLabeling stretch(const SegmentLabeling& l, std::size_t factor) {
  std::vector<Segment> segs;
  std::size_t start = 0;
  for (const Segment& s : l.segments()) {
    segs.push_back({s.action, start, s.length * factor});
    start += s.length * factor;
  }
  return SegmentLabeling::from_segments(segs);
}

}  // namespace

TEST(Accuracy, Examples) {
  EXPECT_EQ(frame_accuracy(labels({0, 1, 1, 2}), labels({0, 1, 1, 2})), 100.0);
  EXPECT_EQ(frame_accuracy(labels({0, 0, 1, 1}), labels({1, 1, 0, 0})), 0.0);
  EXPECT_EQ(frame_accuracy(labels({0, 1, 1, 1}), labels({0, 1, 1, 2})), 75.0);
  try {
    frame_accuracy(labels({0, 1}), labels({0, 1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConsistency);
  }
}

TEST(Edit, Examples) {
  EXPECT_EQ(edit_score(from_runs({{0, 3}, {1, 2}}), from_runs({{0, 1}, {1, 9}})), 100.0);
  EXPECT_EQ(edit_score(from_runs({{0, 2}, {1, 2}, {2, 2}, {4, 2}}), from_runs({{0, 2}, {1, 2}, {2, 2}, {3, 2}})), 75.0);
  EXPECT_EQ(edit_score(labels({0, 0}), labels({1, 1})), 0.0);
  EXPECT_EQ(edit_score(SegmentLabeling(), SegmentLabeling()), 100.0);
}

TEST(Edit, MatchesDynamicProgrammingOracle) {
  RandomSource rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const SegmentLabeling a = random_labeling(rng, 5, 10);
    const SegmentLabeling b = random_labeling(rng, 5, 10);
    const auto sa = segment_string(a), sb = segment_string(b);
    const std::size_t dist = dp_levenshtein(sa, sb);
    EXPECT_EQ(levenshtein(sa, sb), dist);
    const double expected = 100.0 * (1.0 - static_cast<double>(dist) / static_cast<double>(std::max(sa.size(), sb.size())));
    EXPECT_EQ(edit_score(a, b), expected);
  }
}

TEST(Edit, DurationInvariant) {
  RandomSource rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const SegmentLabeling a = random_labeling(rng, 4, 8);
    const SegmentLabeling b = random_labeling(rng, 4, 8);
    EXPECT_EQ(edit_score(stretch(a, 3), stretch(b, 2)), edit_score(a, b));
  }
}

TEST(F1, IdenticalIsPerfect) {
  const SegmentLabeling l = from_runs({{0, 3}, {2, 4}, {1, 2}});
  for (double k : kOverlapThresholds) EXPECT_EQ(f1_at(l, l, k).first, 100.0);
  EXPECT_EQ(f1_at(SegmentLabeling(), SegmentLabeling(), 0.5).first, 100.0);
}

TEST(F1, IouThreeTenths) {
  // Predicted A covers frames [2, 10), ground-truth A covers [0, 5): overlap 3, union 10.
  const SegmentLabeling gt = from_runs({{0, 5}, {1, 5}});
  const SegmentLabeling pred = from_runs({{2, 2}, {0, 8}});
  const auto at10 = f1_at(pred, gt, 0.10).second;
  const auto at25 = f1_at(pred, gt, 0.25).second;
  const auto at50 = f1_at(pred, gt, 0.50).second;
  EXPECT_EQ(at10.tp, 1u);
  EXPECT_EQ(at25.tp, 1u);
  EXPECT_EQ(at50.tp, 0u);
  EXPECT_EQ(at50.fp, 2u);
  EXPECT_EQ(at50.fn, 2u);
  // Only the class-2 prediction and the class-1 ground truth are unmatched at 10%.
  EXPECT_EQ(at10.fp, 1u);
  EXPECT_EQ(at10.fn, 1u);
  EXPECT_NEAR(f1_at(pred, gt, 0.10).first, 100.0 * 2.0 / 4.0, 1e-12);
}

TEST(F1, OverSegmentationCannotReuseGroundTruth) {
  const std::vector<Segment> gt = {{0, 0, 10}};
  const std::vector<Segment> pred = {{0, 0, 5}, {0, 5, 5}};
  const auto r = f1_at(pred, gt, 0.25);
  EXPECT_EQ(r.second.tp, 1u);
  EXPECT_EQ(r.second.fp, 1u);
  EXPECT_EQ(r.second.fn, 0u);
  EXPECT_NEAR(r.first, 200.0 / 3.0, 1e-12);
  EXPECT_EQ(format_score(r.first), "66.67");
}

TEST(F1, ThresholdOutsideUnitIntervalIsDomainError) {
  const SegmentLabeling l = labels({0, 1});
  EXPECT_THROW(f1_at(l, l, 0.0), Error);
  EXPECT_THROW(f1_at(l, l, 1.0), Error);
}

TEST(F1, CountsInvariantsAndMonotonicity) {
  RandomSource rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const SegmentLabeling gt = random_labeling(rng, 4, 8);
    const SegmentLabeling pred = random_labeling(rng, 4, 8);
    double prev = 101.0;
    for (double k : kOverlapThresholds) {
      const auto [f1, m] = f1_at(pred, gt, k);
      EXPECT_EQ(m.tp + m.fn, gt.segments().size());
      EXPECT_EQ(m.tp + m.fp, pred.segments().size());
      EXPECT_GE(f1, 0.0);
      EXPECT_LE(f1, prev);
      prev = f1;
    }
  }
}

TEST(TaskScorer, PoolsFramesAndCounts) {
  TaskScorer scorer;
  scorer.add(labels({0, 0, 1, 1}), labels({0, 0, 1, 1}));
  scorer.add(labels({0, 0}), labels({1, 1}));
  const SegmentScores s = scorer.scores();
  EXPECT_EQ(scorer.videos(), 2u);
  EXPECT_NEAR(s.acc, 100.0 * 4.0 / 6.0, 1e-12);
  EXPECT_NEAR(s.edit, 50.0, 1e-12);
  // tp 2, fp 1, fn 1.
  for (double f : s.f1) EXPECT_NEAR(f, 100.0 * 4.0 / 6.0, 1e-12);
}

TEST(Aggregate, UnweightedMean) {
  TaskReport a{0, {100.0, 80.0, {90.0, 80.0, 70.0}}};
  TaskReport b{1, {0.0, 40.0, {10.0, 20.0, 30.0}}};
  const std::vector<TaskReport> ab = {a, b};
  const std::vector<TaskReport> ba = {b, a};
  const SegmentScores m = aggregate(ab);
  EXPECT_EQ(m.acc, 50.0);
  EXPECT_EQ(m.edit, 60.0);
  EXPECT_EQ(m.f1, (std::array<double, 3>{50.0, 50.0, 50.0}));
  const SegmentScores m2 = aggregate(ba);
  EXPECT_EQ(m2.acc, m.acc);
  EXPECT_EQ(m2.f1, m.f1);
  const std::vector<TaskReport> same = {a, a, a};
  EXPECT_EQ(aggregate(same).acc, 100.0);
  EXPECT_EQ(aggregate(same).f1, a.scores.f1);
}

TEST(Confusion, CountsAndNormalization) {
  ConfusionMatrix cm(3);
  cm.accumulate(labels({0, 0, 1, 1, 1}), labels({0, 0, 1, 1, 1}));
  EXPECT_EQ(cm.trace(), cm.total());
  for (ClassId i = 0; i < 3; ++i) {
    for (ClassId j = 0; j < 3; ++j) {
      if (i != j) EXPECT_EQ(cm.count(i, j), 0u);
    }
  }
  cm.accumulate(labels({1, 1, 0}), labels({0, 0, 0}));
  EXPECT_EQ(cm.total(), 8u);
  EXPECT_EQ(cm.row_total(0), 5u);
  EXPECT_EQ(cm.count(0, 1), 2u);
  const auto rows = cm.normalized();
  EXPECT_FALSE(rows[0].empty);
  EXPECT_NEAR(rows[0].values[0] + rows[0].values[1] + rows[0].values[2], 1.0, 1e-12);
  EXPECT_TRUE(rows[2].empty);
  std::ostringstream out;
  cm.write(out, {"a", "b", "c"});
  EXPECT_NE(out.str().find("-"), std::string::npos);
}

TEST(Confusion, TraceOverTotalIsAccuracy) {
  RandomSource rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const SegmentLabeling gt = random_labeling(rng, 4, 6);
    std::vector<ClassId> p(gt.frames());
    for (ClassId& c : p) c = static_cast<ClassId>(rng.index(4));
    const SegmentLabeling pred = SegmentLabeling::from_framewise(p);
    ConfusionMatrix cm(4);
    cm.accumulate(pred, gt);
    EXPECT_EQ(cm.total(), gt.frames());
    for (ClassId c = 0; c < 4; ++c) {
      std::size_t n = 0;
      for (ClassId f : gt.framewise()) n += f == c;
      EXPECT_EQ(cm.row_total(c), n);
    }
    EXPECT_NEAR(100.0 * static_cast<double>(cm.trace()) / static_cast<double>(cm.total()), frame_accuracy(pred, gt),
                1e-12);
  }
}

TEST(Report, TableHasTaskRowsThenAggregate) {
  MetricsReport report;
  report.tasks = {{0, {100.0, 100.0, {100.0, 100.0, 100.0}}}, {1, {50.0, 25.0, {10.0, 5.0, 0.0}}}};
  report.aggregate = aggregate(report.tasks);
  std::ostringstream out;
  report.write_table(out);
  EXPECT_EQ(out.str(),
            "task\tacc\tedit\tf1@10\tf1@25\tf1@50\n"
            "0\t100.00\t100.00\t100.00\t100.00\t100.00\n"
            "1\t50.00\t25.00\t10.00\t5.00\t0.00\n"
            "aggregate\t75.00\t62.50\t55.00\t52.50\t50.00\n");
}
