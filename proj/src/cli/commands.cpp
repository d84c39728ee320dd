#include "itas/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "itas/core/checkpoint.hpp"
#include "itas/core/errors.hpp"
#include "itas/core/layers.hpp"
#include "itas/data/synthetic.hpp"
#include "itas/replay/replay.hpp"

namespace fs = std::filesystem;

namespace itas {

namespace {

void write_text(const fs::path& path, const std::string& text) { write_file_bytes(path, text); }

std::string fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
  return buffer;
}

std::uint64_t corpus_seed(const Config& config) {
  return config.get("data.seed").empty() ? config.get_u64("run.seed") : config.get_u64("data.seed");
}

std::optional<fs::path> optional_path(const Config& config, const std::string& key) {
  const std::string& v = config.get(key);
  if (v.empty()) return std::nullopt;
  return fs::path(v);
}

}  // namespace

fs::path resolve_output_dir(const Config& config, const std::optional<fs::path>& out_flag,
                            const std::string& default_name) {
  if (out_flag) return *out_flag;
  if (!config.get("output.dir").empty()) return config.get("output.dir");
  if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') {
    return fs::path(root) / default_name;
  }
  return fs::path("runs") / default_name;
}

void prepare_output_dir(const fs::path& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) fail(ErrorKind::kIo, dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir, ec)) {
      if (!force) fail(ErrorKind::kIo, dir.string() + " already exists; pass --force to overwrite");
      fs::remove_all(dir, ec);
      if (ec) fail(ErrorKind::kIo, "cannot clear " + dir.string() + ": " + ec.message());
    }
  }
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

LoadedDataset load_config_dataset(const Config& config) {
  const LabelMode mode = parse_label_mode(config.get("run.label_mode"));
  const std::string& source = config.get("data.source");
  if (source == "synthetic") {
    const SyntheticSpec spec = synthetic_spec_from(config);
    SyntheticCorpus corpus = make_synthetic_corpus(spec, RandomSource(corpus_seed(config)).substream("corpus"));
    if (mode == LabelMode::kBlurry) {
      auto [tasks, space] = split_blurry(corpus.tasks, corpus.space);
      return {std::move(tasks), std::move(space)};
    }
    return {std::move(corpus.tasks), std::move(corpus.space)};
  }
  if (source == "manifest") {
    const auto train = optional_path(config, "data.train_manifest");
    if (!train) fail(ErrorKind::kConfig, "data.source = manifest needs data.train_manifest");
    return load_dataset(*train, optional_path(config, "data.test_manifest"), optional_path(config, "data.mapping"),
                        mode, corpus_seed(config));
  }
  fail(ErrorKind::kConfig, "data.source must be synthetic or manifest, got '" + source + "'");
}

void cmd_synth(const Config& config, const fs::path& out, bool force, std::ostream& log) {
  const LoadedDataset data = load_config_dataset(config);
  prepare_output_dir(out, force);
  write_dataset(out, data.tasks, data.space);
  write_text(out / "config.txt", config.to_text());
  log << "wrote " << data.tasks.size() << " tasks, " << data.space.num_classes() << " classes to " << out.string()
      << '\n';
}

RunResult cmd_run(const Config& config, const fs::path& out, bool force, std::ostream& log) {
  const IncrementalRun run_config = run_config_from(config);
  const LoadedDataset data = load_config_dataset(config);
  prepare_output_dir(out, force);
  write_text(out / "config.txt", config.to_text());
  write_mapping(out / "classes.txt", data.space.names());
  for (const char* sub : {"confusion", "checkpoints", "pools"}) fs::create_directories(out / sub);

  std::string losses = "stage\tcomponent\tepoch\tloss\n";
  const StageObserver observer = [&](const StageArtifacts& a) {
    const std::string k = std::to_string(a.snapshot.stage);
    std::ostringstream confusion;
    a.snapshot.confusion.write(confusion, data.space.names());
    write_text(out / "confusion" / ("stage_" + k + ".tsv"), confusion.str());
    a.model.to_checkpoint().save(out / "checkpoints" / ("seg_stage_" + k + ".ckpt"));
    if (a.decoder != nullptr) {
      a.decoder->to_checkpoint().save(out / "checkpoints" / ("tca_task_" + std::to_string(a.snapshot.task) + ".ckpt"));
    }
    if (a.pool != nullptr) save_pool(out / "pools" / ("task_" + std::to_string(a.snapshot.task) + ".txt"), *a.pool);
    for (std::size_t e = 0; e < a.snapshot.seg_epoch_losses.size(); ++e) {
      losses += k + "\tseg\t" + std::to_string(e + 1) + "\t" + fixed(a.snapshot.seg_epoch_losses[e], 6) + "\n";
    }
    for (std::size_t e = 0; e < a.snapshot.tca_epoch_losses.size(); ++e) {
      losses += k + "\ttca\t" + std::to_string(e + 1) + "\t" + fixed(a.snapshot.tca_epoch_losses[e], 6) + "\n";
    }
    log << "stage " << k << " (task " << a.snapshot.task << ", " << a.snapshot.replay_videos
        << " replay videos): acc " << format_score(a.snapshot.aggregate.acc) << '\n';
  };

  RunResult result = run(run_config, data.tasks, data.space.num_classes(), observer);

  std::ostringstream history;
  result.history.write(history);
  write_text(out / "history.tsv", history.str());
  write_text(out / "losses.tsv", losses);
  std::string access = "stage\ttask\tsplit\tviolation\n";
  for (const auto& e : result.access_log) {
    access += std::to_string(e.stage) + "\t" + std::to_string(e.task) + "\t" + (e.train ? "train" : "test") + "\t" +
              (e.violation ? "yes" : "no") + "\n";
  }
  write_text(out / "access.tsv", access);
  if (result.access_violations != 0) {
    fail(ErrorKind::kConsistency, std::to_string(result.access_violations) + " reads of sealed task data");
  }
  return result;
}

namespace {

double parse_ratio(const std::string& text) {
  std::string body = text;
  const bool percent = !body.empty() && body.back() == '%';
  if (percent) body.pop_back();
  char* end = nullptr;
  const double v = std::strtod(body.c_str(), &end);
  if (body.empty() || *end != '\0') fail(ErrorKind::kConfig, "bad ratio '" + text + "'");
  return (percent || v > 1.0) ? v / 100.0 : v;
}

}  // namespace

void cmd_sweep(const Config& config, const fs::path& out, bool force, std::ostream& log) {
  const std::string axis = config.get("sweep.axis");
  if (axis != "M" && axis != "ratio" && axis != "seed") {
    fail(ErrorKind::kConfig, "sweep.axis must be M, ratio or seed, got '" + axis + "'");
  }
  const std::vector<std::string> values = config.get_list("sweep.values");
  if (values.size() < 2) fail(ErrorKind::kConfig, "sweep.values needs at least two entries");

  prepare_output_dir(out, force);
  write_text(out / "config.txt", config.to_text());
  const std::string fixed_corpus_seed = std::to_string(corpus_seed(config));
  std::vector<int> task_ids;
  if (axis == "seed") {
    for (const TaskDataset& t : load_config_dataset(config).tasks) task_ids.push_back(t.task);
  }

  std::string summary = "axis\tvalue\tacc\tedit\tf1@10\tf1@25\tf1@50\n";
  std::vector<std::vector<double>> stage_acc;
  for (const std::string& value : values) {
    Config child = config;
    child.set("output.dir", "");
    if (axis == "M") {
      child.set("run.replay_budget", value);
    } else if (axis == "ratio") {
      child.set("tca.ratio", fixed(parse_ratio(value), 6));
    } else {
      child.set("run.seed", value);
      child.set("data.seed", fixed_corpus_seed);
      std::vector<int> order = task_ids;
      RandomSource(child.get_u64("run.seed")).substream("order").shuffle(order);
      std::string joined;
      for (std::size_t i = 0; i < order.size(); ++i) joined += (i ? "," : "") + std::to_string(order[i]);
      child.set("run.task_order", joined);
    }
    log << "sweep " << axis << " = " << value << '\n';
    const RunResult result = cmd_run(child, out / (axis + "_" + value), force, log);
    const SegmentScores& s = result.history.final_stage().aggregate;
    summary += axis + "\t" + value + "\t" + format_score(s.acc) + "\t" + format_score(s.edit);
    for (double f : s.f1) summary += "\t" + format_score(f);
    summary += "\n";
    std::vector<double> accs;
    for (const StageSnapshot& snap : result.history.stages) accs.push_back(snap.aggregate.acc);
    stage_acc.push_back(std::move(accs));
  }
  write_text(out / "summary.tsv", summary);

  if (axis == "seed") {
    std::string curves = "stage\tmean_acc\tstd_acc\n";
    const std::size_t stages = stage_acc.front().size();
    for (std::size_t k = 0; k < stages; ++k) {
      double mean = 0.0;
      for (const auto& row : stage_acc) mean += row[k];
      mean /= static_cast<double>(stage_acc.size());
      double var = 0.0;
      for (const auto& row : stage_acc) var += (row[k] - mean) * (row[k] - mean);
      var /= static_cast<double>(stage_acc.size() - 1);
      curves += std::to_string(k + 1) + "\t" + format_score(mean) + "\t" + format_score(std::sqrt(var)) + "\n";
    }
    write_text(out / "curves.tsv", curves);
  }
}

namespace {

// Relative path -> task id for every .txt file in the evaluation layout.
std::map<fs::path, int> list_label_files(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) fail(ErrorKind::kIo, root.string() + " is not a directory");
  std::map<fs::path, int> files;
  for (const fs::directory_entry& entry : fs::directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files[entry.path().filename()] = 0;
    } else if (entry.is_directory()) {
      const std::string name = entry.path().filename().string();
      char* end = nullptr;
      const long task = std::strtol(name.c_str(), &end, 10);
      if (name.empty() || *end != '\0') continue;
      for (const fs::directory_entry& inner : fs::directory_iterator(entry.path())) {
        if (inner.is_regular_file() && inner.path().extension() == ".txt") {
          files[fs::path(name) / inner.path().filename()] = static_cast<int>(task);
        }
      }
    }
  }
  return files;
}

}  // namespace

MetricsReport cmd_eval(const fs::path& pred_dir, const fs::path& gt_dir, const fs::path& mapping, std::ostream& out) {
  const std::vector<std::string> names = read_mapping(mapping);
  LabelSpace space(LabelMode::kBlurry);
  for (const std::string& n : names) space.intern(0, n);

  const std::map<fs::path, int> gt_files = list_label_files(gt_dir);
  const std::map<fs::path, int> pred_files = list_label_files(pred_dir);
  if (gt_files.empty()) fail(ErrorKind::kData, gt_dir.string() + " holds no label files");
  for (const auto& [rel, task] : gt_files) {
    if (pred_files.count(rel) == 0) fail(ErrorKind::kPairing, "no prediction for " + (gt_dir / rel).string());
  }
  for (const auto& [rel, task] : pred_files) {
    if (gt_files.count(rel) == 0) fail(ErrorKind::kPairing, "no ground truth for " + (pred_dir / rel).string());
  }

  std::map<int, TaskScorer> scorers;
  MetricsReport report;
  report.confusion = ConfusionMatrix(space.num_classes());
  for (const auto& [rel, task] : gt_files) {
    const SegmentLabeling gt = load_labels(gt_dir / rel, space, 0);
    const SegmentLabeling pred = load_labels(pred_dir / rel, space, 0, gt.frames());
    scorers[task].add(pred, gt);
    report.confusion.accumulate(pred, gt);
  }
  for (const auto& [task, scorer] : scorers) report.tasks.push_back({task, scorer.scores()});
  report.aggregate = aggregate(report.tasks);
  report.write_table(out);
  return report;
}

GradCheckComponent parse_gradcheck_component(const std::string& text) {
  if (text == "seg") return GradCheckComponent::kSeg;
  if (text == "tca") return GradCheckComponent::kTca;
  fail(ErrorKind::kConfig, "gradcheck component must be seg or tca, got '" + text + "'");
}

namespace {

Matrix normal_matrix(std::size_t rows, std::size_t cols, RandomSource& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

void corrupt(std::vector<ParamSlot>& params) {
  for (double& g : params.back().grad) g = 1.5 * g + 1e-3;
}

GradCheckReport gradcheck_seg(std::uint64_t seed, bool corrupt_backward) {
  constexpr std::size_t kFrames = 20;
  constexpr std::size_t kClasses = 3;
  constexpr std::size_t kDim = 8;
  RandomSource rng(seed);
  SegModel model(SegModelConfig{kDim, 6, 3}, rng);
  const std::vector<ClassId> classes = {0, 1, 2};
  model.expand_head(classes, LabelMode::kDisjoint, rng);
  // A zero-initialised head would leave most coordinates at exactly zero
  // gradient; give it random weights instead.
  for (double& w : model.head().weights.values()) w = 0.5 * rng.normal();
  const Matrix input = normal_matrix(kFrames, kDim, rng);
  std::vector<int> targets(kFrames);
  for (int& t : targets) t = static_cast<int>(rng.index(kClasses));
  const TasLossConfig loss_config;

  // The smoothing term stops gradient through the previous frame; freezing
  // the previous-frame log-probabilities at the base point gives a function
  // whose true gradient is exactly that detached gradient.
  const Matrix frozen = log_softmax_rows(model.forward_trace(input).logits);

  GradCheckProblem problem;
  problem.evaluate = [&]() {
    const SegModel::Trace trace = model.forward_trace(input);
    const TasLossResult r =
        tas_loss_with_grad(trace.logits, targets, loss_config, SmoothingGradient::kDetachPrevious, &frozen);
    return LossEvaluation{r.total, splitmix64(SegModel::relu_signature(trace)) ^ r.clamp_signature};
  };
  problem.compute_gradients = [&]() {
    model.zero_grad();
    const SegModel::Trace trace = model.forward_trace(input);
    const TasLossResult r =
        tas_loss_with_grad(trace.logits, targets, loss_config, SmoothingGradient::kDetachPrevious, &frozen);
    model.backward(trace, r.grad_logits);
    if (corrupt_backward) corrupt(problem.params);
  };
  problem.params = model.parameters();
  return gradcheck(problem);
}

GradCheckReport gradcheck_tca(std::uint64_t seed, bool corrupt_backward) {
  constexpr std::size_t kDim = 8;
  constexpr std::size_t kLatent = 4;
  constexpr std::size_t kBatch = 6;
  RandomSource rng(seed);
  TcaModel model(TcaConfig{kDim, kLatent, 8}, {0, 1, 2}, rng);
  TcaBatch batch;
  batch.features = normal_matrix(kBatch, kDim, rng);
  for (std::size_t i = 0; i < kBatch; ++i) {
    batch.slots.push_back(rng.index(3));
    batch.coherence.push_back(rng.uniform());
  }
  const std::uint64_t noise_seed = rng.next_u64();
  constexpr double kBeta = 1.0;

  GradCheckProblem problem;
  problem.evaluate = [&]() {
    TcaModel probe = model;  // evaluation must leave the analytic gradients alone
    RandomSource noise(noise_seed);
    std::uint64_t signature = 0;
    const TcaLoss l = probe.loss_and_grad(batch, noise, kBeta, &signature);
    return LossEvaluation{l.total, signature};
  };
  problem.compute_gradients = [&]() {
    model.zero_grad();
    RandomSource noise(noise_seed);
    model.loss_and_grad(batch, noise, kBeta);
    if (corrupt_backward) corrupt(problem.params);
  };
  problem.params = model.parameters();
  return gradcheck(problem);
}

}  // namespace

GradCheckReport run_gradcheck(GradCheckComponent component, std::uint64_t seed, bool corrupt_backward) {
  return component == GradCheckComponent::kSeg ? gradcheck_seg(seed, corrupt_backward)
                                               : gradcheck_tca(seed, corrupt_backward);
}

fs::path cmd_dump_replay(const Config& config, const fs::path& run_dir, const fs::path& out, bool force,
                         std::ostream& log) {
  const ReplayMode mode = parse_replay_mode(config.get("run.replay_mode"));
  const std::size_t budget = config.get_size("run.replay_budget");
  const std::uint64_t seed = config.get_u64("run.seed");

  const std::vector<std::string> names = read_mapping(run_dir / "classes.txt");
  LabelSpace space(LabelMode::kDisjoint);
  for (std::size_t i = 0; i < names.size(); ++i) space.intern(static_cast<int>(i), names[i]);

  std::error_code ec;
  if (!fs::is_directory(run_dir / "pools", ec)) fail(ErrorKind::kCache, run_dir.string() + " has no sequence pools");
  std::map<int, fs::path> pool_files;
  for (const fs::directory_entry& entry : fs::directory_iterator(run_dir / "pools")) {
    const std::string stem = entry.path().stem().string();
    if (stem.rfind("task_", 0) != 0) continue;
    pool_files[std::atoi(stem.c_str() + 5)] = entry.path();
  }
  if (pool_files.empty()) fail(ErrorKind::kCache, run_dir.string() + " has no sequence pools");

  DecoderCache decoders;
  std::vector<SequencePool> pools;
  for (const auto& [task, path] : pool_files) {
    pools.push_back(load_pool(path, task));
    const fs::path ckpt = run_dir / "checkpoints" / ("tca_task_" + std::to_string(task) + ".ckpt");
    if (!fs::exists(ckpt, ec)) fail(ErrorKind::kCache, "missing decoder checkpoint " + ckpt.string());
    decoders.emplace(task, TcaModel::from_checkpoint(Checkpoint::load(ckpt)));
  }

  const std::vector<ReplayVideo> videos =
      build_replay_set(decoders, pools, budget, mode, RandomSource(seed).substream("replay").substream("dump", 0));
  const fs::path target =
      out / (std::string(to_string(mode)) + "_M" + std::to_string(budget) + "_seed" + std::to_string(seed));
  prepare_output_dir(target, force);
  dump_replay(target, videos, space);
  log << "wrote " << videos.size() << " replay videos to " << target.string() << '\n';
  return target;
}

}  // namespace itas
