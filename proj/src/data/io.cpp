#include "itas/data/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "itas/core/checkpoint.hpp"
#include "itas/core/errors.hpp"
#include "itas/core/random.hpp"

namespace fs = std::filesystem;

namespace itas {

std::string encode_features(const FeatureSequence& seq) {
  ByteWriter w;
  w.raw("FSQ1", 4);
  w.u32(static_cast<std::uint32_t>(seq.frames()));
  w.u32(static_cast<std::uint32_t>(seq.dim()));
  for (double v : seq.values.values()) w.f32(static_cast<float>(v));
  return w.bytes();
}

FeatureSequence decode_features(const std::string& bytes, const std::string& source) {
  ByteReader r(bytes, source);
  r.expect_magic("FSQ1");
  const std::uint32_t frames = r.u32();
  const std::uint32_t dim = r.u32();
  if (frames == 0 || dim == 0) {
    fail(ErrorKind::kFormat, source + ": empty shape " + std::to_string(frames) + "x" + std::to_string(dim) +
                                 " at byte offset 4");
  }
  const std::size_t count = static_cast<std::size_t>(frames) * dim;
  if ((bytes.size() - r.offset()) / 4 < count) {
    fail(ErrorKind::kFormat, source + ": truncated payload at byte offset " + std::to_string(bytes.size()) +
                                 ", expected " + std::to_string(12 + count * 4) + " bytes");
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t offset = r.offset();
    const float v = r.f32();
    if (!std::isfinite(v)) {
      fail(ErrorKind::kFormat, source + ": non-finite value at byte offset " + std::to_string(offset));
    }
    data[i] = v;
  }
  if (!r.at_end()) fail(ErrorKind::kFormat, source + ": trailing bytes at byte offset " + std::to_string(r.offset()));
  FeatureSequence seq;
  seq.values = Matrix(frames, dim, std::move(data));
  seq.source_id = source;
  return seq;
}

FeatureSequence load_features(const fs::path& path) {
  FeatureSequence seq = decode_features(read_file_bytes(path), path.string());
  seq.source_id = path.stem().string();
  return seq;
}

void save_features(const fs::path& path, const FeatureSequence& seq) { write_file_bytes(path, encode_features(seq)); }

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::ifstream open_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream create_text(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<std::string> read_label_tokens(const fs::path& path) {
  std::ifstream in = open_text(path);
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string token = trim(line);
    if (token.empty() || token.find_first_of(" \t") != std::string::npos) {
      fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) +
                                   ": expected exactly one action token, got '" + line + "'");
    }
    tokens.push_back(std::move(token));
  }
  return tokens;
}

SegmentLabeling load_labels(const fs::path& path, const LabelSpace& space, int task,
                            std::optional<std::size_t> expected_frames) {
  const std::vector<std::string> tokens = read_label_tokens(path);
  if (expected_frames && tokens.size() != *expected_frames) {
    fail(ErrorKind::kConsistency, path.string() + " has " + std::to_string(tokens.size()) + " lines but the features have " +
                                      std::to_string(*expected_frames) + " frames");
  }
  std::vector<ClassId> framewise;
  framewise.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    auto id = space.find(task, tokens[t]);
    if (!id) {
      fail(ErrorKind::kLabeling, path.string() + ":" + std::to_string(t + 1) + ": unknown action '" + tokens[t] + "'");
    }
    framewise.push_back(*id);
  }
  return SegmentLabeling::from_framewise(std::move(framewise));
}

void save_labels(const fs::path& path, const SegmentLabeling& labels, const LabelSpace& space) {
  std::ofstream out = create_text(path);
  for (ClassId c : labels.framewise()) out << space.name_of(c) << '\n';
}

std::vector<std::string> read_mapping(const fs::path& path) {
  std::ifstream in = open_text(path);
  std::vector<std::string> names;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    long long id = -1;
    std::string name;
    if (!(fields >> id >> name) || id != static_cast<long long>(names.size())) {
      fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) +
                                   ": expected '<id> <name>' with dense id " + std::to_string(names.size()));
    }
    names.push_back(name);
  }
  return names;
}

void write_mapping(const fs::path& path, const std::vector<std::string>& names) {
  std::ofstream out = create_text(path);
  for (std::size_t i = 0; i < names.size(); ++i) out << i << ' ' << names[i] << '\n';
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in = open_text(path);
  const fs::path base = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string keyword;
    std::string task_token;
    std::string features;
    std::string labels;
    fields >> keyword >> task_token >> features >> labels;
    std::string rest;
    if (keyword != "task" || task_token.size() < 2 || task_token.back() != ':' || labels.empty() || (fields >> rest)) {
      fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) +
                                   ": expected 'task <b>: <feature path> <label path>'");
    }
    ManifestEntry entry;
    try {
      std::size_t used = 0;
      entry.task = std::stoi(task_token.substr(0, task_token.size() - 1), &used);
      if (used != task_token.size() - 1) throw std::invalid_argument("task");
    } catch (const std::exception&) {
      fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) + ": bad task id '" + task_token + "'");
    }
    entry.features = fs::path(features).is_absolute() ? fs::path(features) : base / features;
    entry.labels = fs::path(labels).is_absolute() ? fs::path(labels) : base / labels;
    entries.push_back(std::move(entry));
  }
  return entries;
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out = create_text(path);
  for (const ManifestEntry& e : entries) {
    out << "task " << e.task << ": " << e.features.generic_string() << ' ' << e.labels.generic_string() << '\n';
  }
}

LoadedDataset load_dataset(const fs::path& train_manifest, const std::optional<fs::path>& test_manifest,
                           const std::optional<fs::path>& mapping, LabelMode mode, std::uint64_t split_seed) {
  struct RawItem {
    FeatureSequence features;
    std::vector<std::string> tokens;
    fs::path label_path;
  };
  std::map<int, std::vector<RawItem>> train_raw;
  std::map<int, std::vector<RawItem>> test_raw;
  auto load_entries = [](const fs::path& manifest, std::map<int, std::vector<RawItem>>& into) {
    for (const ManifestEntry& e : read_manifest(manifest)) {
      RawItem item{load_features(e.features), read_label_tokens(e.labels), e.labels};
      if (item.tokens.size() != item.features.frames()) {
        fail(ErrorKind::kConsistency, e.labels.string() + " has " + std::to_string(item.tokens.size()) +
                                          " lines but " + e.features.string() + " has " +
                                          std::to_string(item.features.frames()) + " frames");
      }
      into[e.task].push_back(std::move(item));
    }
  };
  load_entries(train_manifest, train_raw);
  if (test_manifest) load_entries(*test_manifest, test_raw);
  if (train_raw.empty()) fail(ErrorKind::kData, train_manifest.string() + " lists no videos");

  std::vector<std::string> vocabulary;
  if (mapping) vocabulary = read_mapping(*mapping);
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) rank.emplace(vocabulary[i], i);

  LoadedDataset out{{}, LabelSpace(mode)};
  if (mode == LabelMode::kBlurry) {
    for (const std::string& name : vocabulary) out.space.intern(0, name);
  }
  std::set<int> task_ids;
  for (const auto& [task, items] : train_raw) task_ids.insert(task);
  for (const auto& [task, items] : test_raw) task_ids.insert(task);
  for (int task : task_ids) {
    // Names of this task ordered by mapping rank, else by first appearance.
    std::vector<std::string> names;
    auto collect = [&](const std::map<int, std::vector<RawItem>>& raw) {
      auto it = raw.find(task);
      if (it == raw.end()) return;
      for (const RawItem& item : it->second) {
        for (std::size_t t = 0; t < item.tokens.size(); ++t) {
          const std::string& tok = item.tokens[t];
          if (mapping && !rank.count(tok)) {
            fail(ErrorKind::kLabeling, item.label_path.string() + ":" + std::to_string(t + 1) +
                                           ": action '" + tok + "' is not in the mapping");
          }
          if (std::find(names.begin(), names.end(), tok) == names.end()) names.push_back(tok);
        }
      }
    };
    collect(train_raw);
    collect(test_raw);
    if (mapping) {
      std::stable_sort(names.begin(), names.end(),
                       [&](const std::string& a, const std::string& b) { return rank.at(a) < rank.at(b); });
    }
    for (const std::string& name : names) out.space.intern(task, name);
  }

  auto to_video = [&](RawItem& item, int task) {
    std::vector<ClassId> framewise;
    framewise.reserve(item.tokens.size());
    for (const std::string& tok : item.tokens) framewise.push_back(out.space.id_of(task, tok));
    return LabeledVideo{std::move(item.features), SegmentLabeling::from_framewise(std::move(framewise))};
  };

  RandomSource splitter = RandomSource(split_seed).substream("split");
  for (int task : task_ids) {
    TaskDataset ds;
    ds.task = task;
    auto& train_items = train_raw[task];
    if (test_manifest) {
      for (RawItem& item : train_items) ds.train.push_back(to_video(item, task));
      for (RawItem& item : test_raw[task]) ds.test.push_back(to_video(item, task));
    } else {
      std::vector<std::size_t> order = splitter.substream(static_cast<std::uint64_t>(task)).permutation(train_items.size());
      const std::size_t n_train =
          train_items.size() == 1 ? 1 : static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(train_items.size())));
      for (std::size_t k = 0; k < order.size(); ++k) {
        LabeledVideo v = to_video(train_items[order[k]], task);
        (k < n_train ? ds.train : ds.test).push_back(std::move(v));
      }
    }
    std::set<ClassId> classes;
    for (const auto* split : {&ds.train, &ds.test}) {
      for (const LabeledVideo& v : *split) {
        for (const Segment& s : v.labels.segments()) classes.insert(s.action);
      }
    }
    ds.classes.assign(classes.begin(), classes.end());
    ds.validate();
    out.tasks.push_back(std::move(ds));
  }
  return out;
}

void write_dataset(const fs::path& root, const std::vector<TaskDataset>& tasks, const LabelSpace& space) {
  std::error_code ec;
  fs::create_directories(root / "features", ec);
  fs::create_directories(root / "labels", ec);
  if (ec) fail(ErrorKind::kIo, "cannot create dataset directory " + root.string() + ": " + ec.message());

  std::vector<std::string> vocabulary;
  for (const std::string& name : space.names()) {
    if (std::find(vocabulary.begin(), vocabulary.end(), name) == vocabulary.end()) vocabulary.push_back(name);
  }
  write_mapping(root / "mapping.txt", vocabulary);

  std::vector<ManifestEntry> train_entries;
  std::vector<ManifestEntry> test_entries;
  for (const TaskDataset& ds : tasks) {
    auto emit = [&](const std::vector<LabeledVideo>& items, std::vector<ManifestEntry>& entries) {
      for (const LabeledVideo& v : items) {
        const std::string stem = v.features.source_id;
        const fs::path feat_rel = fs::path("features") / (stem + ".fseq");
        const fs::path label_rel = fs::path("labels") / (stem + ".txt");
        save_features(root / feat_rel, v.features);
        save_labels(root / label_rel, v.labels, space);
        entries.push_back({ds.task, feat_rel, label_rel});
      }
    };
    emit(ds.train, train_entries);
    emit(ds.test, test_entries);
  }
  write_manifest(root / "train.manifest", train_entries);
  write_manifest(root / "test.manifest", test_entries);
}

}  // namespace itas
