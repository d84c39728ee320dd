#include "itas/cli/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <sstream>

#include "itas/core/checkpoint.hpp"
#include "itas/core/errors.hpp"

namespace itas {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

Config Config::defaults() {
  Config c;
  c.values_ = {
      {"data.source", "synthetic"},
      {"data.train_manifest", ""},
      {"data.test_manifest", ""},
      {"data.mapping", ""},
      {"data.seed", ""},
      {"synth.tasks", "3"},
      {"synth.actions_per_task", "4"},
      {"synth.shared_actions", "0"},
      {"synth.videos_per_task", "25"},
      {"synth.dim", "16"},
      {"synth.min_segment_length", "8"},
      {"synth.max_segment_length", "16"},
      {"synth.skip_probability", "0.25"},
      {"synth.noise", "0.3"},
      {"synth.drift", "4"},
      {"synth.base_scale", "1"},
      {"synth.train_fraction", "0.8"},
      {"run.strategy", "tca"},
      {"run.replay_mode", "coherent"},
      {"run.replay_budget", "20"},
      {"run.task_order", ""},
      {"run.label_mode", "disjoint"},
      {"run.seed", "0"},
      {"seg.channels", "16"},
      {"seg.layers", "5"},
      {"seg.epochs", "20"},
      {"seg.lr", "0.002"},
      {"seg.batch_size", "1"},
      {"seg.lambda", "0.15"},
      {"seg.tau", "4"},
      {"tca.latent_dim", "8"},
      {"tca.hidden", "64"},
      {"tca.epochs", "60"},
      {"tca.lr", "0.001"},
      {"tca.ratio", "1"},
      {"tca.beta", "1"},
      {"tca.batch_size", "64"},
      {"sweep.axis", "M"},
      {"sweep.values", ""},
      {"output.dir", ""},
  };
  return c;
}

void Config::merge_text(std::string_view text, const std::string& source) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::kConfig, source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (!has(key)) fail(ErrorKind::kConfig, source + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    values_[key] = trim(std::string_view(line).substr(eq + 1));
  }
}

void Config::merge_file(const std::filesystem::path& path) {
  merge_text(read_file_bytes(path), path.string());
}

void Config::assign(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) fail(ErrorKind::kConfig, "--set expects key=value, got '" + assignment + "'");
  set(trim(std::string_view(assignment).substr(0, eq)), trim(std::string_view(assignment).substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
  if (!has(key)) fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
  values_[key] = value;
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
  return it->second;
}

long long Config::get_int(const std::string& key) const {
  const std::string& text = get(key);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || *end != '\0' || errno != 0) {
    fail(ErrorKind::kConfig, key + " must be an integer, got '" + text + "'");
  }
  return v;
}

std::size_t Config::get_size(const std::string& key) const {
  const long long v = get_int(key);
  if (v < 0) fail(ErrorKind::kConfig, key + " must be non-negative");
  return static_cast<std::size_t>(v);
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const std::string& text = get(key);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || text[0] == '-' || *end != '\0' || errno != 0) {
    fail(ErrorKind::kConfig, key + " must be an unsigned integer, got '" + text + "'");
  }
  return v;
}

double Config::get_double(const std::string& key) const {
  const std::string& text = get(key);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno != 0) {
    fail(ErrorKind::kConfig, key + " must be a number, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  std::vector<std::string> out;
  const std::string& text = get(key);
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(ErrorKind::kConfig, key + " has an empty list entry");
    out.push_back(item);
  }
  return out;
}

void Config::write(std::ostream& out) const {
  for (const auto& [key, value] : values_) out << key << " = " << value << '\n';
}

std::string Config::to_text() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

SyntheticSpec synthetic_spec_from(const Config& config) {
  SyntheticSpec spec;
  spec.tasks = static_cast<int>(config.get_int("synth.tasks"));
  spec.actions_per_task = static_cast<int>(config.get_int("synth.actions_per_task"));
  spec.shared_actions = static_cast<int>(config.get_int("synth.shared_actions"));
  spec.videos_per_task = static_cast<int>(config.get_int("synth.videos_per_task"));
  spec.dim = static_cast<int>(config.get_int("synth.dim"));
  spec.min_segment_length = static_cast<int>(config.get_int("synth.min_segment_length"));
  spec.max_segment_length = static_cast<int>(config.get_int("synth.max_segment_length"));
  spec.skip_probability = config.get_double("synth.skip_probability");
  spec.noise = config.get_double("synth.noise");
  spec.drift = config.get_double("synth.drift");
  spec.base_scale = config.get_double("synth.base_scale");
  spec.train_fraction = config.get_double("synth.train_fraction");
  spec.validate();
  return spec;
}

IncrementalRun run_config_from(const Config& config) {
  IncrementalRun run;
  run.strategy = parse_strategy(config.get("run.strategy"));
  run.replay_mode = parse_replay_mode(config.get("run.replay_mode"));
  run.replay_budget = config.get_size("run.replay_budget");
  for (const std::string& t : config.get_list("run.task_order")) {
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (*end != '\0') fail(ErrorKind::kConfig, "run.task_order entries must be integers, got '" + t + "'");
    run.task_order.push_back(static_cast<int>(v));
  }
  run.label_mode = parse_label_mode(config.get("run.label_mode"));
  run.seed = config.get_u64("run.seed");

  run.seg.channels = config.get_size("seg.channels");
  run.seg.layers = config.get_size("seg.layers");
  if (run.seg.channels == 0 || run.seg.layers == 0) fail(ErrorKind::kConfig, "seg.channels and seg.layers must be >= 1");
  run.seg_train.epochs = config.get_size("seg.epochs");
  run.seg_train.learning_rate = config.get_double("seg.lr");
  run.seg_train.batch_size = config.get_size("seg.batch_size");
  run.seg_train.loss.lambda = config.get_double("seg.lambda");
  run.seg_train.loss.tau = config.get_double("seg.tau");
  run.seg_train.loss.validate();
  if (run.seg_train.batch_size == 0) fail(ErrorKind::kConfig, "seg.batch_size must be >= 1");
  if (!(run.seg_train.learning_rate > 0.0)) fail(ErrorKind::kConfig, "seg.lr must be positive");

  run.tca.latent_dim = config.get_size("tca.latent_dim");
  run.tca.hidden = config.get_size("tca.hidden");
  if (run.tca.latent_dim == 0 || run.tca.hidden == 0) fail(ErrorKind::kConfig, "tca.latent_dim and tca.hidden must be >= 1");
  run.tca_train.epochs = config.get_size("tca.epochs");
  run.tca_train.learning_rate = config.get_double("tca.lr");
  run.tca_train.data_ratio = config.get_double("tca.ratio");
  run.tca_train.beta = config.get_double("tca.beta");
  run.tca_train.batch_size = config.get_size("tca.batch_size");
  if (!(run.tca_train.data_ratio > 0.0 && run.tca_train.data_ratio <= 1.0)) {
    fail(ErrorKind::kConfig, "tca.ratio must lie in (0, 1]");
  }
  if (run.tca_train.batch_size == 0) fail(ErrorKind::kConfig, "tca.batch_size must be >= 1");
  if (!(run.tca_train.learning_rate > 0.0)) fail(ErrorKind::kConfig, "tca.lr must be positive");
  if (run.tca_train.beta < 0.0) fail(ErrorKind::kConfig, "tca.beta must be non-negative");
  return run;
}

}  // namespace itas
