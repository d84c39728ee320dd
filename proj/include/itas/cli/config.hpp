#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "itas/data/synthetic.hpp"
#include "itas/trainer/trainer.hpp"

namespace itas {

// Flat "section.key = value" configuration. Every key has a default; a config
// file overrides defaults and --set assignments override the file. Unknown
// keys are rejected.
class Config {
 public:
  static Config defaults();

  // Lines are "key = value"; blank lines and lines starting with '#' are
  // skipped.
  void merge_text(std::string_view text, const std::string& source);
  void merge_file(const std::filesystem::path& path);
  // "key=value".
  void assign(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  // Comma-separated list; empty string gives an empty list.
  std::vector<std::string> get_list(const std::string& key) const;

  // Sorted "key = value" lines; merge_text() of this output reproduces the
  // same configuration.
  void write(std::ostream& out) const;
  std::string to_text() const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

SyntheticSpec synthetic_spec_from(const Config& config);
IncrementalRun run_config_from(const Config& config);

}  // namespace itas
