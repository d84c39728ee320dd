#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "itas/data/types.hpp"

namespace itas {

// FSEQ1 feature files: "FSQ1" | u32 T | u32 D | T*D float32, all
// little-endian, frame-major.
std::string encode_features(const FeatureSequence& seq);
FeatureSequence decode_features(const std::string& bytes, const std::string& source);
FeatureSequence load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, const FeatureSequence& seq);

// Label files: one action-name token per line, one line per frame.
std::vector<std::string> read_label_tokens(const std::filesystem::path& path);
SegmentLabeling load_labels(const std::filesystem::path& path, const LabelSpace& space, int task,
                            std::optional<std::size_t> expected_frames = std::nullopt);
void save_labels(const std::filesystem::path& path, const SegmentLabeling& labels, const LabelSpace& space);

// Mapping files: "<global id> <action name>" lines, ids dense from 0.
std::vector<std::string> read_mapping(const std::filesystem::path& path);
void write_mapping(const std::filesystem::path& path, const std::vector<std::string>& names);

// Manifests: "task <b>: <feature path> <label path>" lines. Relative paths
// resolve against the manifest's directory.
struct ManifestEntry {
  int task = 0;
  std::filesystem::path features;
  std::filesystem::path labels;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

struct LoadedDataset {
  std::vector<TaskDataset> tasks;  // ascending task id
  LabelSpace space;
};

// Loads every manifest entry. Without a test manifest, each task's videos are
// split 80/20 into train/test using `split_seed`. With a mapping in blurry
// mode, global ids equal the mapping ids.
LoadedDataset load_dataset(const std::filesystem::path& train_manifest,
                           const std::optional<std::filesystem::path>& test_manifest,
                           const std::optional<std::filesystem::path>& mapping, LabelMode mode,
                           std::uint64_t split_seed);

// Writes features/, labels/, mapping.txt, train.manifest and test.manifest
// under `root`. Label files use the action names of `space`.
void write_dataset(const std::filesystem::path& root, const std::vector<TaskDataset>& tasks,
                   const LabelSpace& space);

}  // namespace itas
