#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "itas/cli/config.hpp"
#include "itas/core/gradcheck.hpp"
#include "itas/data/io.hpp"
#include "itas/metrics/metrics.hpp"
#include "itas/trainer/trainer.hpp"

namespace itas {

inline constexpr const char* kOutputRootEnv = "ITAS_OUTPUT_ROOT";

// --out wins, then output.dir, then $ITAS_OUTPUT_ROOT/<name>, then
// runs/<name>.
std::filesystem::path resolve_output_dir(const Config& config, const std::optional<std::filesystem::path>& out_flag,
                                         const std::string& default_name);

// Creates `dir`. A non-empty existing directory is refused unless `force`,
// in which case it is cleared first.
void prepare_output_dir(const std::filesystem::path& dir, bool force);

// Synthetic corpus from data.seed (or run.seed when empty), or the manifests
// named by data.*; relabeled for run.label_mode.
LoadedDataset load_config_dataset(const Config& config);

void cmd_synth(const Config& config, const std::filesystem::path& out, bool force, std::ostream& log);

// Writes into `out`:
//   config.txt             resolved configuration
//   classes.txt            global class mapping
//   history.tsv            stage x task metric table
//   losses.tsv             per-epoch training losses
//   access.tsv             task data reads of the run loop
//   confusion/stage_<k>.tsv
//   checkpoints/seg_stage_<k>.ckpt, checkpoints/tca_task_<b>.ckpt
//   pools/task_<b>.txt
RunResult cmd_run(const Config& config, const std::filesystem::path& out, bool force, std::ostream& log);

// One child run per value of sweep.axis (M, ratio or seed) under out/,
// plus summary.tsv; the seed axis also permutes the task order per seed and
// writes curves.tsv with per-stage mean and standard deviation of Acc.
void cmd_sweep(const Config& config, const std::filesystem::path& out, bool force, std::ostream& log);

// Scores prediction label files against ground-truth files with the same
// relative paths. Files directly in the directory belong to task 0; files in
// integer-named subdirectories belong to that task.
MetricsReport cmd_eval(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                       const std::filesystem::path& mapping, std::ostream& out);

enum class GradCheckComponent { kSeg, kTca };
GradCheckComponent parse_gradcheck_component(const std::string& text);

// Small randomized instance: seg at T=20, A=3, D=8; tca at Z=4, D=8.
// `corrupt_backward` perturbs one analytic gradient tensor (negative control).
GradCheckReport run_gradcheck(GradCheckComponent component, std::uint64_t seed, bool corrupt_backward = false);

// Generates run.replay_budget replay videos over every task of a finished run
// directory and dumps them under out/<mode>_M<budget>_seed<seed>/.
std::filesystem::path cmd_dump_replay(const Config& config, const std::filesystem::path& run_dir,
                                      const std::filesystem::path& out, bool force, std::ostream& log);

}  // namespace itas
