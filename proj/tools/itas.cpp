#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "itas/cli/commands.hpp"
#include "itas/core/errors.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<unsigned long long> seed;
  std::string out;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "Config file of 'section.key = value' lines");
  cmd->add_option("--set", o.sets, "Override one key (key=value); repeatable");
  cmd->add_option("--seed", o.seed, "Root seed (run.seed)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_flag("--force", o.force, "Overwrite an existing output directory");
}

itas::Config resolve(const CommonOptions& o) {
  itas::Config config = itas::Config::defaults();
  if (!o.config_path.empty()) config.merge_file(o.config_path);
  for (const std::string& s : o.sets) config.assign(s);
  if (o.seed) config.set("run.seed", std::to_string(*o.seed));
  return config;
}

std::optional<fs::path> out_flag(const CommonOptions& o) {
  if (o.out.empty()) return std::nullopt;
  return fs::path(o.out);
}

std::string run_name(const std::string& command, const itas::Config& config) {
  return command + "-seed" + config.get("run.seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental temporal action segmentation with generative replay"};
  app.require_subcommand(1);

  CommonOptions synth_opts, run_opts, sweep_opts, dump_opts;
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic procedural dataset");
  add_common(synth, synth_opts);

  CLI::App* run = app.add_subcommand("run", "Run incremental training and evaluation");
  add_common(run, run_opts);

  CLI::App* sweep = app.add_subcommand("sweep", "Child runs over replay size, TCA data ratio or seed");
  add_common(sweep, sweep_opts);
  std::string sweep_axis;
  std::string sweep_values;
  sweep->add_option("--axis", sweep_axis, "M, ratio or seed (sweep.axis)");
  sweep->add_option("--values", sweep_values, "Comma-separated values (sweep.values)");

  CLI::App* eval = app.add_subcommand("eval", "Score prediction label files against ground truth");
  std::string pred_dir, gt_dir, mapping;
  eval->add_option("--pred", pred_dir, "Prediction directory")->required();
  eval->add_option("--gt", gt_dir, "Ground-truth directory")->required();
  eval->add_option("--mapping", mapping, "Class mapping file")->required();

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the training losses");
  std::string component = "seg";
  unsigned long long gc_seed = 0;
  bool corrupt = false;
  gradcheck->add_option("--component", component, "seg or tca");
  gradcheck->add_option("--seed", gc_seed, "Instance seed");
  gradcheck->add_flag("--corrupt-backward", corrupt, "Perturb one analytic gradient (negative control)");

  CLI::App* dump = app.add_subcommand("dump-replay", "Write generated replay videos of a finished run");
  add_common(dump, dump_opts);
  std::string run_dir;
  dump->add_option("--run", run_dir, "Run directory with decoder checkpoints and pools")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return itas::exit_code_for(itas::ErrorKind::kConfig);
  }

  try {
    if (synth->parsed()) {
      const itas::Config config = resolve(synth_opts);
      itas::cmd_synth(config, itas::resolve_output_dir(config, out_flag(synth_opts), run_name("synth", config)),
                      synth_opts.force, std::cout);
    } else if (run->parsed()) {
      const itas::Config config = resolve(run_opts);
      const fs::path out = itas::resolve_output_dir(config, out_flag(run_opts), run_name("run", config));
      itas::cmd_run(config, out, run_opts.force, std::cout);
      std::cout << "run directory: " << out.string() << '\n';
    } else if (sweep->parsed()) {
      itas::Config config = resolve(sweep_opts);
      if (!sweep_axis.empty()) config.set("sweep.axis", sweep_axis);
      if (!sweep_values.empty()) config.set("sweep.values", sweep_values);
      const fs::path out = itas::resolve_output_dir(
          config, out_flag(sweep_opts), "sweep-" + config.get("sweep.axis") + "-seed" + config.get("run.seed"));
      itas::cmd_sweep(config, out, sweep_opts.force, std::cout);
      std::cout << "sweep directory: " << out.string() << '\n';
    } else if (eval->parsed()) {
      itas::cmd_eval(pred_dir, gt_dir, mapping, std::cout);
    } else if (gradcheck->parsed()) {
      const itas::GradCheckReport report =
          itas::run_gradcheck(itas::parse_gradcheck_component(component), gc_seed, corrupt);
      std::cout << component << ": " << report.summary() << '\n';
      if (!report.passed) return itas::exit_code_for(itas::ErrorKind::kNumeric);
    } else if (dump->parsed()) {
      const itas::Config config = resolve(dump_opts);
      const fs::path out = out_flag(dump_opts).value_or(fs::path(run_dir) / "replay");
      itas::cmd_dump_replay(config, run_dir, out, dump_opts.force, std::cout);
    }
  } catch (const itas::Error& e) {
    std::cerr << "itas: " << e.what() << '\n';
    return itas::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "itas: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
