// Command-line front end: run / sweep / aggregate / preset.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "flexgrid/experiment.hpp"

namespace {

constexpr int k_exit_ok = 0;
constexpr int k_exit_config = 1;
constexpr int k_exit_run_failed = 2;

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t parallelism = 1;
  bool trace = false;
  bool timing = false;
};

int write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return k_exit_ok;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return k_exit_config;
  }
  return k_exit_ok;
}

int execute(const RunArgs& args) {
  flexgrid::SweepSpec spec;
  try {
    spec = flexgrid::load_sweep_config(args.config);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return k_exit_config;
  }
  if (args.seed) spec.fixed.master_seed = *args.seed;

  flexgrid::SweepOptions options;
  options.parallelism = args.parallelism;
  options.timing = args.timing;
  if (args.trace) options.trace = &std::cerr;
  const auto rows = flexgrid::run_sweep_rows(spec, options);

  if (const int rc = write_output(args.out, flexgrid::to_csv(rows)); rc != k_exit_ok) return rc;
  const auto failed = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.ok(); });
  if (failed > 0) {
    for (const auto& r : rows) {
      if (!r.ok()) {
        std::cerr << r.topology << " W=" << r.slot_width_ghz << " seed=" << r.seed << ": "
                  << r.status << '\n';
      }
    }
    return k_exit_run_failed;
  }
  return k_exit_ok;
}

void add_run_options(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--config", args.config, "Sweep config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "Override master_seed");
  cmd->add_option("--parallelism", args.parallelism, "Concurrent runs")->check(CLI::PositiveNumber);
  cmd->add_flag("--trace", args.trace, "Per-event trace on stderr (runs serially)");
  cmd->add_flag("--timing", args.timing, "Fill the wall_ms column");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flexible-grid optical network slot-width simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run every grid point of a config, CSV to stdout or --out");
  add_run_options(run_cmd, run_args);
  run_cmd->add_option("--out", run_args.out, "CSV output path (default stdout)");

  RunArgs sweep_args;
  sweep_args.parallelism = std::max(1U, std::thread::hardware_concurrency());
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a full sweep in parallel and write a CSV");
  add_run_options(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--out", sweep_args.out, "CSV output path")->required();

  std::string agg_in, agg_out;
  auto* agg_cmd = app.add_subcommand("aggregate", "Mean and standard error across seeds");
  agg_cmd->add_option("--in", agg_in, "Sweep CSV")->required()->check(CLI::ExistingFile);
  agg_cmd->add_option("--out", agg_out, "Aggregated CSV (default stdout)");

  std::string preset_name;
  auto* preset_cmd = app.add_subcommand("preset", "Print a bundled config (no name: list presets)");
  preset_cmd->add_option("name", preset_name, "Preset name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? k_exit_ok : k_exit_config;
  }

  if (*run_cmd) return execute(run_args);
  if (*sweep_cmd) return execute(sweep_args);

  if (*agg_cmd) {
    std::ifstream in(agg_in, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      return write_output(agg_out, flexgrid::aggregate_csv(buf.str()));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return k_exit_config;
    }
  }

  if (preset_name.empty()) {
    for (const auto& name : flexgrid::preset_names()) std::cout << name << '\n';
    return k_exit_ok;
  }
  const auto text = flexgrid::preset_config(preset_name);
  if (!text) {
    std::cerr << "unknown preset '" << preset_name << "'; available:";
    for (const auto& name : flexgrid::preset_names()) std::cerr << ' ' << name;
    std::cerr << '\n';
    return k_exit_config;
  }
  std::cout << *text;
  return k_exit_ok;
}
