#include <iostream>

#include "CLI11.hpp"
#include "cli/app.hpp"

int main(int argc, char** argv) {
  using namespace fenchelkit::cli;
  CLI::App app{"Convex duality, transport and minimal-flow toolkit"};
  app.set_version_flag("--version", fenchelkit::kVersion);
  app.require_subcommand(1);

  RunOptions run_opt;
  std::vector<std::string> inputs;
  std::string out_path;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Solve problem files and write result files");
  run->add_option("files", inputs, "Problem files (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "Result file, or a directory for several inputs");
  run->add_option("--jobs", run_opt.jobs, "Worker slots")->check(CLI::Range(1, 256));
  auto* seed_opt = run->add_option("--seed", seed, "Seed for generated instances (overrides the file)");

  std::string result, series, emit_out;
  auto* emit_cmd = app.add_subcommand("emit", "Export a series of a result file as CSV");
  emit_cmd->add_option("result", result, "Result file")->required()->check(CLI::ExistingFile);
  emit_cmd->add_option("--series", series, "Series name")->required();
  emit_cmd->add_option("--out", emit_out, "CSV file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kMalformed;
  }

  if (*run) {
    for (const auto& f : inputs) run_opt.inputs.emplace_back(f);
    if (!out_path.empty()) run_opt.out = out_path;
    if (*seed_opt) run_opt.seed = seed;
    return fenchelkit::cli::run(run_opt, std::cout, std::cerr);
  }
  std::optional<fs::path> target;
  if (!emit_out.empty()) target = emit_out;
  return fenchelkit::cli::emit(result, series, target, std::cout, std::cerr);
}
