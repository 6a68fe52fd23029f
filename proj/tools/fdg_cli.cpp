#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "fdg/errors.hpp"
#include "fdg/harness/config.hpp"
#include "fdg/harness/run.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct Options {
  std::string config;
  std::string output;
  bool paper_scale = false;
  std::optional<std::uint64_t> seed;
};

fdg::harness::RunConfig load(const Options& o) {
  auto c = fdg::harness::parse_config(fdg::harness::read_json_file(o.config), o.paper_scale);
  if (!o.output.empty()) c.output = o.output;
  if (o.seed) c.seed = *o.seed;
  fdg::harness::validate(c);
  return c;
}

void add_common(CLI::App* cmd, Options& o, bool with_run_flags) {
  cmd->add_option("--config", o.config, "JSON configuration file")->required();
  cmd->add_flag("--paper-scale", o.paper_scale, "use the full-scale defaults (K = 64^2 Sedov)");
  if (with_run_flags) {
    cmd->add_option("--output", o.output, "output directory (overrides the config)");
    cmd->add_option("--seed", o.seed, "random seed (overrides the config)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gauss/Lobatto DGSEM for the Euler equations: experiments and diagnostics"};
  app.require_subcommand(1);
  Options opt;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  add_common(run, opt, true);
  auto* check = app.add_subcommand("validate-config", "parse a config and print it with defaults");
  add_common(check, opt, true);
  auto* list = app.add_subcommand("list-experiments", "list the available experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }

  try {
    if (list->parsed()) {
      for (const auto& [e, name] : fdg::harness::experiment_names())
        std::cout << name << "\t" << fdg::harness::describe(e) << "\n";
      return exit_ok;
    }
    const auto cfg = load(opt);
    if (check->parsed()) {
      std::cout << fdg::harness::to_json(cfg).dump(2) << "\n";
      return exit_ok;
    }
    const auto outcome = fdg::harness::run(cfg);
    std::cout << outcome.summary.dump(2) << "\n";
    if (!outcome.ok) {
      std::cerr << "error: run did not complete: "
                << outcome.summary.value("failure", std::string("unknown failure")) << "\n";
      return exit_numerical;
    }
    return exit_ok;
  } catch (const fdg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const fdg::harness::OutputError& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return exit_config;
  } catch (const fdg::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  }
}
