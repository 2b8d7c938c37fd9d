#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "disloc/cli.hpp"
#include "disloc/errors.hpp"

using namespace disloc;

namespace {

struct Common {
  std::string config, out = ".";
  std::vector<std::string> overrides;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool check = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config file");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--override", c.overrides, "KEY=VALUE, repeatable; dotted keys reach nested objects");
  sub->add_option("--jobs", c.jobs, "worker threads for data-parallel sweeps")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "seed for Krylov start vectors");
  sub->add_flag("--check", c.check, "validate the config and stop");
}

int report_diagnostics(const std::vector<std::string>& diags) {
  for (const auto& d : diags) std::fprintf(stderr, "%s\n", d.c_str());
  if (diags.empty()) std::printf("config ok\n");
  return diags.empty() ? 0 : 1;
}

int finish(const cli::Outcome& o) {
  std::fprintf(o.exit_code == 0 ? stdout : stderr, "%s\n", o.summary.c_str());
  return o.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dislocation problems for periodic Schroedinger operators"};
  app.require_subcommand(1);

  const std::vector<std::string> names{"bands", "branch", "flow", "strip", "dos", "muffin", "regularity"};
  std::vector<Common> common(names.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto* sub = app.add_subcommand(names[i], "run " + names[i]);
    add_common(sub, common[i]);
    subs.push_back(sub);
  }

  Common vcommon;
  std::string vcommand;
  auto* validate = app.add_subcommand("validate", "schema and range checks without running");
  validate->add_option("command", vcommand, "command whose config to check")->required();
  add_common(validate, vcommon);

  std::string kind, input, output;
  auto* plot = app.add_subcommand("plot", "gnuplot-ready columns from an artifact");
  plot->add_option("--kind", kind, "discriminant, branch, dos or raster")->required();
  plot->add_option("--input", input, "artifact written by a run")->required();
  plot->add_option("--out", output, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (plot->parsed()) {
      return finish(cli::emit_plot_data(input, kind, output));
    }
    if (validate->parsed()) {
      auto cfg = cli::load_config(cli::command_from_string(vcommand), vcommon.config, vcommon.overrides);
      cfg.jobs = vcommon.jobs;
      return report_diagnostics(cli::validate(cfg));
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const Common& c = common[i];
      auto cfg = cli::load_config(cli::command_from_string(names[i]), c.config, c.overrides);
      cfg.out_dir = c.out;
      cfg.jobs = c.jobs;
      cfg.seed = c.seed;
      if (c.check) return report_diagnostics(cli::validate(cfg));
      return finish(cli::run(cfg));
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
