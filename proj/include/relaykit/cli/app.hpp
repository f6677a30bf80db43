#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relaykit/cli/commands.hpp"
#include "relaykit/cli/config.hpp"
#include "relaykit/cli/schemas.hpp"

namespace relaykit::cli {

/// Parses argv, runs one subcommand and returns the process exit code:
/// 0 success, 2 config error, 3 data error, 4 model error.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"relaykit: transient classification and relay cascade tools", "relaykit"};
  app.require_subcommand(1);

  struct Cmd {
    const char* name;
    const char* help;
    std::string_view schema;
    int (*fn)(const nlohmann::json&, Streams);
  };
  const Cmd cmds[] = {
      {"gen", "generate a labelled synthetic corpus", schemas::gen, cmd_gen},
      {"features", "write per-stage feature tables", schemas::features, cmd_features},
      {"train", "train a cascade and report CV scores", schemas::train, cmd_train},
      {"eval", "confusion matrices and balanced accuracy per stage", schemas::eval, cmd_eval},
      {"classify", "one JSON decision per record", schemas::classify, cmd_classify},
  };
  std::vector<Overrides> ov(std::size(cmds));
  std::vector<std::uint64_t> seeds(std::size(cmds));
  std::vector<std::string> outs(std::size(cmds));
  std::vector<int> jobs(std::size(cmds));
  std::vector<std::string> configs(std::size(cmds));
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(cmds); ++i) {
    auto* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    sub->add_option("--config", configs[i], "JSON config file");
    sub->add_option("--seed", seeds[i], "overrides the config's seed");
    sub->add_option("--out", outs[i], "output directory");
    sub->add_option("--jobs", jobs[i], "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--set", ov[i].sets, "override a config leaf, key.path=json")->take_all();
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < std::size(cmds); ++i) {
    auto* sub = subs[i];
    if (!sub->parsed()) continue;
    Overrides& o = ov[i];
    if (sub->count("--config")) o.config_path = configs[i];
    if (sub->count("--seed")) o.seed = seeds[i];
    if (sub->count("--out")) o.out = outs[i];
    if (sub->count("--jobs")) o.jobs = jobs[i];
    try {
      const auto cfg = effective_config(cmds[i].name, cmds[i].schema, o);
      return cmds[i].fn(cfg, {out, err});
    } catch (const std::exception& e) {
      err << "relaykit " << cmds[i].name << ": " << e.what() << '\n';
      return exit_code(e);
    }
  }
  return 2;
}

}  // namespace relaykit::cli
