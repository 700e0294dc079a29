#include <csignal>
#include <iostream>
#include <unistd.h>

#include "CLI11.hpp"
#include "tlpe_cli/session.hpp"

namespace {

tlpe::Engine* g_engine = nullptr;

void on_sigint(int) {
  if (g_engine) g_engine->interrupt();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tlpe: tabled logic programming engine"};
  app.require_subcommand(1);

  std::string strategy = "local";
  std::string tabling = "variant";
  tlpe::cli::SessionConfig cfg;
  app.add_option("--strategy", strategy, "scheduling strategy")->check(CLI::IsMember({"local", "batched"}));
  app.add_option("--default-tabling", tabling, "call tabling mode")->check(CLI::IsMember({"variant", "subsumptive"}));
  app.add_flag("--occurs-check", cfg.engine.occurs_check, "unify with occurs check");
  app.add_flag("--query-level-tabling", cfg.engine.query_level_tabling, "abolish tables after each query");
  app.add_flag("--trace", cfg.trace, "print SLG operations");
  app.fallthrough();

  std::string file;
  std::string goal;
  auto* run = app.add_subcommand("run", "load a program and evaluate one goal");
  run->add_option("file", file, "program file")->required();
  run->add_option("-g,--goal", goal, "goal, e.g. \"p(X).\"")->required();

  std::vector<std::string> files;
  auto* repl = app.add_subcommand("repl", "interactive session");
  repl->add_option("files", files, "programs to load");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  cfg.engine.strategy = strategy == "batched" ? tlpe::Strategy::Batched : tlpe::Strategy::Local;
  cfg.engine.default_tabling = tabling == "subsumptive" ? tlpe::TablingMode::Subsumptive : tlpe::TablingMode::Variant;

  tlpe::cli::Session session(cfg, std::cout, std::cerr);
  g_engine = &session.engine();
  std::signal(SIGINT, on_sigint);

  if (*run) {
    if (!session.load(file)) return 2;
    return static_cast<int>(session.run_goal(goal));
  }
  for (const auto& f : files)
    if (!session.load(f)) return 2;
  session.repl(std::cin, isatty(STDIN_FILENO));
  return 0;
}
