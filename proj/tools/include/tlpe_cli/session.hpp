#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tlpe/engine.hpp"

namespace tlpe::cli {

struct SessionConfig {
  EngineConfig engine;
  bool trace = false;
};

enum class ExitCode { Success = 0, NoAnswer = 1, Failure = 2 };

class Session {
 public:
  Session(SessionConfig config, std::ostream& out, std::ostream& err);

  Engine& engine() { return engine_; }

  // Consults a file; reports failures on err.
  bool load(const std::string& path);

  // Batch evaluation: prints every answer, or `no`.
  ExitCode run_goal(std::string_view goal_text);

  // Evaluates one REPL line. Replies to `;` prompts are read from in.
  // Returns false on `:quit.`.
  bool eval_command(std::string_view line, std::istream& in);

  // Reads lines until end of input or `:quit.`.
  void repl(std::istream& in, bool interactive);

 private:
  void query(std::string_view text, std::istream& in);
  void command(std::string_view text);
  void print_stats();
  void print_error(const std::exception& e);
  void apply_trace();

  Engine engine_;
  SessionConfig config_;
  std::ostream& out_;
  std::ostream& err_;
};

std::vector<std::string> format_answers(const std::vector<Solution>& sols);

}  // namespace tlpe::cli
