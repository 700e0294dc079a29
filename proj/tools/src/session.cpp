#include "tlpe_cli/session.hpp"

#include <istream>
#include <ostream>

#include "tlpe/error.hpp"
#include "tlpe/term_io.hpp"

namespace tlpe::cli {

namespace {

std::string_view trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string_view strip_period(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return trim(s);
}

std::pair<std::string_view, std::string_view> split_word(std::string_view s) {
  size_t sp = s.find_first_of(" \t");
  if (sp == std::string_view::npos) return {s, {}};
  return {s.substr(0, sp), trim(s.substr(sp))};
}

PredKey parse_indicator(std::string_view text) {
  Term t = read_term(text).term;
  if (!(t.is_compound() && t.arity() == 2 && t.symbol().name() == "/" && t.arg(0).is_atom() && t.arg(1).is_int()))
    throw Error(ErrorKind::Type, "predicate indicator expected: " + std::string(text));
  return PredKey{t.arg(0).symbol(), static_cast<uint32_t>(t.arg(1).int_value())};
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front())
    return std::string(s.substr(1, s.size() - 2));
  return std::string(s);
}

}  // namespace

std::vector<std::string> format_answers(const std::vector<Solution>& sols) {
  std::vector<std::string> lines;
  for (const auto& s : sols) lines.push_back(format_solution(s));
  return lines;
}

Session::Session(SessionConfig config, std::ostream& out, std::ostream& err)
    : engine_(config.engine), config_(config), out_(out), err_(err) {
  engine_.set_output(&out_);
  apply_trace();
}

void Session::apply_trace() {
  if (config_.trace)
    engine_.set_trace([this](const StepReport& r) { out_ << r.str() << '\n'; });
  else
    engine_.set_trace(nullptr);
}

void Session::print_error(const std::exception& e) {
  if (auto* te = dynamic_cast<const Error*>(&e))
    err_ << "error: " << te->describe() << '\n';
  else
    err_ << "error: " << e.what() << '\n';
}

bool Session::load(const std::string& path) {
  try {
    engine_.consult_file(path);
    return true;
  } catch (const std::exception& e) {
    print_error(e);
    return false;
  }
}

ExitCode Session::run_goal(std::string_view goal_text) {
  try {
    auto sols = engine_.query(goal_text);
    if (sols.empty()) {
      out_ << "no\n";
      return ExitCode::NoAnswer;
    }
    for (const auto& line : format_answers(sols)) out_ << line << '\n';
    return ExitCode::Success;
  } catch (const std::exception& e) {
    print_error(e);
    return ExitCode::Failure;
  }
}

void Session::query(std::string_view text, std::istream& in) {
  std::vector<Solution> sols;
  try {
    sols = engine_.query(text);
  } catch (const std::exception& e) {
    print_error(e);
    return;
  }
  for (const auto& s : sols) {
    out_ << format_solution(s) << '\n';
    std::string reply;
    if (!std::getline(in, reply) || trim(reply) != ";") return;
  }
  out_ << "no\n";
}

void Session::print_stats() {
  TableStats st = engine_.tables().stats();
  out_ << "tables: " << st.tables << ", answers: " << st.answers << ", conditional: " << st.conditional
       << ", trie nodes: " << st.trie_nodes << ", pending gc: " << st.graveyard << ", reclaimed: " << st.reclaimed
       << '\n';
  for (const auto& p : st.preds)
    out_ << "  " << p.pred.str() << ": tables " << p.tables << ", answers " << p.answers << ", conditional "
         << p.conditional << ", trie nodes " << p.trie_nodes << '\n';
}

void Session::command(std::string_view text) {
  auto [word, rest] = split_word(strip_period(text.substr(1)));
  if (word == "load") {
    if (load(unquote(rest))) out_ << "loaded " << unquote(rest) << '\n';
    return;
  }
  if (word == "abolish") {
    auto [what, arg] = split_word(rest);
    if (what == "all")
      engine_.abolish_all();
    else if (what == "pred")
      engine_.abolish_pred(parse_indicator(arg));
    else if (what == "call")
      engine_.abolish_call(read_term(arg).term);
    else
      throw Error(ErrorKind::UnknownDirective, "usage: :abolish all | pred P/N | call GOAL");
    out_ << "yes\n";
    return;
  }
  if (word == "residual") {
    ReadTerm rt = read_term(rest);
    auto clauses = engine_.get_residual(rt.term);
    if (clauses.empty()) out_ << "no\n";
    for (const auto& c : clauses) out_ << c.str() << '\n';
    return;
  }
  if (word == "stats") {
    print_stats();
    return;
  }
  if (word == "trace") {
    if (rest != "on" && rest != "off") throw Error(ErrorKind::UnknownDirective, "usage: :trace on|off");
    config_.trace = rest == "on";
    apply_trace();
    return;
  }
  auto report_tables = [&](const std::vector<Table*>& ts, const char* verb) {
    out_ << verb << ' ' << ts.size() << (ts.size() == 1 ? " table\n" : " tables\n");
  };
  if (word == "incr_assert" || word == "incr_retract") {
    ChangeKind k = word == "incr_assert" ? ChangeKind::Assert : ChangeKind::Retract;
    report_tables(engine_.incr_update(Change{k, read_term(rest).term}), "updated");
    return;
  }
  if (word == "incr_update") {
    report_tables(engine_.incr_table_update(), "updated");
    return;
  }
  if (word == "incr_invalidate") {
    Term t = read_term(rest).term;
    ChangeKind k = ChangeKind::Assert;
    if (t.is_compound() && t.arity() == 1 && (t.symbol().name() == "retract" || t.symbol().name() == "assert")) {
      if (t.symbol().name() == "retract") k = ChangeKind::Retract;
      t = t.arg(0);
    }
    report_tables(engine_.incr_invalidate(Change{k, t}), "invalidated");
    return;
  }
  throw Error(ErrorKind::UnknownDirective, "unknown command :" + std::string(word));
}

bool Session::eval_command(std::string_view line, std::istream& in) {
  std::string_view text = trim(line);
  if (text.empty()) return true;
  if (text.front() == ':') {
    auto word = split_word(strip_period(text.substr(1))).first;
    if (word == "quit" || word == "halt") return false;
    try {
      command(text);
    } catch (const std::exception& e) {
      print_error(e);
    }
    return true;
  }
  query(text, in);
  return true;
}

void Session::repl(std::istream& in, bool interactive) {
  std::string pending;
  std::string line;
  while (true) {
    if (interactive) out_ << (pending.empty() ? "?- " : "|  ") << std::flush;
    if (!std::getline(in, line)) break;
    pending += line;
    pending += '\n';
    std::string_view t = trim(pending);
    if (t.empty()) {
      pending.clear();
      continue;
    }
    if (t.back() != '.') continue;
    std::string text(t);
    pending.clear();
    if (!eval_command(text, in)) break;
  }
}

}  // namespace tlpe::cli
