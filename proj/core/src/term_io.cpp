#include "tlpe/term_io.hpp"

#include <cctype>
#include <cstring>
#include <optional>
#include <unordered_map>

#include "tlpe/error.hpp"

namespace tlpe {

// ---------------------------------------------------------------------------
// Writer

namespace {

constexpr std::string_view kSymbolChars = "+-*/\\^<>=~:.?@#&$";

bool is_symbol_char(char c) { return kSymbolChars.find(c) != std::string_view::npos; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool atom_needs_quotes(std::string_view s) {
  if (s.empty()) return true;
  if (s == "[]" || s == "!" || s == ";" || s == "{}") return false;
  if (std::islower(static_cast<unsigned char>(s[0]))) {
    for (char c : s)
      if (!is_alnum(c)) return true;
    return false;
  }
  if (s == ".") return true;
  for (char c : s)
    if (!is_symbol_char(c)) return true;
  return false;
}

void write_rec(const Term& t, const std::vector<std::string>* names, std::string& out) {
  switch (t.kind()) {
    case TermKind::Var:
      if (names && t.var_id() < names->size() && !(*names)[t.var_id()].empty() && (*names)[t.var_id()] != "_")
        out += (*names)[t.var_id()];
      else
        out += "_" + std::to_string(t.var_id());
      return;
    case TermKind::Int: out += std::to_string(t.int_value()); return;
    case TermKind::Dec: out += format_decimal(t.int_value()); return;
    case TermKind::Atom: out += format_atom(t.symbol().name()); return;
    case TermKind::Compound: break;
  }
  if (t.is_cons()) {
    out += '[';
    Term cur = t;
    bool first = true;
    while (cur.is_cons()) {
      if (!first) out += ',';
      first = false;
      write_rec(cur.arg(0), names, out);
      cur = cur.arg(1);
    }
    if (!cur.is_nil()) {
      out += '|';
      write_rec(cur, names, out);
    }
    out += ']';
    return;
  }
  out += format_atom(t.symbol().name());
  out += '(';
  for (size_t i = 0; i < t.arity(); ++i) {
    if (i) out += ',';
    write_rec(t.arg(i), names, out);
  }
  out += ')';
}

}  // namespace

std::string format_atom(std::string_view name) {
  if (!atom_needs_quotes(name)) return std::string(name);
  std::string out = "'";
  for (char c : name) {
    switch (c) {
      case '\'': out += "\\'"; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '\'';
  return out;
}

std::string format_decimal(int64_t scaled) {
  std::string out;
  uint64_t mag = scaled < 0 ? uint64_t(-(scaled + 1)) + 1 : uint64_t(scaled);
  if (scaled < 0) out += '-';
  out += std::to_string(mag / kDecimalScale);
  std::string frac = std::to_string(mag % kDecimalScale);
  frac.insert(0, 4 - frac.size(), '0');
  while (frac.size() > 1 && frac.back() == '0') frac.pop_back();
  out += '.';
  out += frac;
  return out;
}

std::string format_term(const Term& t, const std::vector<std::string>* var_names) {
  std::string out;
  write_rec(t, var_names, out);
  return out;
}

// ---------------------------------------------------------------------------
// Reader

namespace {

enum class Tok { Name, QName, Var, Int, Dec, Str, Punct, End, Eof };

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  int64_t value = 0;
  bool layout_before = false;  // whitespace preceded the token
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : src_(s) {}

  Token next() {
    Token t;
    t.layout_before = skip_layout();
    t.line = line_;
    t.column = col_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::Eof;
      return t;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return number(t);
    if (c == '_' || std::isupper(static_cast<unsigned char>(c))) {
      t.kind = Tok::Var;
      while (pos_ < src_.size() && is_alnum(src_[pos_])) t.text += advance();
      return t;
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      t.kind = Tok::Name;
      while (pos_ < src_.size() && is_alnum(src_[pos_])) t.text += advance();
      return t;
    }
    if (c == '\'') {
      t.kind = Tok::QName;
      t.text = quoted('\'');
      return t;
    }
    if (c == '"') {
      t.kind = Tok::Str;
      t.text = quoted('"');
      return t;
    }
    if (c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}' || c == ',' || c == '|') {
      t.kind = Tok::Punct;
      t.text = advance();
      return t;
    }
    if (c == '!' || c == ';') {
      t.kind = Tok::Name;
      t.text = advance();
      return t;
    }
    if (c == '.' && (pos_ + 1 >= src_.size() || std::isspace(static_cast<unsigned char>(src_[pos_ + 1])) ||
                     src_[pos_ + 1] == '%')) {
      advance();
      t.kind = Tok::End;
      t.text = ".";
      return t;
    }
    if (is_symbol_char(c)) {
      t.kind = Tok::Name;
      while (pos_ < src_.size() && is_symbol_char(src_[pos_])) t.text += advance();
      return t;
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, line_, col_); }
  bool at_open_paren() const { return pos_ < src_.size() && src_[pos_] == '('; }

 private:
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  bool skip_layout() {
    bool any = false;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        any = true;
      } else if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        any = true;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        advance();
        advance();
        while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) advance();
        if (pos_ + 1 >= src_.size()) fail("unterminated block comment");
        advance();
        advance();
        any = true;
      } else {
        break;
      }
    }
    return any;
  }

  Token& number(Token& t) {
    std::string digits;
    if (src_[pos_] == '0' && pos_ + 2 < src_.size() && src_[pos_ + 1] == '\'') {
      advance();
      advance();
      t.kind = Tok::Int;
      char ch = advance();
      if (ch == '\\') ch = escape(advance());
      t.value = static_cast<unsigned char>(ch);
      return t;
    }
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) digits += advance();
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      advance();
      std::string frac;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) frac += advance();
      if (frac.size() > 4) fail("decimal literal exceeds 4 fractional digits");
      frac.append(4 - frac.size(), '0');
      t.kind = Tok::Dec;
      t.value = std::stoll(digits) * kDecimalScale + std::stoll(frac);
      return t;
    }
    t.kind = Tok::Int;
    try {
      t.value = std::stoll(digits);
    } catch (const std::out_of_range&) {
      fail("integer literal out of range");
    }
    return t;
  }

  static char escape(char c) {
    switch (c) {
      case 'n': return '\n';
      case 't': return '\t';
      case '0': return '\0';
      default: return c;
    }
  }

  std::string quoted(char q) {
    advance();
    std::string out;
    while (true) {
      if (pos_ >= src_.size()) fail("unterminated quoted text");
      char c = advance();
      if (c == q) {
        if (pos_ < src_.size() && src_[pos_] == q) {
          out += advance();
          continue;
        }
        return out;
      }
      if (c == '\\') {
        if (pos_ >= src_.size()) fail("unterminated escape");
        out += escape(advance());
        continue;
      }
      out += c;
    }
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

enum class OpType { XFX, XFY, YFX, FY, FX };

struct OpDef {
  int prec;
  OpType type;
};

const std::unordered_map<std::string, OpDef>& infix_ops() {
  static const std::unordered_map<std::string, OpDef> ops = {
      {":-", {1200, OpType::XFX}}, {"-->", {1200, OpType::XFX}}, {"as", {1120, OpType::XFX}},
      {";", {1100, OpType::XFY}},  {"->", {1050, OpType::XFY}},  {",", {1000, OpType::XFY}},
      {"=", {700, OpType::XFX}},   {"\\=", {700, OpType::XFX}},  {"==", {700, OpType::XFX}},
      {"\\==", {700, OpType::XFX}}, {"@<", {700, OpType::XFX}},  {"@>", {700, OpType::XFX}},
      {"@=<", {700, OpType::XFX}}, {"@>=", {700, OpType::XFX}},  {"=..", {700, OpType::XFX}},
      {"is", {700, OpType::XFX}},  {"=:=", {700, OpType::XFX}},  {"=\\=", {700, OpType::XFX}},
      {"<", {700, OpType::XFX}},   {">", {700, OpType::XFX}},    {"=<", {700, OpType::XFX}},
      {">=", {700, OpType::XFX}},  {"+", {500, OpType::YFX}},    {"-", {500, OpType::YFX}},
      {"/\\", {500, OpType::YFX}}, {"\\/", {500, OpType::YFX}},  {"*", {400, OpType::YFX}},
      {"/", {400, OpType::YFX}},   {"//", {400, OpType::YFX}},   {"mod", {400, OpType::YFX}},
      {"rem", {400, OpType::YFX}}, {"<<", {400, OpType::YFX}},   {">>", {400, OpType::YFX}},
      {"**", {200, OpType::XFX}},  {"^", {200, OpType::XFY}},
  };
  return ops;
}

const std::unordered_map<std::string, OpDef>& prefix_ops() {
  static const std::unordered_map<std::string, OpDef> ops = {
      {":-", {1200, OpType::FX}},      {"?-", {1200, OpType::FX}},
      {"table", {1150, OpType::FX}},   {"dynamic", {1150, OpType::FX}},
      {"use_incremental_dynamic", {1150, OpType::FX}},
      {"\\+", {900, OpType::FY}},      {"tnot", {900, OpType::FY}},
      {"-", {200, OpType::FY}},        {"+", {200, OpType::FY}},
  };
  return ops;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { tok_ = lex_.next(); }

  bool at_eof() const { return tok_.kind == Tok::Eof; }

  ReadTerm read_clause(bool require_end) {
    var_ids_.clear();
    names_.clear();
    ReadTerm rt;
    rt.line = tok_.line;
    rt.column = tok_.column;
    rt.term = parse(1200);
    if (tok_.kind == Tok::End) {
      advance();
    } else if (require_end || tok_.kind != Tok::Eof) {
      error("expected end of clause ('.')");
    }
    rt.var_names = names_;
    return rt;
  }

 private:
  void advance() { tok_ = lex_.next(); }
  [[noreturn]] void error(const std::string& msg) const { throw SyntaxError(msg, tok_.line, tok_.column); }

  bool is_punct(const char* p) const { return tok_.kind == Tok::Punct && tok_.text == p; }

  void expect_punct(const char* p) {
    if (!is_punct(p)) error(std::string("expected '") + p + "'");
    advance();
  }

  Term make_var(const std::string& name) {
    if (name == "_") {
      names_.push_back("_");
      return Term::var(static_cast<uint32_t>(names_.size() - 1));
    }
    auto it = var_ids_.find(name);
    if (it != var_ids_.end()) return Term::var(it->second);
    auto id = static_cast<uint32_t>(names_.size());
    names_.push_back(name);
    var_ids_.emplace(name, id);
    return Term::var(id);
  }

  // Tokens that can begin a term (used to decide prefix-operator vs atom).
  bool starts_term() const {
    switch (tok_.kind) {
      case Tok::Name:
        return !infix_ops().count(tok_.text) || prefix_ops().count(tok_.text) || lex_.at_open_paren();
      case Tok::QName:
      case Tok::Var:
      case Tok::Int:
      case Tok::Dec:
      case Tok::Str: return true;
      case Tok::Punct: return tok_.text == "(" || tok_.text == "[" || tok_.text == "{";
      default: return false;
    }
  }

  Term parse_arglist(Symbol functor) {
    advance();  // '('
    std::vector<Term> args;
    args.push_back(parse(999));
    while (is_punct(",")) {
      advance();
      args.push_back(parse(999));
    }
    expect_punct(")");
    return Term::compound(functor, std::move(args));
  }

  // Parses a primary term; sets `prec` to its priority.
  Term parse_primary(int max_prec, int& prec) {
    prec = 0;
    Token t = tok_;
    switch (t.kind) {
      case Tok::Int: advance(); return Term::integer(t.value);
      case Tok::Dec: advance(); return Term::decimal_scaled(t.value);
      case Tok::Var: advance(); return make_var(t.text);
      case Tok::Str: {
        advance();
        std::vector<Term> codes;
        for (unsigned char c : t.text) codes.push_back(Term::integer(c));
        return Term::list(codes);
      }
      case Tok::Punct: {
        if (t.text == "(") {
          advance();
          Term inner = parse(1200);
          expect_punct(")");
          return inner;
        }
        if (t.text == "[") {
          advance();
          if (is_punct("]")) {
            advance();
            return name_or_compound("[]", max_prec, prec);
          }
          std::vector<Term> items;
          items.push_back(parse(999));
          while (is_punct(",")) {
            advance();
            items.push_back(parse(999));
          }
          Term tail = Term::nil();
          if (is_punct("|")) {
            advance();
            tail = parse(999);
          }
          expect_punct("]");
          return Term::list(items, tail);
        }
        if (t.text == "{") {
          advance();
          if (is_punct("}")) {
            advance();
            return Term::atom("{}");
          }
          Term inner = parse(1200);
          expect_punct("}");
          return Term::compound("{}", {inner});
        }
        if (t.text == ",") error("unexpected ','");
        error("unexpected '" + t.text + "'");
      }
      case Tok::Name:
      case Tok::QName: {
        advance();
        if (lex_.at_open_paren() && !tok_.layout_before && is_punct("(")) return parse_arglist(Symbol::intern(t.text));
        if (is_punct("(") && !tok_.layout_before) return parse_arglist(Symbol::intern(t.text));
        if (t.kind == Tok::Name && t.text == "-" && !tok_.layout_before &&
            (tok_.kind == Tok::Int || tok_.kind == Tok::Dec)) {
          Token n = tok_;
          advance();
          return n.kind == Tok::Int ? Term::integer(-n.value) : Term::decimal_scaled(-n.value);
        }
        if (t.kind == Tok::Name) {
          auto it = prefix_ops().find(t.text);
          if (it != prefix_ops().end() && starts_term() && !(tok_.kind == Tok::Name && infix_ops().count(tok_.text) &&
                                                              !prefix_ops().count(tok_.text) && !lex_.at_open_paren())) {
            OpDef op = it->second;
            int p = op.prec;
            if (p > max_prec) p = 999;
            int arg_max = op.type == OpType::FY ? p : p - 1;
            Term arg = parse(arg_max);
            prec = p;
            return Term::compound(Symbol::intern(t.text), {arg});
          }
        }
        return name_or_compound(t.text, max_prec, prec);
      }
      case Tok::End: error("unexpected end of clause");
      case Tok::Eof: error("unexpected end of input");
    }
    error("unexpected token");
  }

  Term name_or_compound(const std::string& name, int, int& prec) {
    if (infix_ops().count(name) || prefix_ops().count(name)) prec = 0;
    return Term::atom(name);
  }

  Term parse(int max_prec) {
    int left_prec = 0;
    Term left = parse_primary(max_prec, left_prec);
    while (true) {
      std::string op_name;
      if (tok_.kind == Tok::Name) {
        op_name = tok_.text;
      } else if (tok_.kind == Tok::Punct && (tok_.text == "," || tok_.text == "|")) {
        op_name = tok_.text == "|" ? ";" : ",";
        if (tok_.text == "|" && max_prec < 1100) break;
      } else {
        break;
      }
      auto it = infix_ops().find(op_name);
      if (it == infix_ops().end()) break;
      OpDef op = it->second;
      if (op.prec > max_prec) break;
      int left_max = op.type == OpType::YFX ? op.prec : op.prec - 1;
      int right_max = op.type == OpType::XFY ? op.prec : op.prec - 1;
      if (left_prec > left_max) break;
      advance();
      Term right = parse(right_max);
      left = Term::compound(Symbol::intern(op_name), {left, right});
      left_prec = op.prec;
    }
    return left;
  }

  Lexer lex_;
  Token tok_;
  std::unordered_map<std::string, uint32_t> var_ids_;
  std::vector<std::string> names_;
};

}  // namespace

std::vector<ReadTerm> read_terms(std::string_view text) {
  Parser p(text);
  std::vector<ReadTerm> out;
  while (!p.at_eof()) out.push_back(p.read_clause(true));
  return out;
}

ReadTerm read_term(std::string_view text) {
  Parser p(text);
  if (p.at_eof()) throw SyntaxError("empty input", 1, 1);
  ReadTerm rt = p.read_clause(false);
  if (!p.at_eof()) throw SyntaxError("unexpected text after term", rt.line, rt.column);
  return rt;
}

}  // namespace tlpe
