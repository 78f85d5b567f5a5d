#include <algorithm>
#include <cctype>
#include <set>

#include "qrobust/lang.hpp"

namespace qrobust {

namespace {

enum class Tok { Ident, Number, Ket, Bra, Assign, Arrow, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  bool imaginary = false;
  SourceLoc loc;
};

bool is_ket_label(const std::string& s) {
  if (s == "+" || s == "-") return true;
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c == '0' || c == '1'; });
}

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  // Tries |label> or <label| at i.
  auto scan_delimited = [&](char open, char close) -> std::string {
    if (src[i] != open) return {};
    std::size_t j = i + 1;
    while (j < src.size() && (src[j] == '0' || src[j] == '1' || src[j] == '+' || src[j] == '-')) ++j;
    if (j >= src.size() || src[j] != close) return {};
    std::string label = src.substr(i + 1, j - i - 1);
    return is_ket_label(label) ? label : std::string{};
  };

  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t;
    t.loc = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      t.kind = Tok::Number;
      t.text = src.substr(i, j - i);
      if (j < src.size() && src[j] == 'i' &&
          (j + 1 >= src.size() || !(std::isalnum(static_cast<unsigned char>(src[j + 1])) || src[j + 1] == '_'))) {
        t.imaginary = true;
        ++j;
      }
      advance(j - i);
    } else if (c == '|' && !scan_delimited('|', '>').empty()) {
      t.kind = Tok::Ket;
      t.text = scan_delimited('|', '>');
      advance(t.text.size() + 2);
    } else if (c == '<') {
      std::string label = scan_delimited('<', '|');
      if (label.empty()) throw SyntaxError("malformed bra", line, col);
      t.kind = Tok::Bra;
      t.text = label;
      advance(label.size() + 2);
    } else if (c == ':' && i + 1 < src.size() && src[i + 1] == '=') {
      t.kind = Tok::Assign;
      t.text = ":=";
      advance(2);
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      t.kind = Tok::Arrow;
      t.text = "->";
      advance(2);
    } else if (std::string(";,()[]{}=+-*/:|").find(c) != std::string::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      advance(1);
    } else {
      throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.loc = {line, col};
  out.push_back(end);
  return out;
}

const std::set<std::string> kKeywords = {"program", "qubits", "ancilla", "int", "param", "gate", "channel",
                                         "measurement", "skip", "case", "measure", "while", "do", "end", "noisy"};

// Functions callable in expressions besides parameterised builtins.
const std::set<std::string> kFunctions = {"sqrt", "proj", "kron", "compose", "kronpow", "unitary", "dagger", "REP3"};

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  SourceFile file() {
    SourceFile f;
    // The header is optional so that bare statement lists such as "skip;" parse.
    f.name = "main";
    if (peek_keyword("program")) {
      next();
      f.name = expect_ident("program name").text;
    }
    while (peek_keyword("qubits") || peek_keyword("ancilla") || peek_keyword("int")) {
      const Token kw = next();
      const VarType ty = kw.text == "qubits" ? VarType::Qubit : kw.text == "ancilla" ? VarType::Ancilla : VarType::Int;
      bool any = false;
      while (peek().kind == Tok::Ident && !kKeywords.count(peek().text)) {
        Token v = next();
        if (declared(v.text) || names_.count(v.text)) throw SyntaxError("variable '" + v.text + "' declared twice", v.loc.line, v.loc.column);
        f.decls.push_back({v.text, ty, v.loc});
        vars_.push_back(v.text);
        any = true;
        if (peek_punct(",")) next();
      }
      if (!any) fail("expected variable names after '" + kw.text + "'");
      expect_punct(";");
    }
    while (peek_keyword("param") || peek_keyword("gate") || peek_keyword("channel") || peek_keyword("measurement")) {
      f.defs.push_back(definition());
    }
    f.body = stmt_list();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after program body");
    return f;
  }

  ExprPtr standalone_expr() {
    allow_free_names_ = true;
    ExprPtr e = expr();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after expression");
    return e;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string> vars_;
  std::map<std::string, Definition::Kind> names_;
  std::map<std::string, std::vector<std::string>> measurement_labels_;
  bool allow_free_names_ = false;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, peek().loc.line, peek().loc.column); }
  bool peek_keyword(const std::string& kw, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == kw;
  }
  bool peek_punct(const std::string& p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  void expect_keyword(const std::string& kw) {
    if (!peek_keyword(kw)) fail("expected '" + kw + "'");
    next();
  }
  void expect_punct(const std::string& p) {
    if (!peek_punct(p)) fail("expected '" + p + "'" + (peek().kind == Tok::End ? " at end of input" : ", found '" + peek().text + "'"));
    next();
  }
  Token expect_ident(const std::string& what) {
    if (peek().kind != Tok::Ident || kKeywords.count(peek().text)) fail("expected " + what);
    return next();
  }
  bool declared(const std::string& v) const { return std::find(vars_.begin(), vars_.end(), v) != vars_.end(); }

  Definition definition() {
    const Token kw = next();
    Definition d;
    d.loc = kw.loc;
    d.kind = kw.text == "param"     ? Definition::Kind::Param
             : kw.text == "gate"    ? Definition::Kind::Gate
             : kw.text == "channel" ? Definition::Kind::Channel
                                    : Definition::Kind::Measurement;
    const Token name = expect_ident("definition name");
    d.name = name.text;
    if (names_.count(d.name) || declared(d.name) || builtins::is_gate(d.name) || builtins::is_channel(d.name) ||
        kFunctions.count(d.name) || builtin_measurement(d.name)) {
      throw SyntaxError("name '" + d.name + "' is already defined or shadows a builtin", name.loc.line, name.loc.column);
    }
    expect_punct("=");
    if (d.kind == Definition::Kind::Measurement) {
      expect_punct("{");
      std::vector<std::string> labels;
      while (true) {
        const std::string label = parse_label();
        expect_punct(":");
        if (std::find(labels.begin(), labels.end(), label) != labels.end()) fail("duplicate measurement label '" + label + "'");
        labels.push_back(label);
        d.outcomes.emplace_back(label, expr());
        if (peek_punct(",")) {
          next();
          continue;
        }
        break;
      }
      expect_punct("}");
      measurement_labels_[d.name] = labels;
    } else {
      d.value = expr();
    }
    expect_punct(";");
    names_[d.name] = d.kind;
    return d;
  }

  std::string parse_label() {
    const Token& t = peek();
    if ((t.kind == Tok::Ident && !kKeywords.count(t.text)) || t.kind == Tok::Number) {
      if (t.imaginary) fail("invalid label");
      return next().text;
    }
    if (peek_punct("+") || peek_punct("-")) return next().text;
    fail("expected an outcome label");
  }

  // ---- statements ----

  bool at_list_end() const {
    return peek().kind == Tok::End || peek_keyword("end") || peek_punct("|") || peek_punct(")");
  }

  Program stmt_list() {
    std::vector<Program> items;
    if (at_list_end()) fail("expected a statement");
    while (true) {
      auto parsed = stmt();
      items.insert(items.end(), parsed.begin(), parsed.end());
      if (peek_punct(";")) {
        next();
        if (at_list_end()) break;
        continue;
      }
      if (at_list_end()) break;
      fail("expected ';' between statements, found '" + peek().text + "'");
    }
    return items.size() == 1 ? items.front() : Program::seq(std::move(items));
  }

  std::vector<std::string> var_list(bool bracketed) {
    std::vector<std::string> vs;
    if (bracketed) expect_punct("[");
    while (true) {
      const Token v = expect_ident("variable name");
      if (!declared(v.text)) throw UnknownVariableError(std::to_string(v.loc.line) + ":" + std::to_string(v.loc.column) + ": unknown variable '" + v.text + "'");
      if (std::find(vs.begin(), vs.end(), v.text) != vs.end()) throw SyntaxError("variable '" + v.text + "' repeated", v.loc.line, v.loc.column);
      vs.push_back(v.text);
      if (peek_punct(",")) {
        next();
        continue;
      }
      break;
    }
    if (bracketed) expect_punct("]");
    return vs;
  }

  template <class F>
  Program located(SourceLoc loc, F make) {
    Program p = make();
    auto n = std::make_shared<Node>(p.node());
    n->loc = loc;
    return Program(n);
  }

  std::vector<Program> stmt() {
    const SourceLoc loc = peek().loc;
    if (peek_keyword("skip")) {
      next();
      return {located(loc, [] { return Program::skip(); })};
    }
    if (peek_punct("(")) {
      next();
      Program inner = stmt_list();
      expect_punct(")");
      return {inner};
    }
    if (peek_keyword("case")) return {case_stmt()};
    if (peek_keyword("while")) return {while_stmt()};
    if (peek().kind == Tok::Ident && !kKeywords.count(peek().text)) {
      std::vector<std::string> targets = var_list(false);
      if (peek().kind != Tok::Assign) fail("expected ':='");
      next();
      if (peek().kind == Tok::Ket) {
        const Token k = next();
        if (targets.size() != 1) throw SyntaxError("initialisation takes exactly one variable", loc.line, loc.column);
        return init_sugar(targets[0], k, loc);
      }
      ExprPtr g = gate_ref();
      std::vector<std::string> args = var_list(true);
      if (args != targets) throw SyntaxError("left- and right-hand variable lists differ", loc.line, loc.column);
      ExprPtr prob, chan;
      if (peek_keyword("noisy")) {
        next();
        expect_punct("(");
        prob = expr();
        expect_punct(",");
        chan = expr();
        expect_punct(")");
      }
      return {located(loc, [&] { return Program::unitary(targets, g, prob, chan); })};
    }
    fail("expected a statement, found '" + peek().text + "'");
  }

  std::vector<Program> init_sugar(const std::string& v, const Token& ket, SourceLoc loc) {
    std::vector<Program> out{located(loc, [&] { return Program::init(v); })};
    auto gate_stmt = [&](const char* g) { return located(loc, [&] { return Program::unitary({v}, Expr::ident(g)); }); };
    if (ket.text == "0") return out;
    if (ket.text == "1") {
      out.push_back(gate_stmt("X"));
    } else if (ket.text == "+") {
      out.push_back(gate_stmt("H"));
    } else if (ket.text == "-") {
      out.push_back(gate_stmt("X"));
      out.push_back(gate_stmt("H"));
    } else {
      throw SyntaxError("initialisation supports |0>, |1>, |+> and |->", ket.loc.line, ket.loc.column);
    }
    return out;
  }

  ExprPtr gate_ref() {
    const Token& t = peek();
    if (t.kind == Tok::Number && peek_punct("-", 1) && peek(2).kind == Tok::Ident) {
      const Token pat = next();
      next();
      const Token name = next();
      if (name.text != "TOFFOLI" && name.text != "CNOT") throw SyntaxError("control patterns apply to TOFFOLI or CNOT", name.loc.line, name.loc.column);
      if (!std::all_of(pat.text.begin(), pat.text.end(), [](char c) { return c == '0' || c == '1'; }))
        throw SyntaxError("control pattern must consist of 0 and 1", pat.loc.line, pat.loc.column);
      if (pat.text.size() != (name.text == "TOFFOLI" ? 2u : 1u))
        throw SyntaxError("control pattern length does not match " + name.text, pat.loc.line, pat.loc.column);
      auto e = std::make_shared<Expr>(*Expr::controlled_x(pat.text));
      e->text = name.text;
      e->loc = pat.loc;
      return e;
    }
    if (t.kind == Tok::Ident) {
      const Token name = t;
      ExprPtr e = primary();
      if (e->kind == Expr::Kind::Ident) {
        auto it = names_.find(e->text);
        const bool ok = (it != names_.end() && it->second == Definition::Kind::Gate) || builtins::is_gate(e->text);
        if (!ok) throw UnknownGateError(std::to_string(name.loc.line) + ":" + std::to_string(name.loc.column) + ": unknown gate '" + e->text + "'");
      }
      return e;
    }
    if (peek_punct("(")) return primary();
    fail("expected a gate");
  }

  std::string measurement_name() {
    const Token m = expect_ident("measurement name");
    if (!builtin_measurement(m.text)) {
      auto it = names_.find(m.text);
      if (it == names_.end() || it->second != Definition::Kind::Measurement)
        throw UnknownGateError(std::to_string(m.loc.line) + ":" + std::to_string(m.loc.column) + ": unknown measurement '" + m.text + "'");
    }
    return m.text;
  }

  std::vector<std::string> labels_of(const std::string& m) const {
    if (auto b = builtin_measurement(m)) {
      std::vector<std::string> out;
      for (const auto& o : b->outcomes()) out.push_back(o.first);
      return out;
    }
    return measurement_labels_.at(m);
  }

  Program case_stmt() {
    const SourceLoc loc = peek().loc;
    expect_keyword("case");
    expect_keyword("measure");
    const std::string m = measurement_name();
    std::vector<std::string> vs = var_list(true);
    std::vector<std::string> labels;
    std::vector<Program> branches;
    if (!peek_punct("|")) fail("case needs at least one branch");
    while (peek_punct("|")) {
      next();
      const Token lt = peek();
      std::string label = parse_label();
      if (std::find(labels.begin(), labels.end(), label) != labels.end())
        throw SyntaxError("duplicate case branch '" + label + "'", lt.loc.line, lt.loc.column);
      const auto known = labels_of(m);
      if (std::find(known.begin(), known.end(), label) == known.end())
        throw SyntaxError("measurement '" + m + "' has no outcome '" + label + "'", lt.loc.line, lt.loc.column);
      if (peek().kind != Tok::Arrow) fail("expected '->'");
      next();
      labels.push_back(label);
      branches.push_back(stmt_list());
    }
    expect_keyword("end");
    for (const auto& l : labels_of(m))
      if (std::find(labels.begin(), labels.end(), l) == labels.end())
        throw SyntaxError("case is missing a branch for outcome '" + l + "'", loc.line, loc.column);
    return located(loc, [&] { return Program::case_of(vs, m, labels, branches); });
  }

  Program while_stmt() {
    const SourceLoc loc = peek().loc;
    expect_keyword("while");
    expect_keyword("measure");
    const std::string m = measurement_name();
    std::vector<std::string> vs = var_list(true);
    expect_punct("=");
    if (peek().kind != Tok::Number || peek().text != "1") fail("loop guard must be '= 1'");
    next();
    expect_keyword("do");
    Program body = stmt_list();
    expect_keyword("end");
    return located(loc, [&] { return Program::while_loop(vs, m, body); });
  }

  // ---- expressions ----

  ExprPtr make(Expr::Kind k, std::string text, std::vector<ExprPtr> args, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->text = std::move(text);
    e->args = std::move(args);
    e->loc = loc;
    return e;
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    while (peek_punct("+") || peek_punct("-")) {
      const Token op = next();
      lhs = make(Expr::Kind::Binary, op.text, {lhs, term()}, op.loc);
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (peek_punct("*") || peek_punct("/")) {
      const Token op = next();
      lhs = make(Expr::Kind::Binary, op.text, {lhs, unary()}, op.loc);
    }
    return lhs;
  }

  ExprPtr unary() {
    if (peek_punct("-")) {
      const Token op = next();
      return make(Expr::Kind::Unary, "-", {unary()}, op.loc);
    }
    return primary();
  }

  void check_name(const Token& t) {
    if (allow_free_names_) return;
    if (names_.count(t.text) || builtins::is_gate(t.text) || builtins::is_channel(t.text)) return;
    throw UnknownGateError(std::to_string(t.loc.line) + ":" + std::to_string(t.loc.column) + ": unknown name '" + t.text + "'");
  }

  ExprPtr primary() {
    const Token t = peek();
    if (t.kind == Tok::Number) {
      next();
      if (peek_punct("-") && peek(1).kind == Tok::Ident && (peek(1).text == "TOFFOLI" || peek(1).text == "CNOT")) {
        --pos_;
        return gate_ref();
      }
      auto e = make(Expr::Kind::Number, t.text, {}, t.loc);
      std::const_pointer_cast<Expr>(e)->imaginary = t.imaginary;
      return e;
    }
    if (t.kind == Tok::Ket) {
      next();
      if (peek().kind == Tok::Bra) {
        const Token b = next();
        auto e = make(Expr::Kind::Outer, t.text, {}, t.loc);
        std::const_pointer_cast<Expr>(e)->pattern = b.text;
        return e;
      }
      return make(Expr::Kind::Ket, t.text, {}, t.loc);
    }
    if (t.kind == Tok::Ident && !kKeywords.count(t.text)) {
      next();
      if (peek_punct("(")) {
        next();
        std::vector<ExprPtr> args;
        const bool bits = t.text == "proj";
        if (!peek_punct(")")) {
          while (true) {
            if (bits) {
              const Token b = peek();
              if (b.kind != Tok::Number || b.imaginary ||
                  !std::all_of(b.text.begin(), b.text.end(), [](char c) { return c == '0' || c == '1'; }))
                fail("proj expects bit strings");
              next();
              args.push_back(make(Expr::Kind::BitString, b.text, {}, b.loc));
            } else {
              args.push_back(expr());
            }
            if (peek_punct(",")) {
              next();
              continue;
            }
            break;
          }
        }
        expect_punct(")");
        if (!allow_free_names_ && !kFunctions.count(t.text) && !builtins::is_gate(t.text) && !builtins::is_channel(t.text))
          throw UnknownGateError(std::to_string(t.loc.line) + ":" + std::to_string(t.loc.column) + ": unknown function '" + t.text + "'");
        return make(Expr::Kind::Call, t.text, std::move(args), t.loc);
      }
      check_name(t);
      return make(Expr::Kind::Ident, t.text, {}, t.loc);
    }
    if (peek_punct("(")) {
      next();
      ExprPtr e = expr();
      expect_punct(")");
      return e;
    }
    if (peek_punct("[")) {
      next();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Matrix;
      e->loc = t.loc;
      while (true) {
        expect_punct("[");
        std::size_t count = 0;
        while (true) {
          e->args.push_back(expr());
          ++count;
          if (peek_punct(",")) {
            next();
            continue;
          }
          break;
        }
        expect_punct("]");
        e->row_sizes.push_back(count);
        if (peek_punct(",")) {
          next();
          continue;
        }
        break;
      }
      expect_punct("]");
      return e;
    }
    if (peek_punct("{")) {
      next();
      std::vector<ExprPtr> ops;
      while (true) {
        ops.push_back(expr());
        if (peek_punct(",")) {
          next();
          continue;
        }
        break;
      }
      expect_punct("}");
      return make(Expr::Kind::KrausList, "", std::move(ops), t.loc);
    }
    fail(t.kind == Tok::End ? "unexpected end of input in expression" : "unexpected '" + t.text + "' in expression");
  }
};

}  // namespace

SourceFile parse(const std::string& text) { return Parser(text).file(); }

ExprPtr parse_expr(const std::string& text) { return Parser(text).standalone_expr(); }

}  // namespace qrobust
