#include "ska/dsl.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>

namespace ska {

// ---------------------------------------------------------------------------
// AST construction and comparison
// ---------------------------------------------------------------------------

ExprPtr Expr::num(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Number;
  e->number = v;
  return e;
}

ExprPtr Expr::ident(std::string n) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Ident;
  e->name = std::move(n);
  return e;
}

ExprPtr Expr::binary(char op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

ExprPtr Expr::call(std::string n, std::vector<ExprPtr> a) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Call;
  e->name = std::move(n);
  e->args = std::move(a);
  return e;
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Number:
      return a.number == b.number;
    case Expr::Kind::Ident:
      return a.name == b.name;
    case Expr::Kind::Binary:
      return a.op == b.op && equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
    case Expr::Kind::Call: {
      if (a.name != b.name || a.args.size() != b.args.size()) return false;
      for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!equal(*a.args[i], *b.args[i])) return false;
      return true;
    }
  }
  return false;
}

namespace {
bool equal_bodies(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!equal(*a[i], *b[i])) return false;
  return true;
}
bool equal_args(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!equal(*a[i], *b[i])) return false;
  return true;
}
}  // namespace

bool equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Stmt::Kind::Assign:
      return a.name == b.name && equal(*a.value, *b.value);
    case Stmt::Kind::Call:
      return a.name == b.name && equal_args(a.args, b.args);
    case Stmt::Kind::Measure:
      return a.name == b.name && a.routine == b.routine &&
             equal_args(a.args, b.args);
    case Stmt::Kind::MeasureBlock:
      return a.title == b.title && equal_bodies(a.body, b.body);
    case Stmt::Kind::For:
      return a.name == b.name && equal(*a.from, *b.from) &&
             equal(*a.to, *b.to) &&
             a.step.multiplicative == b.step.multiplicative &&
             equal(*a.step.factor, *b.step.factor) &&
             equal_bodies(a.body, b.body);
  }
  return false;
}

bool equal(const SkiAst& a, const SkiAst& b) {
  return equal_bodies(a.items, b.items);
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum class Kind { Newline, Ident, Number, String, Punct, Eof };
  Kind kind = Kind::Eof;
  std::string text;
  double num = 0.0;
  char punct = 0;
  int line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      Token t = next();
      bool eof = t.kind == Token::Kind::Eof;
      out.push_back(std::move(t));
      if (eof) break;
    }
    return out;
  }

private:
  [[noreturn]] void fail(const std::string& msg) {
    throw ScriptError(msg, line_, col_);
  }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  char peek2() const { return pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0'; }

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

  Token make(Token::Kind k, int line, int col) {
    Token t;
    t.kind = k;
    t.line = line;
    t.col = col;
    return t;
  }

  Token next() {
    while (pos_ < src_.size()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else {
        break;
      }
    }
    int line = line_, col = col_;
    if (pos_ >= src_.size()) return make(Token::Kind::Eof, line, col);
    char c = peek();
    if (c == '\n') {
      advance();
      return make(Token::Kind::Newline, line, col);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return lex_number(line, col);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return lex_ident(line, col);
    if (c == '"') return lex_string(line, col);
    if (std::strchr("=(),+-*/:", c)) {
      advance();
      Token t = make(Token::Kind::Punct, line, col);
      t.punct = c;
      return t;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Token lex_number(int line, int col) {
    std::string text;
    while (std::isdigit(static_cast<unsigned char>(peek()))) text += advance();
    if (peek() == '.') {
      if (!std::isdigit(static_cast<unsigned char>(peek2())))
        fail("malformed number: expected digits after the decimal point");
      text += advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) text += advance();
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek2())) || peek2() == '+' ||
         peek2() == '-'))
      fail("scientific notation is not supported; write the number out");
    Token t = make(Token::Kind::Number, line, col);
    t.text = text;
    t.num = std::strtod(text.c_str(), nullptr);
    return t;
  }

  Token lex_ident(int line, int col) {
    std::string text;
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
      text += advance();
    Token t = make(Token::Kind::Ident, line, col);
    t.text = std::move(text);
    return t;
  }

  Token lex_string(int line, int col) {
    advance();  // opening quote
    std::string text;
    while (true) {
      if (pos_ >= src_.size() || peek() == '\n') fail("unterminated string");
      char c = advance();
      if (c == '"') break;
      text += c;
    }
    Token t = make(Token::Kind::String, line, col);
    t.text = std::move(text);
    return t;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  SkiAst run() {
    SkiAst ast;
    parse_stmts(ast.items, /*stop=*/"", /*in_block=*/false);
    if (!at_eof()) fail(cur(), "expected a statement");
    return ast;
  }

private:
  const Token& cur() const { return toks_[pos_]; }

  bool at_eof() const { return cur().kind == Token::Kind::Eof; }
  bool at_punct(char c) const {
    return cur().kind == Token::Kind::Punct && cur().punct == c;
  }
  bool at_ident(const char* text) const {
    return cur().kind == Token::Kind::Ident && cur().text == text;
  }

  [[noreturn]] void fail(const Token& t, const std::string& msg) {
    throw ScriptError(msg, t.line, t.col);
  }

  Token take() { return toks_[pos_++]; }

  Token expect_punct(char c, const char* what) {
    if (!at_punct(c)) fail(cur(), std::string("expected '") + c + "' " + what);
    return take();
  }

  Token expect_ident(const char* what) {
    if (cur().kind != Token::Kind::Ident)
      fail(cur(), std::string("expected ") + what);
    return take();
  }

  Token expect_keyword(const char* kw) {
    if (!at_ident(kw)) fail(cur(), std::string("expected '") + kw + "'");
    return take();
  }

  void skip_newlines() {
    while (cur().kind == Token::Kind::Newline) take();
  }

  /// A simple statement ends at a newline, at end of input, or right before
  /// a closing keyword ('od' / 'end').
  void expect_terminator() {
    if (cur().kind == Token::Kind::Newline) {
      take();
      return;
    }
    if (at_eof() || at_ident("od") || at_ident("end")) return;
    fail(cur(), "expected end of statement");
  }

  void parse_stmts(std::vector<StmtPtr>& out, const std::string& stop,
                   bool in_block) {
    while (true) {
      skip_newlines();
      if (at_eof()) {
        if (!stop.empty())
          fail(cur(), "unexpected end of input; expected '" + stop + "'");
        return;
      }
      if (!stop.empty() && at_ident(stop.c_str())) return;
      out.push_back(parse_stmt(in_block));
      expect_terminator();
    }
  }

  StmtPtr parse_stmt(bool in_block) {
    const Token& t = cur();
    if (t.kind != Token::Kind::Ident) fail(t, "expected a statement");
    if (t.text == "measure") return parse_measure();
    if (t.text == "begin") {
      if (in_block)
        fail(t, "measurement blocks cannot nest");
      return parse_mblock();
    }
    if (t.text == "for") return parse_for(in_block);
    // assign or call, decided by the next token
    Token name = take();
    auto s = std::make_shared<Stmt>();
    s->line = name.line;
    s->col = name.col;
    s->name = name.text;
    if (at_punct('=')) {
      take();
      s->kind = Stmt::Kind::Assign;
      s->value = parse_expr();
      return s;
    }
    if (at_punct('(')) {
      s->kind = Stmt::Kind::Call;
      s->args = parse_arg_list();
      return s;
    }
    fail(cur(), "expected '=' or '(' after identifier");
  }

  StmtPtr parse_measure() {
    Token kw = take();
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::Measure;
    s->line = kw.line;
    s->col = kw.col;
    s->name = expect_ident("a communicator name after 'measure'").text;
    expect_punct(':', "between communicator and routine");
    s->routine = expect_ident("a routine name").text;
    if (!at_punct('(')) fail(cur(), "expected '(' after routine name");
    s->args = parse_arg_list();
    return s;
  }

  StmtPtr parse_mblock() {
    Token kw = take();
    expect_keyword("measurement");
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::MeasureBlock;
    s->line = kw.line;
    s->col = kw.col;
    if (cur().kind != Token::Kind::String)
      fail(cur(), "expected a quoted title after 'begin measurement'");
    s->title = take().text;
    parse_stmts(s->body, /*stop=*/"end", /*in_block=*/true);
    expect_keyword("end");
    expect_keyword("measurement");
    return s;
  }

  StmtPtr parse_for(bool in_block) {
    Token kw = take();
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::For;
    s->line = kw.line;
    s->col = kw.col;
    s->name = expect_ident("a loop variable after 'for'").text;
    expect_punct('=', "after the loop variable");
    s->from = parse_expr();
    expect_keyword("to");
    s->to = parse_expr();
    expect_keyword("step");
    if (at_punct('*')) {
      take();
      s->step.multiplicative = true;
    }
    s->step.factor = parse_expr();
    expect_keyword("do");
    parse_stmts(s->body, /*stop=*/"od", in_block);
    expect_keyword("od");
    return s;
  }

  std::vector<ExprPtr> parse_arg_list() {
    expect_punct('(', "to open the argument list");
    std::vector<ExprPtr> args;
    if (!at_punct(')')) {
      args.push_back(parse_expr());
      while (at_punct(',')) {
        take();
        args.push_back(parse_expr());
      }
    }
    expect_punct(')', "to close the argument list");
    return args;
  }

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    while (at_punct('+') || at_punct('-')) {
      Token op = take();
      ExprPtr r = parse_term();
      ExprPtr b = Expr::binary(op.punct, std::move(e), std::move(r));
      b->line = op.line;
      b->col = op.col;
      e = std::move(b);
    }
    return e;
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    while (at_punct('*') || at_punct('/')) {
      Token op = take();
      ExprPtr r = parse_factor();
      ExprPtr b = Expr::binary(op.punct, std::move(e), std::move(r));
      b->line = op.line;
      b->col = op.col;
      e = std::move(b);
    }
    return e;
  }

  ExprPtr parse_factor() {
    const Token& t = cur();
    if (t.kind == Token::Kind::Number) {
      Token n = take();
      ExprPtr e = Expr::num(n.num);
      e->line = n.line;
      e->col = n.col;
      return e;
    }
    if (t.kind == Token::Kind::Ident) {
      Token n = take();
      if (at_punct('(')) {
        ExprPtr e = Expr::call(n.text, parse_arg_list());
        e->line = n.line;
        e->col = n.col;
        return e;
      }
      ExprPtr e = Expr::ident(n.text);
      e->line = n.line;
      e->col = n.col;
      return e;
    }
    if (at_punct('(')) {
      take();
      ExprPtr e = parse_expr();
      expect_punct(')', "to close the parenthesized expression");
      return e;
    }
    fail(t, "expected a number, identifier, or parenthesized expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

int precedence(char op) { return (op == '+' || op == '-') ? 1 : 2; }

void print_expr(std::ostringstream& os, const Expr& e, int parent_prec,
                bool rhs_of_parent) {
  switch (e.kind) {
    case Expr::Kind::Number: {
      char buf[64];
      if (e.number == std::floor(e.number) && std::fabs(e.number) < 1e15)
        std::snprintf(buf, sizeof buf, "%.0f", e.number);
      else
        std::snprintf(buf, sizeof buf, "%g", e.number);
      os << buf;
      return;
    }
    case Expr::Kind::Ident:
      os << e.name;
      return;
    case Expr::Kind::Call: {
      os << e.name << "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, *e.args[i], 0, false);
      }
      os << ")";
      return;
    }
    case Expr::Kind::Binary: {
      int prec = precedence(e.op);
      bool parens = prec < parent_prec || (prec == parent_prec && rhs_of_parent);
      if (parens) os << "(";
      print_expr(os, *e.lhs, prec, false);
      os << " " << e.op << " ";
      print_expr(os, *e.rhs, prec, true);
      if (parens) os << ")";
      return;
    }
  }
}

void print_stmt(std::ostringstream& os, const Stmt& s, int depth) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  switch (s.kind) {
    case Stmt::Kind::Assign:
      os << pad << s.name << " = ";
      print_expr(os, *s.value, 0, false);
      os << "\n";
      return;
    case Stmt::Kind::Call: {
      os << pad << s.name << "(";
      for (std::size_t i = 0; i < s.args.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, *s.args[i], 0, false);
      }
      os << ")\n";
      return;
    }
    case Stmt::Kind::Measure: {
      os << pad << "measure " << s.name << " : " << s.routine << "(";
      for (std::size_t i = 0; i < s.args.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, *s.args[i], 0, false);
      }
      os << ")\n";
      return;
    }
    case Stmt::Kind::MeasureBlock:
      os << pad << "begin measurement \"" << s.title << "\"\n";
      for (const StmtPtr& c : s.body) print_stmt(os, *c, depth + 1);
      os << pad << "end measurement\n";
      return;
    case Stmt::Kind::For:
      os << pad << "for " << s.name << " = ";
      print_expr(os, *s.from, 0, false);
      os << " to ";
      print_expr(os, *s.to, 0, false);
      os << " step ";
      if (s.step.multiplicative) os << "*";
      print_expr(os, *s.step.factor, 0, false);
      os << " do\n";
      for (const StmtPtr& c : s.body) print_stmt(os, *c, depth + 1);
      os << pad << "od\n";
      return;
  }
}

}  // namespace

SkiAst parse(const std::string& text) {
  Lexer lx(text);
  Parser p(lx.run());
  return p.run();
}

std::string print(const SkiAst& ast) {
  std::ostringstream os;
  for (const StmtPtr& s : ast.items) print_stmt(os, *s, 0);
  return os.str();
}

std::string print(const Expr& e) {
  std::ostringstream os;
  print_expr(os, e, 0, false);
  return os.str();
}

// ---------------------------------------------------------------------------
// Loop expansion
// ---------------------------------------------------------------------------

std::vector<std::int64_t> expand_for(double from, double to,
                                     bool multiplicative, double factor) {
  if (!std::isfinite(from) || !std::isfinite(to) || !std::isfinite(factor))
    throw ScriptError("loop bounds and step must be finite");
  if (multiplicative) {
    if (factor <= 1.0)
      throw ScriptError(
          "multiplicative step factor must be greater than 1 (loop would "
          "never finish)");
    if (from < 1.0)
      throw ScriptError("a multiplicative range must start at 1 or above");
  } else if (factor <= 0.0) {
    throw ScriptError(
        "additive step must be positive (loop would never finish)");
  }
  std::vector<std::int64_t> out;
  for (double x = from; x <= to; x = multiplicative ? x * factor : x + factor) {
    auto v = static_cast<std::int64_t>(std::floor(x + 0.5));
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  return out;
}

}  // namespace ska
