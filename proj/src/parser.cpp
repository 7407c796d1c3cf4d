#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "probfp/errors.hpp"
#include "probfp/lang.hpp"

namespace probfp {

TermPtr Term::make_literal(double v, SourcePos pos) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::literal;
  t->literal = v;
  t->pos = pos;
  return t;
}

TermPtr Term::make_var(std::string name, SourcePos pos) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::var;
  t->vars.insert(name);
  t->name = std::move(name);
  t->pos = pos;
  return t;
}

TermPtr Term::make_binop(Op op, TermPtr l, TermPtr r, SourcePos pos) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::binop;
  t->op = op;
  t->vars = l->vars;
  t->vars.insert(r->vars.begin(), r->vars.end());
  t->left = std::move(l);
  t->right = std::move(r);
  t->pos = pos;
  return t;
}

bool same_shape(const Term& a, const Term& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Term::Kind::literal: return a.literal == b.literal;
    case Term::Kind::var: return a.name == b.name;
    case Term::Kind::binop: return a.op == b.op && same_shape(*a.left, *b.left) && same_shape(*a.right, *b.right);
  }
  return false;
}

namespace {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int prec(const Term& t) {
  if (t.kind != Term::Kind::binop) return 3;
  return (t.op == Op::add || t.op == Op::sub) ? 1 : 2;
}

void print(std::ostream& os, const Term& t) {
  switch (t.kind) {
    case Term::Kind::literal: os << format_number(t.literal); return;
    case Term::Kind::var: os << t.name; return;
    case Term::Kind::binop: break;
  }
  const int p = prec(t);
  const bool lp = prec(*t.left) < p;
  const bool rp = prec(*t.right) <= p;
  if (lp) os << '(';
  print(os, *t.left);
  if (lp) os << ')';
  os << ' ' << op_symbol(t.op) << ' ';
  if (rp) os << '(';
  print(os, *t.right);
  if (rp) os << ')';
}

enum class Tok { number, ident, plus, minus, star, slash, lparen, rparen, lbrace, rbrace, semi, assign, lt, gt, eqeq, end };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  SourcePos pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      const SourcePos pos{line_, col_};
      if (i_ >= s_.size()) {
        out.push_back({Tok::end, "", 0.0, pos});
        return out;
      }
      const char c = s_[i_];
      if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_ + 1])))) {
        out.push_back(number(pos));
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i_;
        while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
        out.push_back({Tok::ident, std::string(s_.substr(i_, j - i_)), 0.0, pos});
        advance(j - i_);
        continue;
      }
      auto two = s_.substr(i_, 2);
      if (two == ":=") {
        out.push_back({Tok::assign, ":=", 0.0, pos});
        advance(2);
        continue;
      }
      if (two == "==") {
        out.push_back({Tok::eqeq, "==", 0.0, pos});
        advance(2);
        continue;
      }
      static const std::map<char, Tok> singles{{'+', Tok::plus},   {'-', Tok::minus},  {'*', Tok::star},
                                               {'/', Tok::slash},  {'(', Tok::lparen}, {')', Tok::rparen},
                                               {'{', Tok::lbrace}, {'}', Tok::rbrace}, {';', Tok::semi},
                                               {'<', Tok::lt},     {'>', Tok::gt}};
      auto it = singles.find(c);
      if (it == singles.end()) throw syntax_error(std::string("unexpected character '") + c + "'", pos.line, pos.column);
      out.push_back({it->second, std::string(1, c), 0.0, pos});
      advance(1);
    }
  }

 private:
  void skip_space() {
    while (i_ < s_.size()) {
      const char c = s_[i_];
      if (c == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') advance(1);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
      } else {
        break;
      }
    }
  }

  void advance(std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i_) {
      if (s_[i_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  Token number(SourcePos pos) {
    std::size_t j = i_;
    while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
    if (j < s_.size() && s_[j] == '.') {
      ++j;
      while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
    }
    if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
      if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
        while (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) ++k;
        j = k;
      }
    }
    const std::string text(s_.substr(i_, j - i_));
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      throw syntax_error("malformed number '" + text + "'", pos.line, pos.column);
    advance(j - i_);
    return {Tok::number, text, v, pos};
  }

  std::string_view s_;
  std::size_t i_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  bool looks_like_program() const {
    const Token& a = t_[0];
    if (a.kind == Tok::lbrace) return true;
    if (a.kind == Tok::ident && (a.text == "skip" || a.text == "if")) return true;
    return a.kind == Tok::ident && t_.size() > 1 && t_[1].kind == Tok::assign;
  }

  TermPtr whole_term() {
    TermPtr t = term();
    expect_end();
    return t;
  }

  ProgramAst whole_program() {
    ProgramAst p{program()};
    expect_end();
    return p;
  }

 private:
  const Token& peek() const { return t_[i_]; }
  const Token& next() { return t_[i_++]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw syntax_error(msg, peek().pos.line, peek().pos.column);
  }
  void expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    ++i_;
  }
  void expect_end() {
    if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "'");
  }
  bool is_keyword(const Token& tk, const char* kw) const { return tk.kind == Tok::ident && tk.text == kw; }

  TermPtr term() {
    TermPtr l = product();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      const Token& op = next();
      TermPtr r = product();
      l = Term::make_binop(op.kind == Tok::plus ? Op::add : Op::sub, l, r, op.pos);
    }
    return l;
  }

  TermPtr product() {
    TermPtr l = factor();
    while (peek().kind == Tok::star || peek().kind == Tok::slash) {
      const Token& op = next();
      TermPtr r = factor();
      l = Term::make_binop(op.kind == Tok::star ? Op::mul : Op::div, l, r, op.pos);
    }
    return l;
  }

  TermPtr factor() {
    const Token& tk = peek();
    switch (tk.kind) {
      case Tok::number: next(); return Term::make_literal(tk.number, tk.pos);
      case Tok::minus: {
        next();
        if (peek().kind != Tok::number) fail("unary minus is only allowed on numeric literals");
        const Token& n = next();
        return Term::make_literal(-n.number, tk.pos);
      }
      case Tok::ident:
        if (is_keyword(tk, "skip") || is_keyword(tk, "if") || is_keyword(tk, "then") || is_keyword(tk, "else"))
          fail("keyword '" + tk.text + "' cannot appear in a term");
        next();
        return Term::make_var(tk.text, tk.pos);
      case Tok::lparen: {
        next();
        TermPtr t = term();
        expect(Tok::rparen, "')'");
        return t;
      }
      default: fail("expected a number, variable or '('");
    }
  }

  double signed_number() {
    bool neg = false;
    if (peek().kind == Tok::minus) {
      next();
      neg = true;
    }
    if (peek().kind != Tok::number) fail("expected a numeric literal");
    const double v = next().number;
    return neg ? -v : v;
  }

  StmtPtr program() {
    const SourcePos pos = peek().pos;
    std::vector<StmtPtr> body{statement()};
    while (peek().kind == Tok::semi) {
      next();
      body.push_back(statement());
    }
    if (body.size() == 1) return body.front();
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::seq;
    s->body = std::move(body);
    s->pos = pos;
    return s;
  }

  StmtPtr statement() {
    const Token& tk = peek();
    auto s = std::make_shared<Stmt>();
    s->pos = tk.pos;
    if (tk.kind == Tok::lbrace) {
      next();
      StmtPtr inner = program();
      expect(Tok::rbrace, "'}'");
      return inner;
    }
    if (is_keyword(tk, "skip")) {
      next();
      s->kind = Stmt::Kind::skip;
      return s;
    }
    if (is_keyword(tk, "if")) {
      next();
      s->kind = Stmt::Kind::ite;
      s->test.lhs = term();
      switch (peek().kind) {
        case Tok::lt: s->test.cmp = Test::Cmp::lt; break;
        case Tok::gt: s->test.cmp = Test::Cmp::gt; break;
        case Tok::eqeq: s->test.cmp = Test::Cmp::eq; break;
        default: fail("expected '<', '>' or '=='");
      }
      next();
      s->test.rhs = signed_number();
      if (!is_keyword(peek(), "then")) fail("expected 'then'");
      next();
      s->then_branch = statement();
      if (!is_keyword(peek(), "else")) fail("expected 'else'");
      next();
      s->else_branch = statement();
      return s;
    }
    if (tk.kind == Tok::ident) {
      next();
      expect(Tok::assign, "':='");
      s->kind = Stmt::Kind::assign;
      s->target = tk.text;
      s->value = term();
      return s;
    }
    fail("expected a statement");
  }

  std::vector<Token> t_;
  std::size_t i_ = 0;
};

void print_stmt(std::ostream& os, const Stmt& s) {
  switch (s.kind) {
    case Stmt::Kind::skip: os << "skip"; return;
    case Stmt::Kind::assign:
      os << s.target << " := ";
      print(os, *s.value);
      return;
    case Stmt::Kind::seq:
      for (std::size_t i = 0; i < s.body.size(); ++i) {
        if (i) os << "; ";
        const bool brace = s.body[i]->kind == Stmt::Kind::seq;
        if (brace) os << "{ ";
        print_stmt(os, *s.body[i]);
        if (brace) os << " }";
      }
      return;
    case Stmt::Kind::ite: {
      os << "if ";
      print(os, *s.test.lhs);
      os << (s.test.cmp == Test::Cmp::lt ? " < " : s.test.cmp == Test::Cmp::gt ? " > " : " == ");
      os << format_number(s.test.rhs) << " then { ";
      print_stmt(os, *s.then_branch);
      os << " } else { ";
      print_stmt(os, *s.else_branch);
      os << " }";
      return;
    }
  }
}

void collect(const Term& t, std::vector<const Term*>& vars) {
  if (t.kind == Term::Kind::var) vars.push_back(&t);
  if (t.kind == Term::Kind::binop) {
    collect(*t.left, vars);
    collect(*t.right, vars);
  }
}

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  print(os, t);
  return os.str();
}

std::string to_string(const ProgramAst& p) {
  std::ostringstream os;
  print_stmt(os, *p.root);
  return os.str();
}

Parsed parse(std::string_view source) {
  Parser parser(Lexer(source).run());
  if (parser.looks_like_program()) return parser.whole_program();
  return parser.whole_term();
}

TermPtr parse_term(std::string_view source) {
  Parsed p = parse(source);
  if (auto* t = std::get_if<TermPtr>(&p)) return *t;
  throw unsupported_semantics("program statements are parsed but have no analysis semantics; supply a term");
}

TreeCheck check_tree(const Term& t) {
  std::vector<const Term*> vars;
  collect(t, vars);
  std::map<std::string, int> seen;
  for (const Term* v : vars) {
    if (seen[v->name]++ > 0) {
      TreeCheck r;
      r.ok = false;
      r.variable = v->name;
      for (const Term* w : vars)
        if (w->name == v->name) r.positions.push_back(w->pos);
      return r;
    }
  }
  return {};
}

}  // namespace probfp
