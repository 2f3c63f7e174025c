#include "disti/parse.hpp"

#include <cctype>
#include <vector>

namespace disti {

ParseError::ParseError(const std::string& msg, int line, int col)
    : std::runtime_error("parse error at " + std::to_string(line) + ":" + std::to_string(col) +
                         ": " + msg),
      line(line),
      col(col) {}

namespace {

struct Token {
  enum class K { Ident, Int, Punct, End };
  K k;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) {
    int line = 1, col = 1;
    size_t i = 0;
    auto bump = [&](size_t n) {
      for (size_t j = 0; j < n; ++j) {
        if (src[i + j] == '\n') { ++line; col = 1; } else { ++col; }
      }
      i += n;
    };
    while (i < src.size()) {
      char c = src[i];
      if (c == '#') {  // comment to end of line
        while (i < src.size() && src[i] != '\n') bump(1);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) { bump(1); continue; }
      int tl = line, tc = col;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i;
        while (j < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
          ++j;
        toks_.push_back({Token::K::Ident, src.substr(i, j - i), tl, tc});
        bump(j - i);
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t j = i;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        toks_.push_back({Token::K::Int, src.substr(i, j - i), tl, tc});
        bump(j - i);
        continue;
      }
      // multi-char punctuation first
      static const char* two[] = {":=", "<=", ">=", "!=", ".."};
      bool matched = false;
      for (const char* t : two) {
        if (src.compare(i, 2, t) == 0) {
          toks_.push_back({Token::K::Punct, t, tl, tc});
          bump(2);
          matched = true;
          break;
        }
      }
      if (matched) continue;
      static const std::string singles = "{}[]();,+-*/<>=:";
      if (singles.find(c) != std::string::npos) {
        toks_.push_back({Token::K::Punct, std::string(1, c), tl, tc});
        bump(1);
        continue;
      }
      throw ParseError(std::string("unexpected character '") + c + "'", tl, tc);
    }
    toks_.push_back({Token::K::End, "", line, col});
  }

  std::vector<Token> toks_;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : toks_(Lexer(src).toks_) {}

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  size_t mark() const { return pos_; }
  void reset(size_t m) { pos_ = m; }

  bool at_punct(const std::string& p) const {
    return peek().k == Token::K::Punct && peek().text == p;
  }
  bool at_kw(const std::string& w) const {
    return peek().k == Token::K::Ident && peek().text == w;
  }
  bool eat_punct(const std::string& p) {
    if (!at_punct(p)) return false;
    ++pos_;
    return true;
  }
  bool eat_kw(const std::string& w) {
    if (!at_kw(w)) return false;
    ++pos_;
    return true;
  }
  void expect_punct(const std::string& p) {
    if (!eat_punct(p)) fail("expected '" + p + "'");
  }
  void expect_kw(const std::string& w) {
    if (!eat_kw(w)) fail("expected '" + w + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.k == Token::K::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + ", got " + got, t.line, t.col);
  }

  static bool is_keyword(const std::string& s) {
    static const std::set<std::string> kws = {"skip", "if",   "else", "while", "not",
                                              "and",  "or",   "true", "false", "min",
                                              "pow2", "shr",  "table1", "table2"};
    return kws.count(s) > 0;
  }

  std::string ident() {
    if (peek().k != Token::K::Ident || is_keyword(peek().text)) fail("expected identifier");
    return next().text;
  }

  Int int_lit() {
    if (peek().k != Token::K::Int) fail("expected integer literal");
    return Int(next().text);
  }

  // ---- expressions -------------------------------------------------------

  ExprP expr() {
    ExprP e = term();
    for (;;) {
      if (eat_punct("+"))
        e = ex::add(e, term());
      else if (eat_punct("-"))
        e = ex::sub(e, term());
      else
        return e;
    }
  }

  ExprP term() {
    ExprP e = factor();
    while (eat_punct("*")) e = ex::mul(e, factor());
    return e;
  }

  ExprP factor() {
    if (eat_punct("-")) return ex::neg(factor());
    return atom();
  }

  ExprP atom() {
    if (peek().k == Token::K::Int) return ex::cst(int_lit());
    if (eat_punct("(")) {
      ExprP e = expr();
      expect_punct(")");
      return e;
    }
    if (at_kw("pow2")) {
      next();
      expect_punct("(");
      ExprP a = expr();
      expect_punct(")");
      return ex::pow2(a);
    }
    if (at_kw("shr") || at_kw("min")) {
      bool is_shr = peek().text == "shr";
      next();
      expect_punct("(");
      ExprP a = expr();
      expect_punct(",");
      ExprP b = expr();
      expect_punct(")");
      return is_shr ? ex::shr(a, b) : ex::min(a, b);
    }
    std::string name = ident();
    if (eat_punct("[")) {
      ExprP a = expr();
      if (eat_punct(",")) {
        ExprP b = expr();
        expect_punct("]");
        tab2_refs.insert(name);
        return ex::tab2(name, a, b);
      }
      expect_punct("]");
      tab1_refs.insert(name);
      return ex::tab1(name, a);
    }
    return ex::var(name);
  }

  // ---- predicates ---------------------------------------------------------

  PredP pred() { return or_pred(); }

  PredP or_pred() {
    PredP p = and_pred();
    while (eat_kw("or")) p = pr::disj(p, and_pred());
    return p;
  }

  PredP and_pred() {
    PredP p = not_pred();
    while (eat_kw("and")) p = pr::conj(p, not_pred());
    return p;
  }

  PredP not_pred() {
    if (eat_kw("not")) return pr::neg(not_pred());
    if (eat_kw("true")) return pr::truth();
    if (eat_kw("false")) return pr::falsity();
    if (at_punct("(")) {
      // Could be a parenthesized predicate or an expression starting a
      // comparison; try the predicate reading and back off on failure.
      size_t m = mark();
      try {
        next();
        PredP p = pred();
        expect_punct(")");
        if (at_relop()) throw ParseError("wrong arm", 0, 0);  // "(e) < e" case
        return p;
      } catch (const ParseError&) {
        reset(m);
      }
    }
    return comparison();
  }

  bool at_relop() const {
    if (peek().k != Token::K::Punct) return false;
    const std::string& t = peek().text;
    return t == "<" || t == "<=" || t == "=" || t == "!=" || t == ">=" || t == ">";
  }

  RelOp relop() {
    if (!at_relop()) fail("expected comparison operator");
    std::string t = next().text;
    if (t == "<") return RelOp::Lt;
    if (t == "<=") return RelOp::Le;
    if (t == "=") return RelOp::Eq;
    if (t == "!=") return RelOp::Ne;
    if (t == ">=") return RelOp::Ge;
    return RelOp::Gt;
  }

  PredP comparison() {
    ExprP a = expr();
    RelOp op = relop();
    ExprP b = expr();
    return pr::cmp(a, op, b);
  }

  // ---- programs ----------------------------------------------------------

  Rat probability() {
    const Token& t = peek();
    Int num = int_lit();
    Rat p(num);
    if (eat_punct("/")) p = Rat(num, int_lit());
    if (p < 0 || p > 1)
      throw ParseError("probability literal " + rat_str(p) + " outside [0,1]", t.line, t.col);
    return p;
  }

  ProgramP statement() {
    if (eat_kw("skip")) return pg::skip();
    if (at_kw("if")) {
      next();
      expect_punct("(");
      PredP g = pred();
      expect_punct(")");
      expect_punct("{");
      ProgramP then_branch = program();
      expect_punct("}");
      ProgramP else_branch = pg::skip();
      if (eat_kw("else")) {
        expect_punct("{");
        else_branch = program();
        expect_punct("}");
      }
      return pg::ite(g, then_branch, else_branch);
    }
    if (at_kw("while")) {
      next();
      expect_punct("(");
      PredP g = pred();
      expect_punct(")");
      expect_punct("{");
      ProgramP body = program();
      expect_punct("}");
      return pg::while_loop(g, body);
    }
    if (at_punct("{")) {
      next();
      ProgramP a = program();
      expect_punct("}");
      expect_punct("[");
      Rat p = probability();
      expect_punct("]");
      expect_punct("{");
      ProgramP b = program();
      expect_punct("}");
      return pg::pchoice(a, p, b);
    }
    std::string x = ident();
    expect_punct(":=");
    return pg::assign(x, expr());
  }

  ProgramP program() {
    std::vector<ProgramP> stmts;
    stmts.push_back(statement());
    while (eat_punct(";")) stmts.push_back(statement());
    ProgramP out = stmts.back();
    for (auto it = stmts.rbegin() + 1; it != stmts.rend(); ++it) out = pg::seq(*it, out);
    return out;
  }

  // ---- table declarations ------------------------------------------------

  std::vector<Int> int_list_body() {
    std::vector<Int> out;
    if (at_punct("]")) return out;
    for (;;) {
      bool negative = eat_punct("-");
      Int v = int_lit();
      out.push_back(negative ? -v : v);
      if (!eat_punct(",")) return out;
    }
  }

  void table_decls(TableEnv& env) {
    for (;;) {
      if (eat_kw("table1")) {
        std::string name = ident();
        expect_punct("=");
        expect_punct("[");
        env.tables1[name] = int_list_body();
        expect_punct("]");
      } else if (eat_kw("table2")) {
        std::string name = ident();
        const Token& where = peek();
        expect_punct("=");
        expect_punct("[");
        std::vector<std::vector<Int>> rows;
        for (;;) {
          expect_punct("[");
          rows.push_back(int_list_body());
          expect_punct("]");
          if (!eat_punct(",")) break;
        }
        expect_punct("]");
        for (const auto& r : rows)
          if (r.size() != rows.front().size())
            throw ParseError("table2 " + name + " is not rectangular", where.line, where.col);
        env.tables2[name] = rows;
      } else {
        return;
      }
    }
  }

  std::set<std::string> tab1_refs, tab2_refs;
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace

ParsedProgram parse_program(const std::string& source) {
  Parser p(source);
  auto env = std::make_shared<TableEnv>();
  p.table_decls(*env);
  ProgramP prog = p.program();
  if (p.peek().k != Token::K::End) p.fail("trailing input after program");
  for (const auto& t : p.tab1_refs)
    if (!env->has1(t)) throw ParseError("reference to undeclared table1 '" + t + "'", 1, 1);
  for (const auto& t : p.tab2_refs)
    if (!env->has2(t)) throw ParseError("reference to undeclared table2 '" + t + "'", 1, 1);
  return {prog, env};
}

ExprP parse_expr(const std::string& source) {
  Parser p(source);
  ExprP e = p.expr();
  if (p.peek().k != Token::K::End) p.fail("trailing input after expression");
  return e;
}

PredP parse_pred(const std::string& source) {
  Parser p(source);
  PredP b = p.pred();
  if (p.peek().k != Token::K::End) p.fail("trailing input after predicate");
  return b;
}

}  // namespace disti
