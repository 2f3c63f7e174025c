#include "disti/lang.hpp"

#include <algorithm>
#include <sstream>

namespace disti {

bool is_valid_var_name(const std::string& s) {
  if (s.empty()) return false;
  auto head = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto rest = [&](char c) { return head(c) || std::isdigit(static_cast<unsigned char>(c)); };
  if (!head(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), rest);
}

ProgState::ProgState(std::map<VarName, Int> bindings) {
  for (auto& [x, v] : bindings)
    if (v != 0) bindings_.emplace(x, std::move(v));
}

Int ProgState::get(const VarName& x) const {
  auto it = bindings_.find(x);
  return it == bindings_.end() ? Int(0) : it->second;
}

ProgState ProgState::with(const VarName& x, Int value) const {
  ProgState out = *this;
  if (value == 0)
    out.bindings_.erase(x);
  else
    out.bindings_[x] = std::move(value);
  return out;
}

bool ProgState::operator<(const ProgState& o) const {
  return std::lexicographical_compare(
      bindings_.begin(), bindings_.end(), o.bindings_.begin(), o.bindings_.end(),
      [](const auto& l, const auto& r) {
        if (l.first != r.first) return l.first < r.first;
        return l.second < r.second;
      });
}

std::string ProgState::str(const std::vector<VarName>& order) const {
  std::vector<VarName> names;
  for (const auto& x : order)
    if (std::find(names.begin(), names.end(), x) == names.end()) names.push_back(x);
  for (const auto& [x, v] : bindings_)
    if (std::find(names.begin(), names.end(), x) == names.end()) names.push_back(x);
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& x : names) {
    if (!first) os << ',';
    first = false;
    os << x << '=' << get(x).str();
  }
  os << '}';
  return os.str();
}

TableEnvP empty_env() {
  static const TableEnvP env = std::make_shared<TableEnv>();
  return env;
}

// --------------------------------------------------------------------------
// Expression builders
// --------------------------------------------------------------------------

namespace ex {

static ExprP node(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

ExprP cst(Int v) { return node({Expr::K::Const, std::move(v), "", nullptr, nullptr}); }
ExprP var(const VarName& x) { return node({Expr::K::Var, 0, x, nullptr, nullptr}); }
ExprP add(ExprP a, ExprP b) { return node({Expr::K::Add, 0, "", a, b}); }
ExprP sub(ExprP a, ExprP b) { return node({Expr::K::Sub, 0, "", a, b}); }
ExprP mul(ExprP a, ExprP b) { return node({Expr::K::Mul, 0, "", a, b}); }

ExprP neg(ExprP a) {
  if (a->k == Expr::K::Const) return cst(-a->c);  // canonical: no neg(const) nodes
  return node({Expr::K::Neg, 0, "", a, nullptr});
}

ExprP pow2(ExprP a) { return node({Expr::K::Pow2, 0, "", a, nullptr}); }
ExprP shr(ExprP a, ExprP b) { return node({Expr::K::Shr, 0, "", a, b}); }
ExprP min(ExprP a, ExprP b) { return node({Expr::K::Min, 0, "", a, b}); }
ExprP tab1(const std::string& t, ExprP idx) { return node({Expr::K::Tab1, 0, t, idx, nullptr}); }
ExprP tab2(const std::string& t, ExprP row, ExprP col) {
  return node({Expr::K::Tab2, 0, t, row, col});
}

}  // namespace ex

const char* relop_str(RelOp op) {
  switch (op) {
    case RelOp::Lt: return "<";
    case RelOp::Le: return "<=";
    case RelOp::Eq: return "=";
    case RelOp::Ne: return "!=";
    case RelOp::Ge: return ">=";
    case RelOp::Gt: return ">";
  }
  return "?";
}

template <class T>
static bool rel_holds_impl(const T& a, RelOp op, const T& b) {
  switch (op) {
    case RelOp::Lt: return a < b;
    case RelOp::Le: return a <= b;
    case RelOp::Eq: return a == b;
    case RelOp::Ne: return a != b;
    case RelOp::Ge: return a >= b;
    case RelOp::Gt: return a > b;
  }
  return false;
}

bool rel_holds(const Int& a, RelOp op, const Int& b) { return rel_holds_impl(a, op, b); }
bool rel_holds_rat(const Rat& a, RelOp op, const Rat& b) { return rel_holds_impl(a, op, b); }

namespace pr {

static PredP node(Pred p) { return std::make_shared<const Pred>(std::move(p)); }

PredP cmp(ExprP a, RelOp op, ExprP b) {
  return node({Pred::K::Cmp, op, a, b, nullptr, nullptr});
}
PredP conj(PredP a, PredP b) {
  return node({Pred::K::And, RelOp::Eq, nullptr, nullptr, a, b});
}
PredP disj(PredP a, PredP b) {
  return node({Pred::K::Or, RelOp::Eq, nullptr, nullptr, a, b});
}
PredP neg(PredP a) { return node({Pred::K::Not, RelOp::Eq, nullptr, nullptr, a, nullptr}); }
PredP truth() { return node({Pred::K::True, RelOp::Eq, nullptr, nullptr, nullptr, nullptr}); }
PredP falsity() { return node({Pred::K::False, RelOp::Eq, nullptr, nullptr, nullptr, nullptr}); }

PredP between(ExprP lo, ExprP x, ExprP hi) {
  return conj(cmp(lo, RelOp::Le, x), cmp(x, RelOp::Le, hi));
}

}  // namespace pr

EvalFault::EvalFault(const std::string& what, ProgState st)
    : std::runtime_error(what + " at state " + st.str()), state(std::move(st)) {}

// Floor division by 2^k; k >= 0 guaranteed by the caller's fault check.
static Int shr_floor(const Int& a, const Int& k) {
  if (k > 1u << 20) return a < 0 ? Int(-1) : Int(0);
  unsigned sh = static_cast<unsigned>(k);
  if (a >= 0) return a >> sh;
  Int d = int_pow2(k);
  Int q = a / d;          // truncates toward zero
  if (q * d != a) q -= 1; // floor for negative a
  return q;
}

Int eval_expr(const ExprP& e, const ProgState& s, const TableEnv& env) {
  switch (e->k) {
    case Expr::K::Const: return e->c;
    case Expr::K::Var: return s.get(e->name);
    case Expr::K::Add: return eval_expr(e->a, s, env) + eval_expr(e->b, s, env);
    case Expr::K::Sub: return eval_expr(e->a, s, env) - eval_expr(e->b, s, env);
    case Expr::K::Mul: return eval_expr(e->a, s, env) * eval_expr(e->b, s, env);
    case Expr::K::Neg: return -eval_expr(e->a, s, env);
    case Expr::K::Pow2: {
      Int x = eval_expr(e->a, s, env);
      if (x < 0) throw EvalFault("pow2 with negative exponent " + x.str(), s);
      if (x > 1u << 20) throw EvalFault("pow2 exponent too large: " + x.str(), s);
      return int_pow2(x);
    }
    case Expr::K::Shr: {
      Int a = eval_expr(e->a, s, env);
      Int k = eval_expr(e->b, s, env);
      if (k < 0) throw EvalFault("shr with negative shift " + k.str(), s);
      return shr_floor(a, k);
    }
    case Expr::K::Min: {
      Int a = eval_expr(e->a, s, env);
      Int b = eval_expr(e->b, s, env);
      return a <= b ? a : b;
    }
    case Expr::K::Tab1: {
      auto it = env.tables1.find(e->name);
      if (it == env.tables1.end()) throw EvalFault("undeclared table " + e->name, s);
      Int i = eval_expr(e->a, s, env);
      if (i < 0 || i >= Int(it->second.size())) return 0;  // off-table reads are 0
      return it->second[static_cast<size_t>(i)];
    }
    case Expr::K::Tab2: {
      auto it = env.tables2.find(e->name);
      if (it == env.tables2.end()) throw EvalFault("undeclared table " + e->name, s);
      Int r = eval_expr(e->a, s, env);
      Int c = eval_expr(e->b, s, env);
      if (r < 0 || r >= Int(it->second.size())) return 0;
      const auto& row = it->second[static_cast<size_t>(r)];
      if (c < 0 || c >= Int(row.size())) return 0;
      return row[static_cast<size_t>(c)];
    }
  }
  throw std::logic_error("eval_expr: bad node");
}

bool eval_pred(const PredP& b, const ProgState& s, const TableEnv& env) {
  switch (b->k) {
    case Pred::K::Cmp: return rel_holds(eval_expr(b->ea, s, env), b->op, eval_expr(b->eb, s, env));
    case Pred::K::And: return eval_pred(b->a, s, env) && eval_pred(b->b, s, env);
    case Pred::K::Or: return eval_pred(b->a, s, env) || eval_pred(b->b, s, env);
    case Pred::K::Not: return !eval_pred(b->a, s, env);
    case Pred::K::True: return true;
    case Pred::K::False: return false;
  }
  throw std::logic_error("eval_pred: bad node");
}

void expr_vars(const ExprP& e, std::set<VarName>& out) {
  if (!e) return;
  if (e->k == Expr::K::Var) out.insert(e->name);
  expr_vars(e->a, out);
  expr_vars(e->b, out);
}

void pred_vars(const PredP& b, std::set<VarName>& out) {
  if (!b) return;
  expr_vars(b->ea, out);
  expr_vars(b->eb, out);
  pred_vars(b->a, out);
  pred_vars(b->b, out);
}

void expr_tables(const ExprP& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->k == Expr::K::Tab1 || e->k == Expr::K::Tab2) out.insert(e->name);
  expr_tables(e->a, out);
  expr_tables(e->b, out);
}

bool expr_eq(const ExprP& a, const ExprP& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->k != b->k) return false;
  switch (a->k) {
    case Expr::K::Const: return a->c == b->c;
    case Expr::K::Var: return a->name == b->name;
    case Expr::K::Tab1: return a->name == b->name && expr_eq(a->a, b->a);
    case Expr::K::Tab2: return a->name == b->name && expr_eq(a->a, b->a) && expr_eq(a->b, b->b);
    default: return expr_eq(a->a, b->a) && expr_eq(a->b, b->b);
  }
}

bool pred_eq(const PredP& a, const PredP& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->k != b->k) return false;
  if (a->k == Pred::K::Cmp)
    return a->op == b->op && expr_eq(a->ea, b->ea) && expr_eq(a->eb, b->eb);
  return pred_eq(a->a, b->a) && pred_eq(a->b, b->b);
}

ExprP expr_subst(const ExprP& e, const VarName& x, const Int& v) {
  if (!e) return e;
  switch (e->k) {
    case Expr::K::Const: return e;
    case Expr::K::Var: return e->name == x ? ex::cst(v) : e;
    case Expr::K::Add: return ex::add(expr_subst(e->a, x, v), expr_subst(e->b, x, v));
    case Expr::K::Sub: return ex::sub(expr_subst(e->a, x, v), expr_subst(e->b, x, v));
    case Expr::K::Mul: return ex::mul(expr_subst(e->a, x, v), expr_subst(e->b, x, v));
    case Expr::K::Neg: return ex::neg(expr_subst(e->a, x, v));
    case Expr::K::Pow2: return ex::pow2(expr_subst(e->a, x, v));
    case Expr::K::Shr: return ex::shr(expr_subst(e->a, x, v), expr_subst(e->b, x, v));
    case Expr::K::Min: return ex::min(expr_subst(e->a, x, v), expr_subst(e->b, x, v));
    case Expr::K::Tab1: return ex::tab1(e->name, expr_subst(e->a, x, v));
    case Expr::K::Tab2: return ex::tab2(e->name, expr_subst(e->a, x, v), expr_subst(e->b, x, v));
  }
  return e;
}

PredP pred_subst(const PredP& b, const VarName& x, const Int& v) {
  if (!b) return b;
  switch (b->k) {
    case Pred::K::Cmp: return pr::cmp(expr_subst(b->ea, x, v), b->op, expr_subst(b->eb, x, v));
    case Pred::K::And: return pr::conj(pred_subst(b->a, x, v), pred_subst(b->b, x, v));
    case Pred::K::Or: return pr::disj(pred_subst(b->a, x, v), pred_subst(b->b, x, v));
    case Pred::K::Not: return pr::neg(pred_subst(b->a, x, v));
    default: return b;
  }
}

// --------------------------------------------------------------------------
// Rendering. The printer and parser agree: parse(expr_str(e)) == e.
// --------------------------------------------------------------------------

// Precedence levels: 0 additive, 1 multiplicative, 2 unary/atoms.
static void expr_print(std::ostream& os, const ExprP& e, int parent_level) {
  auto paren = [&](int level, auto&& body) {
    if (level < parent_level) os << '(';
    body();
    if (level < parent_level) os << ')';
  };
  switch (e->k) {
    case Expr::K::Const: os << e->c.str(); break;
    case Expr::K::Var: os << e->name; break;
    case Expr::K::Add:
      paren(0, [&] { expr_print(os, e->a, 0); os << " + "; expr_print(os, e->b, 1); });
      break;
    case Expr::K::Sub:
      paren(0, [&] { expr_print(os, e->a, 0); os << " - "; expr_print(os, e->b, 1); });
      break;
    case Expr::K::Mul:
      paren(1, [&] { expr_print(os, e->a, 1); os << " * "; expr_print(os, e->b, 2); });
      break;
    case Expr::K::Neg:
      paren(2, [&] { os << '-'; expr_print(os, e->a, 2); });
      break;
    case Expr::K::Pow2:
      os << "pow2("; expr_print(os, e->a, 0); os << ')';
      break;
    case Expr::K::Shr:
      os << "shr("; expr_print(os, e->a, 0); os << ", "; expr_print(os, e->b, 0); os << ')';
      break;
    case Expr::K::Min:
      os << "min("; expr_print(os, e->a, 0); os << ", "; expr_print(os, e->b, 0); os << ')';
      break;
    case Expr::K::Tab1:
      os << e->name << '['; expr_print(os, e->a, 0); os << ']';
      break;
    case Expr::K::Tab2:
      os << e->name << '['; expr_print(os, e->a, 0); os << ", "; expr_print(os, e->b, 0); os << ']';
      break;
  }
}

std::string expr_str(const ExprP& e) {
  std::ostringstream os;
  expr_print(os, e, 0);
  return os.str();
}

// Levels: 0 or, 1 and, 2 not/atoms.
static void pred_print(std::ostream& os, const PredP& b, int parent_level) {
  auto paren = [&](int level, auto&& body) {
    if (level < parent_level) os << '(';
    body();
    if (level < parent_level) os << ')';
  };
  switch (b->k) {
    case Pred::K::Cmp:
      expr_print(os, b->ea, 0);
      os << ' ' << relop_str(b->op) << ' ';
      expr_print(os, b->eb, 0);
      break;
    case Pred::K::And:
      paren(1, [&] { pred_print(os, b->a, 1); os << " and "; pred_print(os, b->b, 2); });
      break;
    case Pred::K::Or:
      paren(0, [&] { pred_print(os, b->a, 0); os << " or "; pred_print(os, b->b, 1); });
      break;
    case Pred::K::Not:
      os << "not (";
      pred_print(os, b->a, 0);
      os << ')';
      break;
    case Pred::K::True: os << "true"; break;
    case Pred::K::False: os << "false"; break;
  }
}

std::string pred_str(const PredP& b) {
  std::ostringstream os;
  // Comparisons are atoms of the pred grammar but contain expressions, so a
  // bare Cmp never needs parens at the top level.
  pred_print(os, b, 0);
  return os.str();
}

// --------------------------------------------------------------------------
// Programs
// --------------------------------------------------------------------------

namespace pg {

static ProgramP node(Program p) { return std::make_shared<const Program>(std::move(p)); }

ProgramP skip() {
  return node({Program::K::Skip, "", nullptr, 0, nullptr, nullptr, nullptr});
}

ProgramP assign(const VarName& x, ExprP e) {
  return node({Program::K::Assign, x, e, 0, nullptr, nullptr, nullptr});
}

ProgramP pchoice(ProgramP a, Rat p, ProgramP b) {
  if (p < 0 || p > 1) throw std::invalid_argument("pchoice probability outside [0,1]");
  return node({Program::K::PChoice, "", nullptr, std::move(p), nullptr, a, b});
}

ProgramP seq(ProgramP a, ProgramP b) {
  return node({Program::K::Seq, "", nullptr, 0, nullptr, a, b});
}

ProgramP seq(std::initializer_list<ProgramP> parts) {
  std::vector<ProgramP> v(parts);
  if (v.empty()) return skip();
  ProgramP out = v.back();
  for (auto it = v.rbegin() + 1; it != v.rend(); ++it) out = seq(*it, out);
  return out;
}

ProgramP ite(PredP g, ProgramP then_branch, ProgramP else_branch) {
  return node({Program::K::Ite, "", nullptr, 0, g, then_branch, else_branch});
}

ProgramP while_loop(PredP g, ProgramP body) {
  return node({Program::K::While, "", nullptr, 0, g, body, nullptr});
}

}  // namespace pg

bool program_eq(const ProgramP& a, const ProgramP& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->k != b->k) return false;
  switch (a->k) {
    case Program::K::Skip: return true;
    case Program::K::Assign: return a->var == b->var && expr_eq(a->e, b->e);
    case Program::K::PChoice:
      return a->p == b->p && program_eq(a->a, b->a) && program_eq(a->b, b->b);
    case Program::K::Seq: return program_eq(a->a, b->a) && program_eq(a->b, b->b);
    case Program::K::Ite:
      return pred_eq(a->guard, b->guard) && program_eq(a->a, b->a) && program_eq(a->b, b->b);
    case Program::K::While: return pred_eq(a->guard, b->guard) && program_eq(a->a, b->a);
  }
  return false;
}

bool is_loop_free(const ProgramP& c) {
  if (!c) return true;
  if (c->k == Program::K::While) return false;
  return is_loop_free(c->a) && is_loop_free(c->b);
}

static void collect_rw(const ProgramP& c, std::set<VarName>& reads, std::set<VarName>& writes) {
  if (!c) return;
  switch (c->k) {
    case Program::K::Skip: break;
    case Program::K::Assign:
      writes.insert(c->var);
      expr_vars(c->e, reads);
      break;
    case Program::K::PChoice:
    case Program::K::Seq:
      collect_rw(c->a, reads, writes);
      collect_rw(c->b, reads, writes);
      break;
    case Program::K::Ite:
      pred_vars(c->guard, reads);
      collect_rw(c->a, reads, writes);
      collect_rw(c->b, reads, writes);
      break;
    case Program::K::While:
      pred_vars(c->guard, reads);
      collect_rw(c->a, reads, writes);
      break;
  }
}

std::set<VarName> read_vars(const ProgramP& c) {
  std::set<VarName> r, w;
  collect_rw(c, r, w);
  return r;
}

std::set<VarName> written_vars(const ProgramP& c) {
  std::set<VarName> r, w;
  collect_rw(c, r, w);
  return w;
}

std::set<VarName> unmodified_vars(const ProgramP& c) {
  std::set<VarName> r, w;
  collect_rw(c, r, w);
  std::set<VarName> out;
  for (const auto& x : r)
    if (!w.count(x)) out.insert(x);
  return out;
}

static void program_print(std::ostream& os, const ProgramP& c, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  switch (c->k) {
    case Program::K::Skip: os << pad << "skip"; break;
    case Program::K::Assign: os << pad << c->var << " := " << expr_str(c->e); break;
    case Program::K::PChoice:
      os << pad << "{\n";
      program_print(os, c->a, indent + 1);
      os << '\n' << pad << "} [" << rat_str(c->p) << "] {\n";
      program_print(os, c->b, indent + 1);
      os << '\n' << pad << '}';
      break;
    case Program::K::Seq:
      program_print(os, c->a, indent);
      os << " ;\n";
      program_print(os, c->b, indent);
      break;
    case Program::K::Ite:
      os << pad << "if (" << pred_str(c->guard) << ") {\n";
      program_print(os, c->a, indent + 1);
      os << '\n' << pad << "} else {\n";
      program_print(os, c->b, indent + 1);
      os << '\n' << pad << '}';
      break;
    case Program::K::While:
      os << pad << "while (" << pred_str(c->guard) << ") {\n";
      program_print(os, c->a, indent + 1);
      os << '\n' << pad << '}';
      break;
  }
}

std::string program_str(const ProgramP& c, int indent) {
  std::ostringstream os;
  program_print(os, c, indent);
  return os.str();
}

// --------------------------------------------------------------------------
// Affine decomposition
// --------------------------------------------------------------------------

namespace {

struct Affine {
  Int coeff;  // coefficient of x
  ExprP rest; // x-free remainder
};

ExprP fold_add(const ExprP& a, const ExprP& b) {
  if (a->k == Expr::K::Const && b->k == Expr::K::Const) return ex::cst(a->c + b->c);
  if (a->k == Expr::K::Const && a->c == 0) return b;
  if (b->k == Expr::K::Const && b->c == 0) return a;
  return ex::add(a, b);
}

ExprP fold_sub(const ExprP& a, const ExprP& b) {
  if (a->k == Expr::K::Const && b->k == Expr::K::Const) return ex::cst(a->c - b->c);
  if (b->k == Expr::K::Const && b->c == 0) return a;
  return ex::sub(a, b);
}

ExprP fold_mul(const Int& c, const ExprP& e) {
  if (e->k == Expr::K::Const) return ex::cst(c * e->c);
  if (c == 0) return ex::cst(0);
  if (c == 1) return e;
  return ex::mul(ex::cst(c), e);
}

bool mentions(const ExprP& e, const VarName& x) {
  std::set<VarName> vs;
  expr_vars(e, vs);
  return vs.count(x) > 0;
}

std::optional<Affine> affine_in(const ExprP& e, const VarName& x) {
  switch (e->k) {
    case Expr::K::Const: return Affine{0, e};
    case Expr::K::Var:
      if (e->name == x) return Affine{1, ex::cst(0)};
      return Affine{0, e};
    case Expr::K::Add: {
      auto l = affine_in(e->a, x), r = affine_in(e->b, x);
      if (!l || !r) return std::nullopt;
      return Affine{l->coeff + r->coeff, fold_add(l->rest, r->rest)};
    }
    case Expr::K::Sub: {
      auto l = affine_in(e->a, x), r = affine_in(e->b, x);
      if (!l || !r) return std::nullopt;
      return Affine{l->coeff - r->coeff, fold_sub(l->rest, r->rest)};
    }
    case Expr::K::Neg: {
      auto l = affine_in(e->a, x);
      if (!l) return std::nullopt;
      return Affine{-l->coeff, fold_sub(ex::cst(0), l->rest)};
    }
    case Expr::K::Mul: {
      // Affine only when one side is a literal integer constant.
      if (e->a->k == Expr::K::Const) {
        auto r = affine_in(e->b, x);
        if (!r) return std::nullopt;
        return Affine{e->a->c * r->coeff, fold_mul(e->a->c, r->rest)};
      }
      if (e->b->k == Expr::K::Const) {
        auto l = affine_in(e->a, x);
        if (!l) return std::nullopt;
        return Affine{e->b->c * l->coeff, fold_mul(e->b->c, l->rest)};
      }
      if (!mentions(e, x)) return Affine{0, e};
      return std::nullopt;
    }
    default:
      // pow2 / shr / min / table reads: only x-free occurrences are affine.
      if (!mentions(e, x)) return Affine{0, e};
      return std::nullopt;
  }
}

}  // namespace

std::optional<Int> apply_inverse(const PartialInverseExpr& inv, const ProgState& s,
                                 const TableEnv& env) {
  Int numer = inv.p * s.get(inv.x) + eval_expr(inv.q, s, env);
  if (numer % inv.r != 0) return std::nullopt;
  return numer / inv.r;
}

std::optional<PartialInverseExpr> injective_inverse(const ExprP& e, const VarName& x) {
  auto aff = affine_in(e, x);
  if (!aff || aff->coeff == 0) return std::nullopt;
  // e == a*x + t  =>  inverse is (x - t)/a, normalized to a positive divisor.
  if (aff->coeff > 0)
    return PartialInverseExpr{x, 1, ex::neg(aff->rest), aff->coeff};
  return PartialInverseExpr{x, -1, aff->rest, -aff->coeff};
}

}  // namespace disti
