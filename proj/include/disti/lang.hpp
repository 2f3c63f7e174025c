#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "disti/rat.hpp"

namespace disti {

using VarName = std::string;

bool is_valid_var_name(const std::string& s);

// A program state is a finite map from variables to integers; every
// unmentioned variable has value 0. Zero bindings are never stored, so
// structural equality of the map is state equality.
class ProgState {
 public:
  ProgState() = default;
  explicit ProgState(std::map<VarName, Int> bindings);

  Int get(const VarName& x) const;
  ProgState with(const VarName& x, Int value) const;  // updated state sigma[x/c]
  const std::map<VarName, Int>& bindings() const { return bindings_; }

  bool operator==(const ProgState& o) const { return bindings_ == o.bindings_; }
  bool operator<(const ProgState& o) const;

  // "{v=1,c=0,n=3}" with variables listed in `order` first, remaining ones
  // alphabetically. Variables absent from the map render as 0.
  std::string str(const std::vector<VarName>& order = {}) const;

 private:
  std::map<VarName, Int> bindings_;
};

// Read-only integer tables (the FLDR's h array and H matrix live here).
// Fixed for the lifetime of a run.
struct TableEnv {
  std::map<std::string, std::vector<Int>> tables1;
  std::map<std::string, std::vector<std::vector<Int>>> tables2;  // rectangular

  bool has1(const std::string& n) const { return tables1.count(n) > 0; }
  bool has2(const std::string& n) const { return tables2.count(n) > 0; }
};
using TableEnvP = std::shared_ptr<const TableEnv>;
TableEnvP empty_env();

// ---------------------------------------------------------------------------
// Expressions and predicates
// ---------------------------------------------------------------------------

struct Expr;
using ExprP = std::shared_ptr<const Expr>;

struct Expr {
  enum class K { Const, Var, Add, Sub, Mul, Neg, Pow2, Shr, Min, Tab1, Tab2 };
  K k;
  Int c;             // Const
  std::string name;  // Var / Tab1 / Tab2 (table name)
  ExprP a, b;
};

namespace ex {
ExprP cst(Int v);
ExprP var(const VarName& x);
ExprP add(ExprP a, ExprP b);
ExprP sub(ExprP a, ExprP b);
ExprP mul(ExprP a, ExprP b);
ExprP neg(ExprP a);  // folds neg(const) into a constant
ExprP pow2(ExprP a);
ExprP shr(ExprP a, ExprP b);
ExprP min(ExprP a, ExprP b);
ExprP tab1(const std::string& t, ExprP idx);
ExprP tab2(const std::string& t, ExprP row, ExprP col);
}  // namespace ex

enum class RelOp { Lt, Le, Eq, Ne, Ge, Gt };
const char* relop_str(RelOp op);
bool rel_holds(const Int& a, RelOp op, const Int& b);
bool rel_holds_rat(const Rat& a, RelOp op, const Rat& b);

struct Pred;
using PredP = std::shared_ptr<const Pred>;

struct Pred {
  enum class K { Cmp, And, Or, Not, True, False };
  K k;
  RelOp op;  // Cmp
  ExprP ea, eb;
  PredP a, b;
};

namespace pr {
PredP cmp(ExprP a, RelOp op, ExprP b);
PredP conj(PredP a, PredP b);
PredP disj(PredP a, PredP b);
PredP neg(PredP a);
PredP truth();
PredP falsity();
// lo <= x and x <= hi, as expressions
PredP between(ExprP lo, ExprP x, ExprP hi);
}  // namespace pr

// Evaluation is total except for the documented faults: pow2/shr with a
// negative right operand, reads of undeclared tables, and absurdly large
// pow2 exponents. Out-of-range reads of declared tables yield 0.
struct EvalFault : std::runtime_error {
  EvalFault(const std::string& what, ProgState state);
  ProgState state;
};

Int eval_expr(const ExprP& e, const ProgState& s, const TableEnv& env);
bool eval_pred(const PredP& b, const ProgState& s, const TableEnv& env);

void expr_vars(const ExprP& e, std::set<VarName>& out);
void pred_vars(const PredP& b, std::set<VarName>& out);
void expr_tables(const ExprP& e, std::set<std::string>& out);

bool expr_eq(const ExprP& a, const ExprP& b);
bool pred_eq(const PredP& a, const PredP& b);

// Structural substitution of a variable by a constant (used to instantiate
// quantified assertion parameters).
ExprP expr_subst(const ExprP& e, const VarName& x, const Int& v);
PredP pred_subst(const PredP& b, const VarName& x, const Int& v);

std::string expr_str(const ExprP& e);
std::string pred_str(const PredP& b);

// ---------------------------------------------------------------------------
// Programs (Def. of the six-construct grammar)
// ---------------------------------------------------------------------------

struct Program;
using ProgramP = std::shared_ptr<const Program>;

struct Program {
  enum class K { Skip, Assign, PChoice, Seq, Ite, While };
  K k;
  VarName var;  // Assign target
  ExprP e;      // Assign rhs
  Rat p;        // PChoice probability, in [0,1]
  PredP guard;  // Ite / While
  ProgramP a, b;
};

namespace pg {
ProgramP skip();
ProgramP assign(const VarName& x, ExprP e);
ProgramP pchoice(ProgramP a, Rat p, ProgramP b);  // throws if p outside [0,1]
ProgramP seq(ProgramP a, ProgramP b);
ProgramP seq(std::initializer_list<ProgramP> parts);  // right-associated
ProgramP ite(PredP g, ProgramP then_branch, ProgramP else_branch);
ProgramP while_loop(PredP g, ProgramP body);
}  // namespace pg

bool program_eq(const ProgramP& a, const ProgramP& b);
bool is_loop_free(const ProgramP& c);

// Variables read anywhere in C (guards and right-hand sides).
std::set<VarName> read_vars(const ProgramP& c);
// Assignment targets anywhere in C.
std::set<VarName> written_vars(const ProgramP& c);
// Variables read somewhere but never assigned (unmod(C)).
std::set<VarName> unmodified_vars(const ProgramP& c);

std::string program_str(const ProgramP& c, int indent = 0);

// ---------------------------------------------------------------------------
// Injective (affine) assignments and their partial inverses
// ---------------------------------------------------------------------------

// The partial affine map  sigma |-> (p * sigma(x) + q(sigma)) / r,
// defined exactly when r divides the numerator. q never mentions x.
// r == 1 means the guard is always true.
struct PartialInverseExpr {
  VarName x;
  Int p;    // nonzero
  ExprP q;  // x-free
  Int r;    // positive
};

// Evaluates the map at s; nullopt when the divisibility guard fails.
std::optional<Int> apply_inverse(const PartialInverseExpr& inv, const ProgState& s,
                                 const TableEnv& env);

// If e is syntactically affine in x (e == a*x + t with a a nonzero integer
// constant and t not mentioning x), returns the partial inverse (x - t)/a.
std::optional<PartialInverseExpr> injective_inverse(const ExprP& e, const VarName& x);

}  // namespace disti
