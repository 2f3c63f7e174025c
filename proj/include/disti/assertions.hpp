#pragma once

#include <functional>
#include <optional>
#include <variant>

#include "disti/markov.hpp"
#include "disti/semantics.hpp"

#include "json.hpp"

namespace disti {

// ---------------------------------------------------------------------------
// Distribution assertions: conjunctions of the atoms below, evaluated
// exactly on finite-support sub-distributions.
// ---------------------------------------------------------------------------

// Per-state rational coefficient for weighted state sums.
using CoeffFn = std::function<Rat(const ProgState&)>;

// Pr[event] <op> coeff            (rhs.event absent)
// Pr[event] <op> coeff * Pr[rhs]  (rhs.event present)
struct ProbRhs {
  Rat coeff = 1;
  PredP event;  // may be null
};
struct AtomProbCmp {
  PredP event;
  RelOp op;
  ProbRhs rhs;
};

// Every support state satisfies pred (the <pred> set of the paper).
struct AtomSupportIn {
  PredP pred;
};

struct AtomMassCmp {
  RelOp op;
  Rat bound;
};

// All states satisfying the selector that agree outside the cell variables
// have equal weight — including weight-0 cells, which are discovered by
// walking the selector-satisfying lattice outward from the support states.
//
// Cell variables are vars(selector) minus the group-by variables. The
// selector must confine them to a finite box (pin parameters with an
// equality conjunct such as `n = 3`, bound the cell coordinate the way the
// case-study invariants do); an unbounded walk is reported as a failure.
struct AtomUniformOver {
  PredP selector;
  std::vector<VarName> group_by;
};

// sum of weighted state sums <op> bound, each term filtering the support by
// a predicate and weighting by a per-state rational coefficient.
struct AtomBoundedSum {
  struct Term {
    PredP filter;
    CoeffFn coeff;
    std::string coeff_text;
  };
  std::vector<Term> terms;
  RelOp op;
  Rat bound;
  std::string bound_text;
};

using Atom =
    std::variant<AtomProbCmp, AtomSupportIn, AtomMassCmp, AtomUniformOver, AtomBoundedSum>;

// nullopt when the atom holds; otherwise a human-readable failure note.
std::optional<std::string> eval_atom(const Atom& a, const SubDist& m, const TableEnv& env);

struct Quant {
  bool existential = true;
  VarName name;
  Int lo, hi;  // inclusive
};

struct Clause {
  std::string text;
  std::function<std::optional<std::string>(const SubDist&)> eval;
};

class DistAssertion {
 public:
  DistAssertion() : env_(empty_env()) {}
  explicit DistAssertion(TableEnvP env) : env_(std::move(env)) {}

  void add(std::string text, Atom atom);
  // exists/forall name in lo..hi : instantiate(value)
  void add_quantified(std::string text, Quant q, std::function<Atom(const Int&)> instantiate);

  bool holds(const SubDist& m) const { return !first_failure(m).has_value(); }

  struct Failure {
    size_t index = 0;
    std::string clause;
    std::string note;
  };
  std::optional<Failure> first_failure(const SubDist& m) const;

  const TableEnvP& env() const { return env_; }
  const std::vector<Clause>& clauses() const { return clauses_; }

 private:
  TableEnvP env_;
  std::vector<Clause> clauses_;
};

// ---------------------------------------------------------------------------
// Assertion text format (one clause per line, '#' comments):
//   exists N in 1..16 : Pr[n = N] = 1
//   Pr[0 < v and v < 2*n - 1] = 1
//   uniform over (0 <= c and c < min(v,n)) group by (v)
//   support in (c >= 0)
//   mass >= 1
//   sum{ H[d,c] = I } weight 1 + sum{ d = 0 } weight probt(I, c) <= probt(I)
// Coefficient calls (probt above) resolve through the binding registry; an
// argument is an integer literal, the quantified parameter, or a state
// variable read per state.
// ---------------------------------------------------------------------------

struct CoeffBinding {
  using Arg = std::variant<Int, VarName>;
  int arity = -1;  // expected argument count; -1 leaves validation to make
  std::function<CoeffFn(const std::vector<Arg>&)> make;
};
using BindingRegistry = std::map<std::string, CoeffBinding>;

DistAssertion parse_assertion(const std::string& text, TableEnvP env,
                              const BindingRegistry& bindings = {});

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckReport {
  bool pass = false;
  std::string mode;
  std::string population;  // which candidate population was examined
  int depth = 0;
  long examined = 0;

  struct Witness {
    std::string clause;
    std::string note;
    SubDist dist;
    std::optional<SubDist> pre;  // pre-distribution, for inductivity fails
    bool ill_posed = false;      // input violated the checked assertion itself
  };
  std::optional<Witness> witness;

  std::vector<Rat> final_residuals;  // hoare runs: residual per initial
  std::optional<Rat> tau_examined;   // hoare-total: inf of examined masses
  std::string note;
};

nlohmann::json report_json(const CheckReport& r);

// pass iff every initial distribution satisfies A.
CheckReport check_initial(const DistAssertion& a, const std::vector<SubDist>& initial);

// pass iff one guarded iteration of every candidate lands in A again.
// Candidates that do not satisfy A to begin with are ill-posed inputs.
CheckReport check_inductive(const DistAssertion& a, const PredP& guard, const ProgramP& body,
                            TableEnvP env, const std::vector<SubDist>& candidates,
                            const std::string& population);

// Desk-scale realization of rule While-P: every [!guard]-chain element of
// every bounded run satisfies post; the chain itself must be pointwise
// nondecreasing.
CheckReport check_hoare_partial(const DistAssertion& inv, const PredP& guard,
                                const ProgramP& body, TableEnvP env, const DistAssertion& post,
                                const std::vector<SubDist>& initial, int depth);

// Rule While-T under an explicit AST assumption: additionally requires the
// guard-mass residuals to decrease monotonically and reports them together
// with the infimum of the examined masses (the tau of the rule, over the
// examined members only). Refuses to run unless ast_assumed.
CheckReport check_hoare_total(const DistAssertion& inv, const PredP& guard, const ProgramP& body,
                              TableEnvP env, const DistAssertion& post,
                              const std::vector<SubDist>& initial, int depth, bool ast_assumed);

// Pr_out[x=z] <= Pr_in[x=z] for every unmodified x; z ranges over the values
// x takes in either support, plus extra_samples.
CheckReport check_unmod(const ProgramP& c, const SubDist& m0, TableEnvP env, int depth,
                        const std::vector<Int>& extra_samples = {});

}  // namespace disti
