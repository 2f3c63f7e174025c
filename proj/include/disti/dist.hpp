#pragma once

#include <map>
#include <string>
#include <vector>

#include "disti/lang.hpp"
#include "disti/rat.hpp"

namespace disti {

// State predicate evaluated against a fixed table environment.
struct EventPred {
  PredP pred;
  TableEnvP env;
  bool sat(const ProgState& s) const { return eval_pred(pred, s, *env); }
};

// Finite-support sub-distribution over program states, total mass <= 1.
// Canonical form: zero weights are never stored, so structural equality of
// the weight map is distribution equality. The scope is a display-order
// list of variables (marginals restrict it); it does not affect equality.
class SubDist {
 public:
  SubDist() = default;
  explicit SubDist(std::vector<VarName> scope) : scope_(std::move(scope)) {}

  static SubDist dirac(const ProgState& s, std::vector<VarName> scope = {});

  // Adds w to the weight of s. Rejects negative weights and total mass > 1.
  void bump(const ProgState& s, const Rat& w);

  const std::map<ProgState, Rat>& weights() const { return w_; }
  const std::vector<VarName>& scope() const { return scope_; }
  Rat at(const ProgState& s) const;
  Rat mass() const;
  bool empty() const { return w_.empty(); }
  size_t support_size() const { return w_.size(); }

  void merge_scope(const std::vector<VarName>& other);
  bool operator<(const SubDist& o) const { return w_ < o.w_; }

 private:
  void note_vars(const ProgState& s);
  std::vector<VarName> scope_;
  std::map<ProgState, Rat> w_;
};

struct MassError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SubDist add(const SubDist& a, const SubDist& b);      // throws MassError if mass > 1
SubDist scale(const Rat& p, const SubDist& m);        // requires 0 <= p <= 1
SubDist filter(const EventPred& b, const SubDist& m); // [b] . m
Rat prob_of(const EventPred& b, const SubDist& m);
SubDist marginal(const std::vector<VarName>& xs, const SubDist& m);

// Def.-6.1 substitution m[x/inv] for the partial affine map inv; preserves
// pointwise + and scaling, not necessarily mass.
SubDist substitute(const SubDist& m, const PartialInverseExpr& inv, const TableEnv& env);

bool dist_eq(const SubDist& a, const SubDist& b);
// a(s) <= b(s) for every state.
bool leq_pointwise(const SubDist& a, const SubDist& b);
// max_s |a(s) - b(s)|
Rat linf_distance(const SubDist& a, const SubDist& b);

// Canonical text rendering: one line "<num>/<den> : {x=..,y=..}" per support
// state, sorted by the value tuple in scope order.
std::string render(const SubDist& m);

}  // namespace disti
