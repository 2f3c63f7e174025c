#include "disti/dist.hpp"

#include <algorithm>
#include <sstream>

namespace disti {

SubDist SubDist::dirac(const ProgState& s, std::vector<VarName> scope) {
  SubDist out(std::move(scope));
  out.bump(s, 1);
  return out;
}

void SubDist::note_vars(const ProgState& s) {
  for (const auto& [x, v] : s.bindings())
    if (std::find(scope_.begin(), scope_.end(), x) == scope_.end()) scope_.push_back(x);
}

void SubDist::bump(const ProgState& s, const Rat& w) {
  if (w == 0) return;
  if (w < 0) throw MassError("negative weight");
  Rat& slot = w_[s];
  slot += w;
  if (slot > 1) throw MassError("state weight exceeds 1");
  note_vars(s);
}

Rat SubDist::at(const ProgState& s) const {
  auto it = w_.find(s);
  return it == w_.end() ? Rat(0) : it->second;
}

Rat SubDist::mass() const {
  Rat m = 0;
  for (const auto& [s, w] : w_) m += w;
  return m;
}

void SubDist::merge_scope(const std::vector<VarName>& other) {
  for (const auto& x : other)
    if (std::find(scope_.begin(), scope_.end(), x) == scope_.end()) scope_.push_back(x);
}

SubDist add(const SubDist& a, const SubDist& b) {
  SubDist out(a.scope());
  out.merge_scope(b.scope());
  for (const auto& [s, w] : a.weights()) out.bump(s, w);
  for (const auto& [s, w] : b.weights()) out.bump(s, w);
  if (out.mass() > 1) throw MassError("sum has mass > 1");
  return out;
}

SubDist scale(const Rat& p, const SubDist& m) {
  if (p < 0 || p > 1) throw std::invalid_argument("scale factor outside [0,1]");
  SubDist out(m.scope());
  if (p == 0) return out;
  for (const auto& [s, w] : m.weights()) out.bump(s, p * w);
  return out;
}

SubDist filter(const EventPred& b, const SubDist& m) {
  SubDist out(m.scope());
  for (const auto& [s, w] : m.weights())
    if (b.sat(s)) out.bump(s, w);
  return out;
}

Rat prob_of(const EventPred& b, const SubDist& m) {
  Rat total = 0;
  for (const auto& [s, w] : m.weights())
    if (b.sat(s)) total += w;
  return total;
}

SubDist marginal(const std::vector<VarName>& xs, const SubDist& m) {
  SubDist out(xs);
  for (const auto& [s, w] : m.weights()) {
    std::map<VarName, Int> kept;
    for (const auto& x : xs) {
      Int v = s.get(x);
      if (v != 0) kept.emplace(x, std::move(v));
    }
    out.bump(ProgState(std::move(kept)), w);
  }
  return out;
}

SubDist substitute(const SubDist& m, const PartialInverseExpr& inv, const TableEnv& env) {
  // m[x/inv](sigma) = m(sigma[x/inv(sigma)]). For each support state tau the
  // unique preimage sigma agrees with tau off x and has
  //   sigma(x) = (r*tau(x) - q(tau)) / p,
  // which exists iff p divides; mass is lost where it does not.
  SubDist out(m.scope());
  for (const auto& [tau, w] : m.weights()) {
    Int numer = inv.r * tau.get(inv.x) - eval_expr(inv.q, tau, env);
    if (numer % inv.p != 0) continue;
    out.bump(tau.with(inv.x, numer / inv.p), w);
  }
  return out;
}

bool dist_eq(const SubDist& a, const SubDist& b) { return a.weights() == b.weights(); }

bool leq_pointwise(const SubDist& a, const SubDist& b) {
  for (const auto& [s, w] : a.weights())
    if (w > b.at(s)) return false;
  return true;
}

Rat linf_distance(const SubDist& a, const SubDist& b) {
  Rat best = 0;
  for (const auto& [s, w] : a.weights()) {
    Rat d = w - b.at(s);
    if (d < 0) d = -d;
    if (d > best) best = d;
  }
  for (const auto& [s, w] : b.weights()) {
    Rat d = w - a.at(s);
    if (d < 0) d = -d;
    if (d > best) best = d;
  }
  return best;
}

std::string render(const SubDist& m) {
  // Sort support states by their value tuple in scope order.
  std::vector<const ProgState*> states;
  states.reserve(m.support_size());
  for (const auto& [s, w] : m.weights()) states.push_back(&s);
  const auto& scope = m.scope();
  std::sort(states.begin(), states.end(), [&](const ProgState* a, const ProgState* b) {
    for (const auto& x : scope) {
      Int va = a->get(x), vb = b->get(x);
      if (va != vb) return va < vb;
    }
    return *a < *b;
  });
  std::ostringstream os;
  for (const ProgState* s : states)
    os << rat_frac_str(m.at(*s)) << " : " << s->str(scope) << '\n';
  return os.str();
}

}  // namespace disti
