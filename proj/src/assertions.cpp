#include "disti/assertions.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace disti {

namespace {

std::optional<std::string> eval_prob_cmp(const AtomProbCmp& a, const SubDist& m,
                                         const TableEnv& env) {
  Rat lhs = 0;
  for (const auto& [s, w] : m.weights())
    if (eval_pred(a.event, s, env)) lhs += w;
  Rat rhs = a.rhs.coeff;
  if (a.rhs.event) {
    Rat pr = 0;
    for (const auto& [s, w] : m.weights())
      if (eval_pred(a.rhs.event, s, env)) pr += w;
    rhs = a.rhs.coeff * pr;
  }
  if (rel_holds_rat(lhs, a.op, rhs)) return std::nullopt;
  return "Pr = " + rat_str(lhs) + " vs " + rat_str(rhs);
}

std::optional<std::string> eval_support_in(const AtomSupportIn& a, const SubDist& m,
                                           const TableEnv& env) {
  for (const auto& [s, w] : m.weights())
    if (!eval_pred(a.pred, s, env))
      return "support state " + s.str(m.scope()) + " violates the predicate";
  return std::nullopt;
}

std::optional<std::string> eval_mass_cmp(const AtomMassCmp& a, const SubDist& m) {
  Rat mass = m.mass();
  if (rel_holds_rat(mass, a.op, a.bound)) return std::nullopt;
  return "mass = " + rat_str(mass);
}

std::optional<std::string> eval_uniform(const AtomUniformOver& a, const SubDist& m,
                                        const TableEnv& env) {
  std::vector<const ProgState*> sel;
  for (const auto& [s, w] : m.weights())
    if (eval_pred(a.selector, s, env)) sel.push_back(&s);
  if (sel.empty()) return std::nullopt;  // vacuous

  // Cell variables are the selector's variables minus the grouping ones;
  // the selector itself must bound them (the paper's invariants pin the
  // parameter with an `n = <value>` conjunct and bound the cell coordinate
  // by the row shape). Unbounded selectors hit the enumeration cap below.
  std::set<VarName> sel_vars;
  pred_vars(a.selector, sel_vars);
  std::vector<VarName> cell_vars;
  for (const auto& x : sel_vars)
    if (std::find(a.group_by.begin(), a.group_by.end(), x) == a.group_by.end())
      cell_vars.push_back(x);

  // Comparison classes agree on everything except the cell variables.
  auto class_key = [&](const ProgState& s) {
    std::map<VarName, Int> kept = s.bindings();
    for (const auto& x : cell_vars) kept.erase(x);
    return ProgState(std::move(kept));
  };
  std::map<ProgState, std::vector<const ProgState*>> classes;
  for (const ProgState* s : sel) classes[class_key(*s)].push_back(s);

  constexpr int kCellCap = 200000;
  for (const auto& [key, members] : classes) {
    Rat w = m.at(*members.front());
    for (const ProgState* s : members)
      if (m.at(*s) != w)
        return "states " + members.front()->str(m.scope()) + " and " + s->str(m.scope()) +
               " have weights " + rat_str(w) + " and " + rat_str(m.at(*s));
    if (cell_vars.empty()) continue;
    // Walk the selector-satisfying lattice outward from the members; any
    // reachable cell must carry the same weight (0-weight cells included).
    std::set<ProgState> visited;
    std::deque<ProgState> queue;
    for (const ProgState* s : members)
      if (visited.insert(*s).second) queue.push_back(*s);
    int steps = 0;
    while (!queue.empty()) {
      ProgState s = queue.front();
      queue.pop_front();
      for (const auto& x : cell_vars) {
        for (int d : {1, -1}) {
          ProgState t = s.with(x, s.get(x) + d);
          if (visited.count(t)) continue;
          if (!eval_pred(a.selector, t, env)) continue;
          if (++steps > kCellCap)
            return "cell enumeration exceeded " + std::to_string(kCellCap) +
                   " states (selector range too large or unbounded)";
          visited.insert(t);
          queue.push_back(t);
          if (m.at(t) != w)
            return "cell " + t.str(m.scope()) + " has weight " + rat_str(m.at(t)) +
                   ", members have " + rat_str(w);
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> eval_bounded_sum(const AtomBoundedSum& a, const SubDist& m,
                                            const TableEnv& env) {
  Rat total = 0;
  for (const auto& term : a.terms)
    for (const auto& [s, w] : m.weights())
      if (eval_pred(term.filter, s, env)) total += term.coeff(s) * w;
  if (rel_holds_rat(total, a.op, a.bound)) return std::nullopt;
  return "weighted sum = " + rat_str(total) + " vs bound " + rat_str(a.bound) + " (" +
         a.bound_text + ")";
}

}  // namespace

std::optional<std::string> eval_atom(const Atom& a, const SubDist& m, const TableEnv& env) {
  return std::visit(
      [&](const auto& atom) -> std::optional<std::string> {
        using T = std::decay_t<decltype(atom)>;
        if constexpr (std::is_same_v<T, AtomProbCmp>) return eval_prob_cmp(atom, m, env);
        if constexpr (std::is_same_v<T, AtomSupportIn>) return eval_support_in(atom, m, env);
        if constexpr (std::is_same_v<T, AtomMassCmp>) return eval_mass_cmp(atom, m);
        if constexpr (std::is_same_v<T, AtomUniformOver>) return eval_uniform(atom, m, env);
        if constexpr (std::is_same_v<T, AtomBoundedSum>) return eval_bounded_sum(atom, m, env);
      },
      a);
}

void DistAssertion::add(std::string text, Atom atom) {
  TableEnvP env = env_;
  clauses_.push_back(
      {std::move(text), [atom = std::move(atom), env](const SubDist& m) {
         return eval_atom(atom, m, *env);
       }});
}

void DistAssertion::add_quantified(std::string text, Quant q,
                                   std::function<Atom(const Int&)> instantiate) {
  if (q.lo > q.hi) throw std::invalid_argument("quantifier range is empty: " + text);
  TableEnvP env = env_;
  clauses_.push_back({std::move(text), [q, instantiate = std::move(instantiate),
                                        env](const SubDist& m) -> std::optional<std::string> {
                        for (Int v = q.lo; v <= q.hi; ++v) {
                          auto note = eval_atom(instantiate(v), m, *env);
                          if (q.existential && !note) return std::nullopt;
                          if (!q.existential && note)
                            return "at " + q.name + "=" + v.str() + ": " + *note;
                        }
                        if (q.existential)
                          return "no " + q.name + " in " + q.lo.str() + ".." + q.hi.str() +
                                 " satisfies the clause";
                        return std::nullopt;
                      }});
}

std::optional<DistAssertion::Failure> DistAssertion::first_failure(const SubDist& m) const {
  for (size_t i = 0; i < clauses_.size(); ++i) {
    auto note = clauses_[i].eval(m);
    if (note) return Failure{i, clauses_[i].text, *note};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

static nlohmann::json dist_json(const SubDist& m) {
  nlohmann::json states = nlohmann::json::array();
  std::istringstream lines(render(m));
  std::string line;
  while (std::getline(lines, line)) states.push_back(line);
  return states;
}

nlohmann::json report_json(const CheckReport& r) {
  nlohmann::json j;
  j["schema"] = 1;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["mode"] = r.mode;
  j["population"] = r.population;
  j["depth"] = r.depth;
  j["examined"] = r.examined;
  if (!r.note.empty()) j["note"] = r.note;
  if (r.witness) {
    nlohmann::json w;
    w["clause"] = r.witness->clause;
    w["note"] = r.witness->note;
    w["ill_posed"] = r.witness->ill_posed;
    w["distribution"] = dist_json(r.witness->dist);
    if (r.witness->pre) w["pre_distribution"] = dist_json(*r.witness->pre);
    j["witness"] = w;
  }
  if (!r.final_residuals.empty()) {
    nlohmann::json res = nlohmann::json::array();
    for (const Rat& x : r.final_residuals) res.push_back(rat_str(x));
    j["final_residuals"] = res;
  }
  if (r.tau_examined) j["tau_examined"] = rat_str(*r.tau_examined);
  return j;
}

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

CheckReport check_initial(const DistAssertion& a, const std::vector<SubDist>& initial) {
  CheckReport r;
  r.mode = "initial";
  r.population = "initial distributions";
  r.examined = static_cast<long>(initial.size());
  for (const SubDist& m : initial) {
    if (auto f = a.first_failure(m)) {
      r.witness = CheckReport::Witness{f->clause, f->note, m, std::nullopt, false};
      return r;
    }
  }
  r.pass = true;
  return r;
}

CheckReport check_inductive(const DistAssertion& a, const PredP& guard, const ProgramP& body,
                            TableEnvP env, const std::vector<SubDist>& candidates,
                            const std::string& population) {
  CheckReport r;
  r.mode = "inductive";
  r.population = population;
  r.examined = static_cast<long>(candidates.size());
  for (const SubDist& m : candidates) {
    if (auto f = a.first_failure(m)) {
      r.witness = CheckReport::Witness{f->clause, f->note, m, std::nullopt, true};
      r.note = "ill-posed candidate: does not satisfy the assertion before the step";
      return r;
    }
    SubDist next = guarded_step_bounded(guard, body, m, env, kDefaultMaxDepth).dist;
    if (auto f = a.first_failure(next)) {
      r.witness = CheckReport::Witness{f->clause, f->note, next, m, false};
      return r;
    }
  }
  r.pass = true;
  return r;
}

namespace {

struct ChainRun {
  std::vector<SubDist> elements;  // [!guard]-filtered iterates
  std::vector<Rat> guard_mass;    // residual per iterate
  bool converged = false;
};

ChainRun run_chain(const PredP& guard, const ProgramP& body, TableEnvP env, const SubDist& m0,
                   int depth) {
  ChainRun out;
  EventPred g{guard, env};
  EventPred ng{pr::neg(guard), env};
  SubDist cur = m0;
  for (int k = 0;; ++k) {
    out.elements.push_back(filter(ng, cur));
    out.guard_mass.push_back(prob_of(g, cur));
    if (out.guard_mass.back() == 0) {
      out.converged = true;
      return out;
    }
    if (k == depth) return out;
    SubDist next = guarded_step_bounded(guard, body, cur, env, kDefaultMaxDepth).dist;
    if (dist_eq(next, cur)) {
      out.converged = true;
      return out;
    }
    cur = std::move(next);
  }
}

}  // namespace

CheckReport check_hoare_partial(const DistAssertion& inv, const PredP& guard,
                                const ProgramP& body, TableEnvP env, const DistAssertion& post,
                                const std::vector<SubDist>& initial, int depth) {
  CheckReport r;
  r.mode = "hoare-partial";
  r.population = "chain elements of bounded runs from the initial distributions";
  r.depth = depth;
  for (const SubDist& m0 : initial) {
    if (auto f = inv.first_failure(m0)) {
      r.witness = CheckReport::Witness{f->clause, f->note, m0, std::nullopt, true};
      r.note = "initial distribution does not satisfy the invariant";
      return r;
    }
    ChainRun chain = run_chain(guard, body, env, m0, depth);
    for (size_t k = 0; k < chain.elements.size(); ++k) {
      ++r.examined;
      if (k > 0 && !leq_pointwise(chain.elements[k - 1], chain.elements[k])) {
        r.witness = CheckReport::Witness{"omega-chain monotonicity", "chain element shrank",
                                         chain.elements[k], chain.elements[k - 1], false};
        return r;
      }
      if (auto f = post.first_failure(chain.elements[k])) {
        r.witness = CheckReport::Witness{f->clause, f->note, chain.elements[k], m0, false};
        return r;
      }
    }
    r.final_residuals.push_back(chain.converged ? Rat(0) : chain.guard_mass.back());
  }
  r.pass = true;
  return r;
}

CheckReport check_hoare_total(const DistAssertion& inv, const PredP& guard, const ProgramP& body,
                              TableEnvP env, const DistAssertion& post,
                              const std::vector<SubDist>& initial, int depth, bool ast_assumed) {
  if (!ast_assumed)
    throw PreconditionError(
        "total-correctness check requires the explicit almost-sure-termination assumption");
  CheckReport r;
  r.mode = "hoare-total";
  r.population = "chain elements of bounded runs from the initial distributions";
  r.depth = depth;
  Rat tau;
  bool tau_set = false;
  for (const SubDist& m0 : initial) {
    if (auto f = inv.first_failure(m0)) {
      r.witness = CheckReport::Witness{f->clause, f->note, m0, std::nullopt, true};
      r.note = "initial distribution does not satisfy the invariant";
      return r;
    }
    if (!tau_set || m0.mass() < tau) {
      tau = m0.mass();
      tau_set = true;
    }
    ChainRun chain = run_chain(guard, body, env, m0, depth);
    for (size_t k = 0; k < chain.elements.size(); ++k) {
      ++r.examined;
      if (k > 0 && !leq_pointwise(chain.elements[k - 1], chain.elements[k])) {
        r.witness = CheckReport::Witness{"omega-chain monotonicity", "chain element shrank",
                                         chain.elements[k], chain.elements[k - 1], false};
        return r;
      }
      if (k > 0 && chain.guard_mass[k] > chain.guard_mass[k - 1]) {
        r.witness = CheckReport::Witness{"residual monotonicity", "guard mass increased",
                                         chain.elements[k], chain.elements[k - 1], false};
        return r;
      }
      // Bounded iteration never creates or destroys mass for loop-free
      // bodies: harvested + residual matches the input mass.
      if (is_loop_free(body) &&
          chain.elements[k].mass() + chain.guard_mass[k] != m0.mass()) {
        r.witness = CheckReport::Witness{"mass accounting",
                                         "harvested mass + residual differs from input mass",
                                         chain.elements[k], m0, false};
        return r;
      }
      if (auto f = post.first_failure(chain.elements[k])) {
        r.witness = CheckReport::Witness{f->clause, f->note, chain.elements[k], m0, false};
        return r;
      }
    }
    r.final_residuals.push_back(chain.converged ? Rat(0) : chain.guard_mass.back());
  }
  if (tau_set) r.tau_examined = tau;
  r.note = "tau reported over examined members only";
  r.pass = true;
  return r;
}

CheckReport check_unmod(const ProgramP& c, const SubDist& m0, TableEnvP env, int depth,
                        const std::vector<Int>& extra_samples) {
  CheckReport r;
  r.mode = "unmodified-variables";
  r.population = "values of each unmodified variable across both supports";
  r.depth = depth;
  SubDist out = denote(c, m0, env, depth).dist;
  for (const VarName& x : unmodified_vars(c)) {
    std::set<Int> zs(extra_samples.begin(), extra_samples.end());
    for (const auto& [s, w] : m0.weights()) zs.insert(s.get(x));
    for (const auto& [s, w] : out.weights()) zs.insert(s.get(x));
    for (const Int& z : zs) {
      ++r.examined;
      Rat before = 0, after = 0;
      for (const auto& [s, w] : m0.weights())
        if (s.get(x) == z) before += w;
      for (const auto& [s, w] : out.weights())
        if (s.get(x) == z) after += w;
      if (after > before) {
        r.witness = CheckReport::Witness{
            "Pr[" + x + " = " + z.str() + "]",
            "probability rose from " + rat_str(before) + " to " + rat_str(after), out, m0, false};
        return r;
      }
    }
  }
  r.pass = true;
  return r;
}

}  // namespace disti
