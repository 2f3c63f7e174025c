#include "disti/markov.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace disti {

SubDist mc_step(const OperationalMC& mc, const SubDist& m, int max_depth) {
  SubDist out(m.scope());
  for (const auto& [s, w] : m.weights()) {
    SubDist successors = eval_pred(mc.guard, s, *mc.env)
                             ? denote(mc.body, SubDist::dirac(s, m.scope()), mc.env, max_depth).dist
                             : SubDist::dirac(s, m.scope());
    out = add(out, scale(w, successors));
  }
  return out;
}

Trajectory trajectory(const OperationalMC& mc, const SubDist& m0, int n) {
  Trajectory t;
  t.steps.push_back(m0);
  for (int k = 0; k < n; ++k) t.steps.push_back(mc_step(mc, t.steps.back()));
  return t;
}

ReachSet reach_set(const OperationalMC& mc, const std::vector<SubDist>& initial, int depth) {
  ReachSet out;
  out.depth = depth;
  std::set<std::map<ProgState, Rat>> seen;
  // One chain per initial distribution; walk depth-major so elements are
  // ordered by first reach depth, then by initial index.
  std::vector<SubDist> chains = initial;
  std::vector<bool> fixed(initial.size(), false);
  for (int k = 0; k <= depth; ++k) {
    for (size_t i = 0; i < chains.size(); ++i) {
      if (k > 0 && !fixed[i]) {
        SubDist next = mc_step(mc, chains[i]);
        if (dist_eq(next, chains[i])) fixed[i] = true;
        chains[i] = std::move(next);
      }
      if (seen.insert(chains[i].weights()).second) {
        out.dists.push_back(chains[i]);
        out.first_depth.push_back(k);
      }
    }
  }
  return out;
}

TranslationReport check_translation(const PredP& b, const ProgramP& body, TableEnvP env,
                                    const SubDist& m0, int n) {
  OperationalMC mc{b, body, env};
  SubDist den = m0, op = m0;
  for (int k = 0; k <= n; ++k) {
    if (!dist_eq(den, op)) return {false, k, den, op};
    if (k == n) break;
    den = guarded_step_bounded(b, body, den, env, kDefaultMaxDepth).dist;
    op = mc_step(mc, op);
  }
  return {};
}

std::string graph_export(const OperationalMC& mc, const ReachSet& reach,
                         const std::vector<VarName>& scope) {
  // Support of the whole reach set, ordered by scope-tuple.
  std::set<ProgState> support;
  for (const auto& d : reach.dists)
    for (const auto& [s, w] : d.weights()) support.insert(s);
  std::vector<ProgState> states(support.begin(), support.end());
  std::sort(states.begin(), states.end(), [&](const ProgState& a, const ProgState& b2) {
    for (const auto& x : scope) {
      Int va = a.get(x), vb = b2.get(x);
      if (va != vb) return va < vb;
    }
    return a < b2;
  });
  std::ostringstream os;
  for (const ProgState& s : states) {
    SubDist succ = eval_pred(mc.guard, s, *mc.env)
                       ? denote(mc.body, SubDist::dirac(s, scope), mc.env).dist
                       : SubDist::dirac(s, scope);
    // render() orders targets deterministically; reuse its ordering.
    std::istringstream lines(render(succ));
    std::string line;
    while (std::getline(lines, line)) {
      auto sep = line.find(" : ");
      std::string weight = line.substr(0, sep);
      std::string target = line.substr(sep + 3);
      Rat w = parse_rat(weight);
      os << '"' << s.str(scope) << '"' << " -> " << '"' << target << '"' << " [" << rat_str(w)
         << "]\n";
    }
  }
  return os.str();
}

}  // namespace disti
