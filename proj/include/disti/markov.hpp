#pragma once

#include <optional>

#include "disti/semantics.hpp"

namespace disti {

// Big-step operational Markov chain of `while (guard) { body }`: a state
// satisfying the guard transitions by the body's semantics, every other
// state has a self-loop. Represented intensionally; explicit fragments are
// derived on demand for export.
struct OperationalMC {
  PredP guard;
  ProgramP body;
  TableEnvP env;
};

// M(mu) = sum_s mu(s) . T(s). Deliberately computed per state via Dirac
// inputs; agreement with guarded_step is the translation-theorem check.
SubDist mc_step(const OperationalMC& mc, const SubDist& m, int max_depth = kDefaultMaxDepth);

struct Trajectory {
  std::vector<SubDist> steps;  // steps[0] is the initial distribution
};

Trajectory trajectory(const OperationalMC& mc, const SubDist& m0, int n);

// Distributions reachable from the initial set within `depth` steps,
// deduplicated, ordered by first reach depth then by initial index.
struct ReachSet {
  int depth = 0;
  std::vector<SubDist> dists;
  std::vector<int> first_depth;  // parallel to dists
};

ReachSet reach_set(const OperationalMC& mc, const std::vector<SubDist>& initial, int depth);

// Compares the denotational iterates of `if (b) { body }` with the MC
// iterates up to n; exact equality is the translation theorem. A false
// result carries the first divergent step and both distributions.
struct TranslationReport {
  bool ok = true;
  int first_divergence = -1;
  std::optional<SubDist> denotational, operational;
};

TranslationReport check_translation(const PredP& b, const ProgramP& body, TableEnvP env,
                                    const SubDist& m0, int n);

// One line per edge, `"{v=1,c=0,n=3}" -> "{v=2,c=1,n=3}" [1/2]`, restricted
// to the support of the reach set, deterministically ordered. Terminal
// states carry their self-loop.
std::string graph_export(const OperationalMC& mc, const ReachSet& reach,
                         const std::vector<VarName>& scope);

}  // namespace disti
