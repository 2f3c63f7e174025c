#pragma once

#include "disti/dist.hpp"
#include "disti/lang.hpp"

namespace disti {

inline constexpr int kDefaultMaxDepth = 64;

// Bounded evaluation of a single while loop by iterating the guarded step
// mu_{k+1} = [!b]mu_k + [[body]]([b]mu_k) and harvesting the [!b] part.
//
// result is the [!b]-filtered final iterate: an exact lower bound of the
// loop's denotational output, pointwise nondecreasing in depth. residual
// bounds the mass that bounded iteration has not resolved: it is the
// guard-satisfying mass of the final iterate, except that a detected exact
// fixed point makes the result exact and the residual 0 (any mass still on
// guard states then provably cycles forever and never terminates).
struct LoopOutcome {
  bool converged = false;
  SubDist result;
  Rat residual = 0;
  int depth_used = 0;
};

struct DenoteResult {
  SubDist dist;
  Rat residual = 0;  // total unresolved mass over all loops encountered
};

// Exact distribution-transformer semantics of a loop-free program.
// Preserves mass. Assignments use the summation clause (a forward push of
// each support state); see assign_by_substitution for the injective route.
SubDist denote_loopfree(const ProgramP& c, const SubDist& m, const TableEnv& env);

// [[x := e]] via the substitution operator (requires e affine in x).
// Kept as the independent second route for the equivalence property tests.
SubDist assign_by_substitution(const VarName& x, const ExprP& e, const SubDist& m,
                               const TableEnv& env);

// One iteration of `if (b) { body } else { skip }`. The body must be
// loop-free for the plain overload; the residual-aware overload evaluates
// nested loops to max_depth.
SubDist guarded_step(const PredP& b, const ProgramP& body, const SubDist& m,
                     const TableEnv& env);
DenoteResult guarded_step_bounded(const PredP& b, const ProgramP& body, const SubDist& m,
                                  TableEnvP env, int max_depth);

LoopOutcome denote_loop_bounded(const PredP& b, const ProgramP& body, const SubDist& m,
                                TableEnvP env, int max_depth);

// Full recursive evaluation; every while construct is evaluated with
// denote_loop_bounded at max_depth. dist is an exact lower bound of
// [[c]](m); residual is 0 iff every loop converged.
DenoteResult denote(const ProgramP& c, const SubDist& m, TableEnvP env,
                    int max_depth = kDefaultMaxDepth);

}  // namespace disti
