#pragma once

#include "disti/samplers.hpp"

namespace disti {

// The worked examples of the case-study corpus, built in so golden tests
// and CLI runs need no external fixtures.
//   fig4l       loop-free two-conditional program
//   fig4r       while (x < 1) { {y:=0}[1/2]{x:=x+y} }, leaks half its mass
//   geo         geometric distribution generator
//   vonneumann  fair coin from a biased one (parameter p)
//   fig6        two-variable loop with the twice-as-likely invariant
//   fdr         Fast Dice Roller (parameter n)
//   fldr        Fast Loaded Dice Roller (parameter a)
struct BuiltinParams {
  std::optional<Int> n;
  std::vector<Int> a;
  std::optional<Rat> p;
};

struct BuiltinModel {
  ProgramP program;
  SubDist init;
  TableEnvP env;
  std::optional<LoopModel> loop;  // present when the builtin is one loop
};

BuiltinModel make_builtin(const std::string& name, const BuiltinParams& params);

// builtin:ifdr, builtin:ifldr, builtin:vn-star, builtin:fig6-inv.
DistAssertion builtin_assertion(const std::string& name, const BuiltinParams& params);

// Default posts for hoare modes: builtin:fdr-uniform, builtin:fldr-bounds,
// builtin:fig6-split, builtin:trivial.
DistAssertion builtin_post(const std::string& name, const BuiltinParams& params);

std::vector<std::string> builtin_names();

}  // namespace disti
