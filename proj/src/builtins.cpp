#include "disti/builtins.hpp"

namespace disti {

namespace {

using namespace ex;

LoopModel vonneumann_model(const Rat& p) {
  PredP guard = pr::cmp(var("x"), RelOp::Eq, var("y"));
  ProgramP body = pg::seq(
      pg::pchoice(pg::assign("x", cst(0)), p, pg::assign("x", cst(1))),
      pg::pchoice(pg::assign("y", cst(0)), p, pg::assign("y", cst(1))));
  SubDist init = SubDist::dirac(ProgState({{"x", 0}, {"y", 0}}), {"x", "y"});
  return {guard, body, empty_env(), init, {"x", "y"}};
}

BuiltinModel fig4l_model() {
  ProgramP first = pg::ite(pr::cmp(var("x"), RelOp::Eq, cst(0)),
                           pg::pchoice(pg::assign("x", cst(1)), Rat(1, 2),
                                       pg::assign("y", cst(1))),
                           pg::skip());
  ProgramP second = pg::ite(pr::cmp(var("x"), RelOp::Eq, cst(1)),
                            pg::pchoice(pg::assign("x", cst(0)), Rat(1, 3),
                                        pg::assign("y", cst(1))),
                            pg::skip());
  SubDist init = SubDist::dirac(ProgState({{"x", 0}, {"y", 0}}), {"x", "y"});
  return {pg::seq(first, second), init, empty_env(), std::nullopt};
}

LoopModel fig4r_model() {
  PredP guard = pr::cmp(var("x"), RelOp::Lt, cst(1));
  ProgramP body = pg::pchoice(pg::assign("y", cst(0)), Rat(1, 2),
                              pg::assign("x", add(var("x"), var("y"))));
  SubDist init = SubDist::dirac(ProgState({{"x", 0}, {"y", 1}}), {"x", "y"});
  return {guard, body, empty_env(), init, {"x", "y"}};
}

LoopModel geo_model() {
  PredP guard = pr::cmp(var("c"), RelOp::Eq, cst(1));
  ProgramP body = pg::pchoice(pg::assign("x", add(var("x"), cst(1))), Rat(1, 2),
                              pg::assign("c", sub(var("c"), cst(1))));
  SubDist init = SubDist::dirac(ProgState({{"x", 0}, {"c", 1}}), {"x", "c"});
  return {guard, body, empty_env(), init, {"x", "c"}};
}

LoopModel fig6_model() {
  PredP guard = pr::cmp(var("y"), RelOp::Eq, cst(0));
  ProgramP then_branch =
      pg::pchoice(pg::assign("x", cst(1)), Rat(1, 2),
                  pg::pchoice(pg::assign("y", cst(1)), Rat(1, 4),
                              pg::seq(pg::assign("x", cst(1)), pg::assign("y", cst(1)))));
  ProgramP else_branch =
      pg::pchoice(pg::assign("x", cst(0)), Rat(1, 8),
                  pg::pchoice(pg::assign("y", cst(1)), Rat(3, 7),
                              pg::seq(pg::assign("x", cst(0)), pg::assign("y", cst(1)))));
  ProgramP body = pg::ite(pr::cmp(var("x"), RelOp::Eq, cst(0)), then_branch, else_branch);
  SubDist init(std::vector<VarName>{"x", "y"});
  init.bump(ProgState({{"x", 0}, {"y", 0}}), Rat(1, 3));
  init.bump(ProgState({{"x", 1}, {"y", 0}}), Rat(2, 3));
  return {guard, body, empty_env(), init, {"x", "y"}};
}

Int require_n(const BuiltinParams& params, const std::string& who) {
  if (!params.n) throw std::invalid_argument(who + " requires --n");
  return *params.n;
}

std::vector<Int> require_a(const BuiltinParams& params, const std::string& who) {
  if (params.a.empty()) throw std::invalid_argument(who + " requires --a");
  return params.a;
}

Rat param_p(const BuiltinParams& params) { return params.p.value_or(Rat(2, 5)); }

BuiltinModel from_loop(LoopModel lm) {
  return {lm.as_program(), lm.init, lm.env, std::move(lm)};
}

}  // namespace

BuiltinModel make_builtin(const std::string& name, const BuiltinParams& params) {
  if (name == "fig4l") return fig4l_model();
  if (name == "fig4r") return from_loop(fig4r_model());
  if (name == "geo") return from_loop(geo_model());
  if (name == "vonneumann") return from_loop(vonneumann_model(param_p(params)));
  if (name == "fig6") return from_loop(fig6_model());
  if (name == "fdr") return from_loop(fdr_model({require_n(params, "fdr")}));
  if (name == "fldr") return from_loop(fldr_model({require_a(params, "fldr")}));
  throw std::invalid_argument("unknown builtin '" + name + "'");
}

DistAssertion builtin_assertion(const std::string& name, const BuiltinParams& params) {
  if (name == "ifdr") return ifdr_assertion({require_n(params, "ifdr")});
  if (name == "ifldr") return ifldr_assertion({require_a(params, "ifldr")});
  if (name == "vn-star") {
    DistAssertion a(empty_env());
    a.add("Pr[x = 0 and y = 1] = Pr[x = 1 and y = 0]",
          AtomProbCmp{pr::conj(pr::cmp(var("x"), RelOp::Eq, cst(0)),
                               pr::cmp(var("y"), RelOp::Eq, cst(1))),
                      RelOp::Eq,
                      {1, pr::conj(pr::cmp(var("x"), RelOp::Eq, cst(1)),
                                   pr::cmp(var("y"), RelOp::Eq, cst(0)))}});
    return a;
  }
  if (name == "fig6-inv") {
    DistAssertion a(empty_env());
    a.add("Pr[x = 1 and y = 0] = 2 * Pr[x = 0 and y = 0]",
          AtomProbCmp{pr::conj(pr::cmp(var("x"), RelOp::Eq, cst(1)),
                               pr::cmp(var("y"), RelOp::Eq, cst(0))),
                      RelOp::Eq,
                      {2, pr::conj(pr::cmp(var("x"), RelOp::Eq, cst(0)),
                                   pr::cmp(var("y"), RelOp::Eq, cst(0)))}});
    a.add("Pr[x = 1 and y = 1] = Pr[x = 0 and y = 1]",
          AtomProbCmp{pr::conj(pr::cmp(var("x"), RelOp::Eq, cst(1)),
                               pr::cmp(var("y"), RelOp::Eq, cst(1))),
                      RelOp::Eq,
                      {1, pr::conj(pr::cmp(var("x"), RelOp::Eq, cst(0)),
                                   pr::cmp(var("y"), RelOp::Eq, cst(1)))}});
    a.add("mass = 1", AtomMassCmp{RelOp::Eq, 1});
    return a;
  }
  throw std::invalid_argument("unknown builtin assertion '" + name + "'");
}

DistAssertion builtin_post(const std::string& name, const BuiltinParams& params) {
  if (name == "fdr-uniform") return fdr_partial_post({require_n(params, "fdr-uniform")});
  if (name == "fldr-bounds") return fldr_partial_post({require_a(params, "fldr-bounds")});
  if (name == "fig6-split") {
    DistAssertion a(empty_env());
    a.add("support in (y = 1)", AtomSupportIn{pr::cmp(var("y"), RelOp::Eq, cst(1))});
    a.add("Pr[x = 0 and y = 1] = Pr[x = 1 and y = 1]",
          AtomProbCmp{pr::conj(pr::cmp(var("x"), RelOp::Eq, cst(0)),
                               pr::cmp(var("y"), RelOp::Eq, cst(1))),
                      RelOp::Eq,
                      {1, pr::conj(pr::cmp(var("x"), RelOp::Eq, cst(1)),
                                   pr::cmp(var("y"), RelOp::Eq, cst(1)))}});
    return a;
  }
  if (name == "trivial") {
    DistAssertion a(empty_env());
    a.add("mass <= 1", AtomMassCmp{RelOp::Le, 1});
    return a;
  }
  throw std::invalid_argument("unknown builtin post '" + name + "'");
}

std::vector<std::string> builtin_names() {
  return {"fig4l", "fig4r", "geo", "vonneumann", "fig6", "fdr", "fldr"};
}

}  // namespace disti
