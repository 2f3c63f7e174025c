#include "disti/semantics.hpp"

namespace disti {

static SubDist assign_push(const VarName& x, const ExprP& e, const SubDist& m,
                           const TableEnv& env) {
  SubDist out(m.scope());
  out.merge_scope({x});
  for (const auto& [s, w] : m.weights()) {
    try {
      out.bump(s.with(x, eval_expr(e, s, env)), w);
    } catch (EvalFault& f) {
      f.state = s;
      throw;
    }
  }
  return out;
}

SubDist denote_loopfree(const ProgramP& c, const SubDist& m, const TableEnv& env) {
  switch (c->k) {
    case Program::K::Skip: return m;
    case Program::K::Assign: return assign_push(c->var, c->e, m, env);
    case Program::K::PChoice:
      return add(denote_loopfree(c->a, scale(c->p, m), env),
                 denote_loopfree(c->b, scale(1 - c->p, m), env));
    case Program::K::Seq: return denote_loopfree(c->b, denote_loopfree(c->a, m, env), env);
    case Program::K::Ite: {
      SubDist then_in(m.scope()), else_in(m.scope());
      for (const auto& [s, w] : m.weights()) {
        if (eval_pred(c->guard, s, env))
          then_in.bump(s, w);
        else
          else_in.bump(s, w);
      }
      return add(denote_loopfree(c->a, then_in, env), denote_loopfree(c->b, else_in, env));
    }
    case Program::K::While: throw std::logic_error("denote_loopfree: while construct");
  }
  throw std::logic_error("denote_loopfree: bad node");
}

SubDist assign_by_substitution(const VarName& x, const ExprP& e, const SubDist& m,
                               const TableEnv& env) {
  auto inv = injective_inverse(e, x);
  if (!inv) throw std::invalid_argument("assign_by_substitution: rhs not affine in target");
  SubDist out = substitute(m, *inv, env);
  out.merge_scope({x});
  return out;
}

SubDist guarded_step(const PredP& b, const ProgramP& body, const SubDist& m,
                     const TableEnv& env) {
  SubDist guard_part(m.scope()), rest(m.scope());
  for (const auto& [s, w] : m.weights()) {
    if (eval_pred(b, s, env))
      guard_part.bump(s, w);
    else
      rest.bump(s, w);
  }
  return add(rest, denote_loopfree(body, guard_part, env));
}

DenoteResult guarded_step_bounded(const PredP& b, const ProgramP& body, const SubDist& m,
                                  TableEnvP env, int max_depth) {
  SubDist guard_part(m.scope()), rest(m.scope());
  for (const auto& [s, w] : m.weights()) {
    if (eval_pred(b, s, *env))
      guard_part.bump(s, w);
    else
      rest.bump(s, w);
  }
  DenoteResult stepped = denote(body, guard_part, env, max_depth);
  return {add(rest, stepped.dist), stepped.residual};
}

LoopOutcome denote_loop_bounded(const PredP& b, const ProgramP& body, const SubDist& m,
                                TableEnvP env, int max_depth) {
  EventPred guard{b, env};
  SubDist cur = m;
  Rat inner = 0;
  for (int k = 0;; ++k) {
    Rat guard_mass = prob_of(guard, cur);
    if (guard_mass == 0) {
      // All mass is already on !b states; exact unless nested loops lost
      // mass along the way.
      return {inner == 0, cur, inner, k};
    }
    if (k == max_depth) {
      return {false, filter(EventPred{pr::neg(b), env}, cur), guard_mass + inner, k};
    }
    DenoteResult next = guarded_step_bounded(b, body, cur, env, max_depth);
    if (next.residual == 0 && dist_eq(next.dist, cur)) {
      // Exact fixed point: the [!b] part can never grow again, so the
      // harvested mass is the loop's exact semantics.
      return {inner == 0, filter(EventPred{pr::neg(b), env}, cur), inner, k + 1};
    }
    inner += next.residual;
    cur = next.dist;
  }
}

DenoteResult denote(const ProgramP& c, const SubDist& m, TableEnvP env, int max_depth) {
  switch (c->k) {
    case Program::K::Skip: return {m, 0};
    case Program::K::Assign: return {assign_push(c->var, c->e, m, *env), 0};
    case Program::K::PChoice: {
      DenoteResult l = denote(c->a, scale(c->p, m), env, max_depth);
      DenoteResult r = denote(c->b, scale(1 - c->p, m), env, max_depth);
      return {add(l.dist, r.dist), l.residual + r.residual};
    }
    case Program::K::Seq: {
      DenoteResult l = denote(c->a, m, env, max_depth);
      DenoteResult r = denote(c->b, l.dist, env, max_depth);
      return {r.dist, l.residual + r.residual};
    }
    case Program::K::Ite: {
      SubDist then_in(m.scope()), else_in(m.scope());
      for (const auto& [s, w] : m.weights()) {
        if (eval_pred(c->guard, s, *env))
          then_in.bump(s, w);
        else
          else_in.bump(s, w);
      }
      DenoteResult l = denote(c->a, then_in, env, max_depth);
      DenoteResult r = denote(c->b, else_in, env, max_depth);
      return {add(l.dist, r.dist), l.residual + r.residual};
    }
    case Program::K::While: {
      LoopOutcome lo = denote_loop_bounded(c->guard, c->a, m, env, max_depth);
      return {lo.result, lo.residual};
    }
  }
  throw std::logic_error("denote: bad node");
}

}  // namespace disti
