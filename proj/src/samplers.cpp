#include "disti/samplers.hpp"

#include <algorithm>

namespace disti {

// ---------------------------------------------------------------------------
// FDR
// ---------------------------------------------------------------------------

LoopModel fdr_model(const FdrInstance& inst) {
  if (inst.n < 1) throw std::invalid_argument("fdr: n must be positive");
  using namespace ex;
  PredP guard = pr::cmp(var("v"), RelOp::Lt, var("n"));
  ProgramP body = pg::seq({
      pg::assign("v", mul(cst(2), var("v"))),
      pg::pchoice(pg::assign("c", mul(cst(2), var("c"))), Rat(1, 2),
                  pg::assign("c", add(mul(cst(2), var("c")), cst(1)))),
      pg::ite(pr::cmp(var("c"), RelOp::Ge, var("n")),
              pg::seq(pg::assign("v", sub(var("v"), var("n"))),
                      pg::assign("c", sub(var("c"), var("n")))),
              pg::skip()),
  });
  SubDist init = SubDist::dirac(ProgState({{"v", 1}, {"c", 0}, {"n", inst.n}}), {"v", "c", "n"});
  return {guard, body, empty_env(), init, {"v", "c", "n"}};
}

// 0 <= c and c < min(v,n) and n = <n>
static PredP fdr_cell_selector(const Int& n) {
  using namespace ex;
  return pr::conj(pr::conj(pr::cmp(cst(0), RelOp::Le, var("c")),
                           pr::cmp(var("c"), RelOp::Lt, min(var("v"), var("n")))),
                  pr::cmp(var("n"), RelOp::Eq, cst(n)));
}

DistAssertion ifdr_assertion(const FdrInstance& inst) {
  using namespace ex;
  DistAssertion a(empty_env());
  a.add("Pr[n = " + inst.n.str() + "] = 1",
        AtomProbCmp{pr::cmp(var("n"), RelOp::Eq, cst(inst.n)), RelOp::Eq, {1, nullptr}});
  a.add("Pr[0 < v and v < 2*n - 1] = 1",
        AtomProbCmp{pr::conj(pr::cmp(cst(0), RelOp::Lt, var("v")),
                             pr::cmp(var("v"), RelOp::Lt,
                                     sub(mul(cst(2), var("n")), cst(1)))),
                    RelOp::Eq,
                    {1, nullptr}});
  a.add("Pr[0 <= c and c < min(v,n)] = 1",
        AtomProbCmp{pr::conj(pr::cmp(cst(0), RelOp::Le, var("c")),
                             pr::cmp(var("c"), RelOp::Lt, min(var("v"), var("n")))),
                    RelOp::Eq,
                    {1, nullptr}});
  a.add("uniform over (0 <= c and c < min(v,n) and n = " + inst.n.str() + ") group by (v)",
        AtomUniformOver{fdr_cell_selector(inst.n), {"v"}});
  a.add("mass = 1", AtomMassCmp{RelOp::Eq, 1});
  return a;
}

DistAssertion fdr_partial_post(const FdrInstance& inst) {
  using namespace ex;
  DistAssertion a(empty_env());
  a.add("support in (0 <= c and c < n)",
        AtomSupportIn{pr::conj(pr::cmp(cst(0), RelOp::Le, var("c")),
                               pr::cmp(var("c"), RelOp::Lt, var("n")))});
  a.add("uniform over (0 <= c and c < min(v,n) and n = " + inst.n.str() + ") group by (v)",
        AtomUniformOver{fdr_cell_selector(inst.n), {"v"}});
  return a;
}

// ---------------------------------------------------------------------------
// FLDR preprocessing
// ---------------------------------------------------------------------------

Int FldrInput::m() const {
  Int total = 0;
  for (const Int& x : a) total += x;
  return total;
}

int FldrInput::k() const {
  Int total = m();
  int k = 0;
  while (int_pow2(k) < total) ++k;  // smallest k with 2^k >= m
  return k;
}

Int FldrInput::reject_weight() const { return int_pow2(k()) - m(); }

Int FldrTables::bound(int c) const {
  if (c < 0) throw std::logic_error("bound: negative row");
  Int out = int_pow2(c);
  for (int j = 0; j <= c && j <= k; ++j) out -= h[static_cast<size_t>(j)] * int_pow2(c - j);
  return out;
}

Int FldrTables::label_at(const Int& d, const Int& c) const {
  if (c < 0 || c > k || d < 0) return 0;
  const auto& row = labels[static_cast<size_t>(c)];
  if (d >= Int(row.size())) return 0;
  return row[static_cast<size_t>(d)];
}

FldrTables fldr_preprocess(const FldrInput& input) {
  if (input.a.empty()) throw std::invalid_argument("fldr: empty input");
  for (const Int& x : input.a)
    if (x < 1) throw std::invalid_argument("fldr: weights must be positive");
  FldrTables t;
  t.n = input.n();
  t.m = input.m();
  t.k = input.k();
  std::vector<Int> w = input.a;
  w.push_back(input.reject_weight());  // side n+1

  // Row c holds label i iff a_i/2^k has a 1 at position c behind the comma,
  // i.e. bit (k-c) of a_i is set.
  t.h.assign(static_cast<size_t>(t.k) + 1, 0);
  for (int c = 0; c <= t.k; ++c)
    for (size_t i = 0; i < w.size(); ++i)
      if (bit_test(w[i], static_cast<unsigned>(t.k - c))) t.h[static_cast<size_t>(c)] += 1;

  t.labels.resize(static_cast<size_t>(t.k) + 1);
  for (int c = 0; c <= t.k; ++c) {
    auto& row = t.labels[static_cast<size_t>(c)];
    Int b = t.bound(c);
    if (b < 0) throw std::logic_error("fldr: negative bound, inconsistent tables");
    row.assign(static_cast<size_t>(b), 0);  // internal positions
    // Leaves ordered from the largest to the smallest label, so a reject
    // leaf (n+1) always sits first in its row.
    for (size_t i = w.size(); i-- > 0;)
      if (bit_test(w[i], static_cast<unsigned>(t.k - c))) row.push_back(Int(i + 1));
  }

  // Leaf masses tile the proposal exactly: sum h[c] 2^(k-c) = 2^k.
  Int covered = 0;
  for (int c = 0; c <= t.k; ++c) covered += t.h[static_cast<size_t>(c)] * int_pow2(t.k - c);
  if (covered != int_pow2(t.k)) throw std::logic_error("fldr: leaf mass identity violated");
  return t;
}

int FldrPredicates::is_there(int c) const {
  if (c < 0 || c > t.k) return 0;
  return t.label_at(t.bound(c), c) == t.n + 1 ? 1 : 0;
}

Rat FldrPredicates::prob(int i) const {
  Rat out = 0;
  for (int c = 0; c <= t.k; ++c)
    for (const Int& lab : t.labels[static_cast<size_t>(c)])
      if (lab == i) out += rat_pow2(-c);
  return out;
}

Rat FldrPredicates::probt(int i) const {
  Rat reject = prob(t.n + 1);
  // Geometric series over re-rolls; reject < 1 because m >= 1.
  return prob(i) / (1 - reject);
}

Rat FldrPredicates::prob_level(int i, const Int& j) const {
  Rat out = 0;
  for (int c = 0; c <= t.k; ++c) {
    if (Int(c) <= j) continue;
    for (const Int& lab : t.labels[static_cast<size_t>(c)])
      if (lab == i) out += rat_pow2(j - c);
  }
  return out;
}

Rat FldrPredicates::probt_level(int i, const Int& j) const {
  return prob_level(i, j) + prob_level(t.n + 1, j) * probt(i);
}

// ---------------------------------------------------------------------------
// FLDR program and invariant
// ---------------------------------------------------------------------------

ExprP fldr_bound_expr(int k, ExprP c) {
  using namespace ex;
  // 2^c - sum_{j=0..k} h[j] * (2^c >> j); the shift zeroes the terms with
  // j > c, which keeps the unrolled sum exact for every c in range.
  ExprP total = nullptr;
  for (int j = 0; j <= k; ++j) {
    ExprP term = mul(tab1("h", cst(j)), shr(pow2(c), cst(j)));
    total = total ? add(total, term) : term;
  }
  return sub(pow2(c), total);
}

static TableEnvP fldr_env(const FldrTables& t) {
  auto env = std::make_shared<TableEnv>();
  env->tables1["h"] = t.h;
  std::vector<Int> is_there_row;
  FldrPredicates preds{t};
  for (int c = 0; c <= t.k; ++c) is_there_row.push_back(preds.is_there(c));
  env->tables1["isT"] = is_there_row;
  size_t width = 0;
  for (const auto& row : t.labels) width = std::max(width, row.size());
  width = std::max<size_t>(width, 1);
  std::vector<std::vector<Int>> rect;
  for (const auto& row : t.labels) {
    std::vector<Int> padded = row;
    padded.resize(width, 0);
    rect.push_back(std::move(padded));
  }
  env->tables2["H"] = rect;
  return env;
}

LoopModel fldr_model(const FldrInput& input) {
  using namespace ex;
  FldrTables t = fldr_preprocess(input);
  TableEnvP env = fldr_env(t);
  PredP guard = pr::cmp(var("d"), RelOp::Lt, fldr_bound_expr(t.k, var("c")));
  ProgramP body = pg::seq({
      pg::assign("c", add(var("c"), cst(1))),
      pg::pchoice(pg::assign("d", mul(cst(2), var("d"))), Rat(1, 2),
                  pg::assign("d", add(mul(cst(2), var("d")), cst(1)))),
      pg::ite(pr::cmp(tab2("H", var("d"), var("c")), RelOp::Eq, add(var("n"), cst(1))),
              pg::seq(pg::assign("c", cst(0)), pg::assign("d", cst(0))), pg::skip()),
  });
  SubDist init =
      SubDist::dirac(ProgState({{"d", 0}, {"c", 0}, {"n", Int(input.n())}}), {"d", "c", "n"});
  return {guard, body, env, init, {"d", "c", "n"}};
}

DistAssertion ifldr_assertion(const FldrInput& input) {
  using namespace ex;
  FldrTables t = fldr_preprocess(input);
  auto preds = std::make_shared<FldrPredicates>(FldrPredicates{t});
  TableEnvP env = fldr_env(t);
  Int n(input.n());
  int k = t.k;
  DistAssertion a(env);

  a.add("Pr[n = " + n.str() + "] = 1",
        AtomProbCmp{pr::cmp(var("n"), RelOp::Eq, cst(n)), RelOp::Eq, {1, nullptr}});
  a.add("Pr[0 <= d and d <= " + n.str() + "] = 1",
        AtomProbCmp{pr::between(cst(0), var("d"), cst(n)), RelOp::Eq, {1, nullptr}});
  a.add("Pr[0 <= c and c <= " + std::to_string(k) + "] = 1",
        AtomProbCmp{pr::between(cst(0), var("c"), cst(k)), RelOp::Eq, {1, nullptr}});

  // Condition (d), one bounded_sum per output label i: mass already on
  // i-leaves plus mass at the row starts weighted by the future probability
  // of reaching an i-leaf stays below probt(i) = a_i/m.
  for (int i = 1; i <= input.n(); ++i) {
    AtomBoundedSum sum;
    sum.terms.push_back({pr::cmp(tab2("H", var("d"), var("c")), RelOp::Eq, cst(i)),
                         [](const ProgState&) { return Rat(1); }, "1"});
    PredP restart_filter =
        k == 0 ? pr::falsity()
               : pr::conj(pr::cmp(var("d"), RelOp::Eq, cst(0)),
                          pr::between(cst(0), var("c"), cst(k - 1)));
    sum.terms.push_back({restart_filter,
                         [preds, i](const ProgState& s) {
                           return preds->probt_level(i, s.get("c"));
                         },
                         "probt(" + std::to_string(i) + ", c)"});
    sum.op = RelOp::Le;
    sum.bound = preds->probt(i);
    sum.bound_text = "probt(" + std::to_string(i) + ")";
    a.add("sum{ H[d,c] = " + std::to_string(i) + " } weight 1 + sum{ d = 0 } weight probt(" +
              std::to_string(i) + ", c) <= probt(" + std::to_string(i) + ")",
          std::move(sum));
  }

  PredP pin_n = pr::cmp(var("n"), RelOp::Eq, cst(n));
  ExprP bound_c = fldr_bound_expr(k, var("c"));
  a.add("uniform over (n = " + n.str() + " and 0 <= d and d <= bound(h,c) - 1) group by (c)",
        AtomUniformOver{
            pr::conj(pin_n, pr::between(cst(0), var("d"), sub(bound_c, cst(1)))), {"c"}});
  // Leaves of a row occupy bound(c)..bound(c)+h[c]-1; the reject leaf, when
  // present, is the first of them and is excluded.
  a.add("uniform over (n = " + n.str() +
            " and bound(h,c) + isT[c] <= d and d <= bound(h,c) + h[c] - 1) group by (c)",
        AtomUniformOver{pr::conj(pin_n, pr::between(add(bound_c, tab1("isT", var("c"))), var("d"),
                                                    sub(add(bound_c, tab1("h", var("c"))),
                                                        cst(1)))),
                        {"c"}});
  a.add("mass = 1", AtomMassCmp{RelOp::Eq, 1});
  return a;
}

DistAssertion fldr_partial_post(const FldrInput& input) {
  using namespace ex;
  FldrTables t = fldr_preprocess(input);
  FldrPredicates preds{t};
  DistAssertion a(fldr_env(t));
  for (int i = 1; i <= input.n(); ++i) {
    AtomBoundedSum sum;
    sum.terms.push_back({pr::cmp(tab2("H", var("d"), var("c")), RelOp::Eq, cst(i)),
                         [](const ProgState&) { return Rat(1); }, "1"});
    sum.op = RelOp::Le;
    sum.bound = Rat(input.a[static_cast<size_t>(i - 1)], t.m);
    sum.bound_text = "a_" + std::to_string(i) + "/m";
    a.add("sum{ H[d,c] = " + std::to_string(i) + " } weight 1 <= a_" + std::to_string(i) + "/m",
          std::move(sum));
  }
  return a;
}

BindingRegistry fldr_bindings(const FldrInput& input) {
  auto preds = std::make_shared<FldrPredicates>(FldrPredicates{fldr_preprocess(input)});
  BindingRegistry reg;
  auto level_arg = [](const CoeffBinding::Arg& a, const ProgState& s) -> Int {
    if (std::holds_alternative<Int>(a)) return std::get<Int>(a);
    return s.get(std::get<VarName>(a));
  };
  auto int_arg = [](const CoeffBinding::Arg& a) -> int {
    if (!std::holds_alternative<Int>(a))
      throw std::invalid_argument("label argument must be an integer or parameter");
    return static_cast<int>(std::get<Int>(a));
  };
  reg["prob"] = {-1, [preds, level_arg, int_arg](const std::vector<CoeffBinding::Arg>& args) {
                   if (args.empty() || args.size() > 2)
                     throw std::invalid_argument("prob takes 1 or 2 arguments");
                   int i = int_arg(args[0]);
                   if (args.size() == 1)
                     return CoeffFn([preds, i](const ProgState&) { return preds->prob(i); });
                   auto j = args[1];
                   return CoeffFn([preds, i, j, level_arg](const ProgState& s) {
                     return preds->prob_level(i, level_arg(j, s));
                   });
                 }};
  reg["probt"] = {-1, [preds, level_arg, int_arg](const std::vector<CoeffBinding::Arg>& args) {
                    if (args.empty() || args.size() > 2)
                      throw std::invalid_argument("probt takes 1 or 2 arguments");
                    int i = int_arg(args[0]);
                    if (args.size() == 1)
                      return CoeffFn([preds, i](const ProgState&) { return preds->probt(i); });
                    auto j = args[1];
                    return CoeffFn([preds, i, j, level_arg](const ProgState& s) {
                      return preds->probt_level(i, level_arg(j, s));
                    });
                  }};
  return reg;
}

// ---------------------------------------------------------------------------
// Executable samplers
// ---------------------------------------------------------------------------

ReplayBits::ReplayBits(std::string bits) : bits_(std::move(bits)) {
  for (char c : bits_)
    if (c != '0' && c != '1') throw std::invalid_argument("replay bits must be 0/1");
}

int ReplayBits::next() {
  if (pos_ >= bits_.size()) throw BitsExhausted("replay bit source exhausted");
  return bits_[pos_++] == '1' ? 1 : 0;
}

bool fdr_guard(const FdrInstance& inst, const ProgState& s) { return s.get("v") < inst.n; }

ProgState fdr_step(const FdrInstance& inst, const ProgState& s, int bit) {
  if (!fdr_guard(inst, s)) return s;
  Int v = 2 * s.get("v");
  Int c = 2 * s.get("c") + bit;
  if (c >= inst.n) {
    v -= inst.n;
    c -= inst.n;
  }
  return s.with("v", v).with("c", c);
}

SampleResult fdr_sample(const FdrInstance& inst, BitSource& bits) {
  if (inst.n < 1) throw std::invalid_argument("fdr: n must be positive");
  ProgState s({{"v", 1}, {"c", 0}, {"n", inst.n}});
  long used = 0;
  while (fdr_guard(inst, s)) {
    s = fdr_step(inst, s, bits.next());
    ++used;
  }
  return {s.get("c"), used};
}

bool fldr_guard(const FldrTables& t, const ProgState& s) {
  Int c = s.get("c");
  if (c < 0) throw EvalFault("fldr guard with negative row", s);
  return s.get("d") < t.bound(static_cast<int>(c));
}

ProgState fldr_step(const FldrTables& t, const Int& n_value, const ProgState& s, int bit) {
  if (!fldr_guard(t, s)) return s;
  Int c = s.get("c") + 1;
  Int d = 2 * s.get("d") + bit;
  if (t.label_at(d, c) == n_value + 1) {
    c = 0;
    d = 0;
  }
  return s.with("c", c).with("d", d);
}

SampleResult fldr_sample(const FldrInput& input, BitSource& bits) {
  FldrTables t = fldr_preprocess(input);
  Int n(input.n());
  ProgState s({{"d", 0}, {"c", 0}, {"n", n}});
  long used = 0;
  while (fldr_guard(t, s)) {
    s = fldr_step(t, n, s, bits.next());
    ++used;
  }
  return {t.label_at(s.get("d"), s.get("c")), used};
}

}  // namespace disti
