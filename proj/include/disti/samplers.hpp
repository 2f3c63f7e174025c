#pragma once

#include <random>

#include "disti/assertions.hpp"

namespace disti {

// A single loop with its table environment, initial distribution and
// display scope — the unit the markov and invariant checkers operate on.
struct LoopModel {
  PredP guard;
  ProgramP body;
  TableEnvP env;
  SubDist init;
  std::vector<VarName> scope;

  ProgramP as_program() const { return pg::while_loop(guard, body); }
  OperationalMC mc() const { return {guard, body, env}; }
};

// ---------------------------------------------------------------------------
// Fast Dice Roller: uniform sampling over {0..n-1} from fair coin flips.
// ---------------------------------------------------------------------------

struct FdrInstance {
  Int n;  // > 0
};

// The loop `while (v < n) { v := 2v ; {c := 2c}[1/2]{c := 2c+1} ;
// if (c >= n) { v := v-n ; c := c-n } }` with initial Dirac (v=1, c=0, n=n).
LoopModel fdr_model(const FdrInstance& inst);

// Inductive invariant of the FDR: n deterministic, 0 < v < 2n-1,
// 0 <= c < min(v,n), per-column uniformity, mass 1.
DistAssertion ifdr_assertion(const FdrInstance& inst);

// Partial-correctness post: every terminal column is uniform over
// c in {0..n-1}, hence the marginal on c is r * unif(0..n-1).
DistAssertion fdr_partial_post(const FdrInstance& inst);

// ---------------------------------------------------------------------------
// Fast Loaded Dice Roller: samples i in {1..n} with probability a_i / m.
// ---------------------------------------------------------------------------

struct FldrInput {
  std::vector<Int> a;  // positive weights a_1..a_n

  Int m() const;                       // sum of the a_i
  int k() const;                       // ceil(log2 m); 0 for m = 1
  Int reject_weight() const;           // a_{n+1} = 2^k - m
  int n() const { return static_cast<int>(a.size()); }
};

// Preprocessing output: leaf counts per row and the ragged leaf-label
// matrix of the binary tree over the proposal (a_1/2^k..a_n/2^k, a_{n+1}/2^k).
// Row c holds a leaf labelled i iff bit (k-c) of a_i is set; within a row
// labels run from largest to smallest (so the reject label n+1 comes first).
struct FldrTables {
  Int m;
  int k = 0;
  std::vector<Int> h;                       // rows 0..k
  std::vector<std::vector<Int>> labels;     // ragged; row c has bound(c)+h[c] entries
  int n = 0;

  Int bound(int c) const;  // first leaf position of row c: 2^c - sum h[j] 2^(c-j)
  Int label_at(const Int& d, const Int& c) const;  // 0 off the populated entries
};

FldrTables fldr_preprocess(const FldrInput& input);  // rejects empty/nonpositive input

// Exact rational helpers over the tables (the paper's predicate family).
struct FldrPredicates {
  FldrTables t;

  Int bound(int c) const { return t.bound(c); }
  int is_there(int c) const;            // row c starts with the reject label?
  Rat prob(int i) const;                // sum over i-leaves of 2^-row
  Rat probt(int i) const;               // prob(i) / (1 - prob(n+1)), re-rolls folded in
  Rat prob_level(int i, const Int& j) const;   // from level j: sum 2^-(row-j)
  Rat probt_level(int i, const Int& j) const;  // prob_level + reject chain via probt
};

// Table environment {h, H, isT} plus the loop
//   while (d < bound(h,c)) { c := c+1 ; {d := 2d}[1/2]{d := 2d+1} ;
//     if (H[d,c] = n+1) { c := 0 ; d := 0 } }
// with initial Dirac (d=0, c=0, n=n). bound(h,c) is compiled into the guard
// with pow2/shr, unrolled to the k+1 table rows.
LoopModel fldr_model(const FldrInput& input);

// The guard expression bound(h,c) as used by the model (exposed so the
// invariant selectors can reuse it).
ExprP fldr_bound_expr(int k, ExprP c);

// Inductive invariant: n deterministic, 0 <= d <= n, 0 <= c <= k, the
// per-label mass bound (condition (d)), per-row uniformity of internal
// nodes and of non-reject leaves, mass 1.
DistAssertion ifldr_assertion(const FldrInput& input);

// Partial-correctness post: per-label terminal mass <= a_i/m.
DistAssertion fldr_partial_post(const FldrInput& input);

// Coefficient bindings {prob, probt} for the assertion text format.
BindingRegistry fldr_bindings(const FldrInput& input);

// ---------------------------------------------------------------------------
// Executable samplers in the random bit model
// ---------------------------------------------------------------------------

struct BitsExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class BitSource {
 public:
  virtual ~BitSource() = default;
  virtual int next() = 0;  // 0 or 1
};

// Replays a fixed 0/1 string; throws BitsExhausted past the end.
class ReplayBits : public BitSource {
 public:
  explicit ReplayBits(std::string bits);
  int next() override;
  size_t consumed() const { return pos_; }

 private:
  std::string bits_;
  size_t pos_ = 0;
};

// Seeded pseudorandom fair bits: low bit of successive std::mt19937_64
// draws. Fixed generator for reproducibility.
class SeededBits : public BitSource {
 public:
  explicit SeededBits(uint64_t seed) : gen_(seed) {}
  int next() override { return static_cast<int>(gen_() & 1u); }

 private:
  std::mt19937_64 gen_;
};

struct SampleResult {
  Int value;           // FDR: final c; FLDR: label H[d,c]
  long bits_consumed;  // exactly one bit per loop iteration
};

// One deterministic loop iteration on a single state given the coin flip;
// returns the state unchanged when the guard is false.
ProgState fdr_step(const FdrInstance& inst, const ProgState& s, int bit);
ProgState fldr_step(const FldrTables& t, const Int& n_value, const ProgState& s, int bit);
bool fdr_guard(const FdrInstance& inst, const ProgState& s);
bool fldr_guard(const FldrTables& t, const ProgState& s);

SampleResult fdr_sample(const FdrInstance& inst, BitSource& bits);
SampleResult fldr_sample(const FldrInput& input, BitSource& bits);

}  // namespace disti
