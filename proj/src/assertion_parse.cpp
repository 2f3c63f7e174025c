#include <cctype>
#include <sstream>

#include "disti/assertions.hpp"
#include "disti/parse.hpp"

namespace disti {

namespace {

struct LineCursor {
  const std::string& s;
  size_t i = 0;
  int lineno;

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool done() {
    skip_ws();
    return i >= s.size();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("assertion: " + msg, lineno, static_cast<int>(i) + 1);
  }
  bool try_word(const std::string& w) {
    skip_ws();
    size_t j = i + w.size();
    if (s.compare(i, w.size(), w) != 0) return false;
    if (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
      return false;
    i = j;
    return true;
  }
  void expect_word(const std::string& w) {
    if (!try_word(w)) fail("expected '" + w + "'");
  }
  bool try_ch(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  void expect_punct(const std::string& p) {
    skip_ws();
    if (s.compare(i, p.size(), p) != 0) fail("expected '" + p + "'");
    i += p.size();
  }
  void expect_ch(char c) {
    if (!try_ch(c)) fail(std::string("expected '") + c + "'");
  }
  std::string word() {
    skip_ws();
    size_t j = i;
    if (j < s.size() && (std::isalpha(static_cast<unsigned char>(s[j])) || s[j] == '_')) {
      ++j;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
    }
    if (j == i) fail("expected a name");
    std::string out = s.substr(i, j - i);
    i = j;
    return out;
  }
  Int intlit() {
    skip_ws();
    size_t j = i;
    if (j < s.size() && s[j] == '-') ++j;
    size_t d = j;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j == d) fail("expected an integer");
    Int out(s.substr(i, j - i));
    i = j;
    return out;
  }
  Rat ratlit() {
    Int num = intlit();
    if (try_ch('/')) return Rat(num, intlit());
    return Rat(num);
  }
  // Consumes open..close with nesting, returns the inside.
  std::string balanced(char open, char close) {
    expect_ch(open);
    size_t start = i;
    int depth = 1;
    while (i < s.size()) {
      if (s[i] == open) ++depth;
      if (s[i] == close && --depth == 0) {
        std::string out = s.substr(start, i - start);
        ++i;
        return out;
      }
      ++i;
    }
    fail(std::string("unbalanced '") + open + "'");
  }
  RelOp relop() {
    skip_ws();
    auto two = [&](const char* t) { return s.compare(i, 2, t) == 0; };
    if (two("<=")) { i += 2; return RelOp::Le; }
    if (two(">=")) { i += 2; return RelOp::Ge; }
    if (two("!=")) { i += 2; return RelOp::Ne; }
    if (i < s.size() && s[i] == '<') { ++i; return RelOp::Lt; }
    if (i < s.size() && s[i] == '>') { ++i; return RelOp::Gt; }
    if (i < s.size() && s[i] == '=') { ++i; return RelOp::Eq; }
    fail("expected a comparison operator");
  }
  bool at_digit_or_minus() {
    skip_ws();
    return i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '-');
  }
};

// A coefficient is a rational literal or a call into the binding registry;
// call arguments are integers, the quantified parameter, or state variables.
struct CoeffSrc {
  bool literal = false;
  Rat lit;
  std::string fname;
  std::vector<std::variant<Int, std::string>> args;
  std::string text;
};

CoeffSrc parse_coeff(LineCursor& c) {
  CoeffSrc out;
  size_t start = c.i;
  if (c.at_digit_or_minus()) {
    out.literal = true;
    out.lit = c.ratlit();
  } else {
    out.fname = c.word();
    c.expect_ch('(');
    for (;;) {
      c.skip_ws();
      if (c.at_digit_or_minus())
        out.args.emplace_back(c.intlit());
      else
        out.args.emplace_back(c.word());
      if (!c.try_ch(',')) break;
    }
    c.expect_ch(')');
  }
  out.text = c.s.substr(start, c.i - start);
  return out;
}

CoeffFn make_coeff(const CoeffSrc& src, const BindingRegistry& bindings,
                   const std::optional<std::pair<std::string, Int>>& param, LineCursor& c) {
  if (src.literal) {
    Rat v = src.lit;
    return [v](const ProgState&) { return v; };
  }
  auto it = bindings.find(src.fname);
  if (it == bindings.end()) c.fail("unknown coefficient function '" + src.fname + "'");
  std::vector<CoeffBinding::Arg> args;
  for (const auto& a : src.args) {
    if (std::holds_alternative<Int>(a)) {
      args.emplace_back(std::get<Int>(a));
    } else {
      const std::string& name = std::get<std::string>(a);
      if (param && name == param->first)
        args.emplace_back(param->second);
      else
        args.emplace_back(name);  // state variable, read per state
    }
  }
  if (it->second.arity >= 0 && static_cast<int>(args.size()) != it->second.arity)
    c.fail("'" + src.fname + "' expects " + std::to_string(it->second.arity) + " arguments");
  try {
    return it->second.make(args);
  } catch (const std::exception& e) {
    c.fail("'" + src.fname + "': " + e.what());
  }
}

Rat coeff_constant(const CoeffSrc& src, const BindingRegistry& bindings,
                   const std::optional<std::pair<std::string, Int>>& param, LineCursor& c) {
  CoeffFn fn = make_coeff(src, bindings, param, c);
  return fn(ProgState{});
}

PredP inst_pred(const PredP& p, const std::optional<std::pair<std::string, Int>>& param) {
  if (!param) return p;
  return pred_subst(p, param->first, param->second);
}

}  // namespace

DistAssertion parse_assertion(const std::string& text, TableEnvP env,
                              const BindingRegistry& bindings) {
  DistAssertion out(env);
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw.substr(0, raw.find('#'));
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    LineCursor c{line, 0, lineno};

    std::optional<Quant> quant;
    bool is_exists = c.try_word("exists");
    bool is_forall = !is_exists && c.try_word("forall");
    if (is_exists || is_forall) {
      Quant q;
      q.existential = is_exists;
      q.name = c.word();
      c.expect_word("in");
      q.lo = c.intlit();
      c.expect_punct("..");
      q.hi = c.intlit();
      c.expect_ch(':');
      quant = q;
    }

    // Parse the body into an instantiation function of the parameter value.
    std::function<Atom(const std::optional<std::pair<std::string, Int>>&)> make;
    std::string clause_text = line;
    if (c.try_word("Pr")) {
      PredP event = parse_pred(c.balanced('[', ']'));
      RelOp op = c.relop();
      Rat coeff = 1;
      bool have_coeff = false;
      if (c.at_digit_or_minus()) {
        coeff = c.ratlit();
        have_coeff = true;
        if (c.try_ch('*')) have_coeff = true;  // "k * Pr[..]" continues below
      }
      PredP rhs_event;
      if (c.try_word("Pr")) rhs_event = parse_pred(c.balanced('[', ']'));
      if (!have_coeff && !rhs_event) c.fail("expected a rational or Pr[..] on the right");
      make = [event, op, coeff, rhs_event](const auto& param) -> Atom {
        return AtomProbCmp{inst_pred(event, param), op,
                           ProbRhs{coeff, rhs_event ? inst_pred(rhs_event, param) : nullptr}};
      };
    } else if (c.try_word("mass")) {
      RelOp op = c.relop();
      Rat bound = c.ratlit();
      make = [op, bound](const auto&) -> Atom { return AtomMassCmp{op, bound}; };
    } else if (c.try_word("uniform")) {
      c.expect_word("over");
      PredP sel = parse_pred(c.balanced('(', ')'));
      c.expect_word("group");
      c.expect_word("by");
      std::string names = c.balanced('(', ')');
      std::vector<VarName> group;
      LineCursor nc{names, 0, lineno};
      if (!nc.done()) {
        group.push_back(nc.word());
        while (nc.try_ch(',')) group.push_back(nc.word());
      }
      make = [sel, group](const auto& param) -> Atom {
        return AtomUniformOver{inst_pred(sel, param), group};
      };
    } else if (c.try_word("support")) {
      c.expect_word("in");
      PredP p = parse_pred(c.balanced('(', ')'));
      make = [p](const auto& param) -> Atom { return AtomSupportIn{inst_pred(p, param)}; };
    } else if (c.try_word("sum")) {
      struct TermSrc {
        PredP filter;
        CoeffSrc coeff;
      };
      std::vector<TermSrc> terms;
      for (;;) {
        PredP f = parse_pred(c.balanced('{', '}'));
        c.expect_word("weight");
        CoeffSrc w = parse_coeff(c);
        terms.push_back({f, w});
        if (!c.try_ch('+')) break;
        c.expect_word("sum");
      }
      RelOp op = c.relop();
      CoeffSrc bound = parse_coeff(c);
      make = [terms, op, bound, bindings, lineno, line](const auto& param) -> Atom {
        LineCursor errc{line, 0, lineno};
        AtomBoundedSum atom;
        atom.op = op;
        for (const auto& t : terms) {
          atom.terms.push_back({inst_pred(t.filter, param),
                                make_coeff(t.coeff, bindings, param, errc), t.coeff.text});
        }
        atom.bound = coeff_constant(bound, bindings, param, errc);
        atom.bound_text = bound.text;
        return atom;
      };
    } else {
      c.fail("unrecognized clause");
    }
    if (!c.done()) c.fail("trailing input after clause");

    if (quant) {
      out.add_quantified(clause_text, *quant, [make, name = quant->name](const Int& v) {
        return make(std::make_pair(name, v));
      });
    } else {
      out.add(clause_text, make(std::nullopt));
    }
  }
  return out;
}

}  // namespace disti
