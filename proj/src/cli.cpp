#include "disti/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "disti/builtins.hpp"
#include "disti/parse.hpp"

namespace disti {

namespace {

int default_depth() {
  if (const char* env = std::getenv("DISTI_DEPTH_DEFAULT")) {
    int d = std::atoi(env);
    if (d >= 0) return d;
  }
  return kDefaultMaxDepth;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// "x=0,y=1" (a Dirac) or "1/3:{x=0,y=0} + 2/3:{x=1,y=0}".
SubDist parse_init(const std::string& text) {
  auto parse_bindings = [](const std::string& body) {
    std::map<VarName, Int> b;
    std::istringstream in(body);
    std::string item;
    while (std::getline(in, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("bad binding '" + item + "'");
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
        return s;
      };
      std::string name = trim(item.substr(0, eq));
      std::string val = trim(item.substr(eq + 1));
      if (!is_valid_var_name(name)) throw std::invalid_argument("bad variable '" + name + "'");
      b[name] = Int(val);
    }
    return ProgState(std::move(b));
  };
  SubDist out;
  if (text.find(':') == std::string::npos) {
    if (text.find_first_not_of(" \t") == std::string::npos) return SubDist::dirac(ProgState{});
    return SubDist::dirac(parse_bindings(text));
  }
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, '+')) {
    auto colon = part.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("bad weighted init term");
    Rat w = parse_rat([&] {
      std::string s = part.substr(0, colon);
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    }());
    auto open = part.find('{', colon);
    auto close = part.find('}', colon);
    if (open == std::string::npos || close == std::string::npos)
      throw std::invalid_argument("bad weighted init term (expected {x=..})");
    out.bump(parse_bindings(part.substr(open + 1, close - open - 1)), w);
  }
  return out;
}

nlohmann::json dist_lines(const SubDist& m) {
  nlohmann::json lines = nlohmann::json::array();
  std::istringstream in(render(m));
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

struct ProgramChoice {
  BuiltinModel model;
  std::string builtin_name;  // empty for file programs
};

ProgramChoice resolve_program(const std::string& builtin, const std::string& file,
                              const BuiltinParams& params, const std::string& init) {
  if (!builtin.empty() && !file.empty())
    throw std::invalid_argument("choose exactly one of --builtin / --program");
  if (!builtin.empty()) {
    BuiltinModel m = make_builtin(builtin, params);
    if (!init.empty()) {
      m.init = parse_init(init);
      if (m.loop) m.loop->init = m.init;
    }
    return {std::move(m), builtin};
  }
  if (file.empty()) throw std::invalid_argument("one of --builtin / --program is required");
  ParsedProgram parsed = parse_program(slurp(file));
  BuiltinModel m;
  m.program = parsed.program;
  m.env = parsed.env;
  m.init = init.empty() ? SubDist::dirac(ProgState{}) : parse_init(init);
  if (parsed.program->k == Program::K::While) {
    m.loop = LoopModel{parsed.program->guard, parsed.program->a, parsed.env, m.init,
                       m.init.scope()};
  }
  return {std::move(m), ""};
}

// Convex combinations of reach elements are members of every convex
// assertion (all the builtin invariants are convex), useful as extra
// inductivity candidates.
std::vector<SubDist> fuzz_candidates(const std::vector<SubDist>& reach, int count,
                                     uint64_t seed) {
  std::vector<SubDist> out;
  if (reach.size() < 2 || count <= 0) return out;
  std::mt19937_64 gen(seed);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<size_t> pick(0, reach.size() - 1);
    size_t a = pick(gen), b = pick(gen);
    std::uniform_int_distribution<int> num(0, 16);
    Rat lambda(num(gen), 16);
    out.push_back(add(scale(lambda, reach[a]), scale(1 - lambda, reach[b])));
  }
  return out;
}

struct CheckOptions {
  std::string mode;
  int depth;
  int fuzz;
  uint64_t seed;
  bool assume_ast;
};

CheckReport run_one_check(const LoopModel& loop, const DistAssertion& inv,
                          const DistAssertion& post, const CheckOptions& opt) {
  if (opt.mode == "initial") return check_initial(inv, {loop.init});
  if (opt.mode == "inductive") {
    ReachSet rs = reach_set(loop.mc(), {loop.init}, opt.depth);
    std::vector<SubDist> candidates = rs.dists;
    std::string population =
        "reach set to depth " + std::to_string(opt.depth) + " (" +
        std::to_string(rs.dists.size()) + " elements)";
    if (opt.fuzz > 0) {
      auto extra = fuzz_candidates(rs.dists, opt.fuzz, opt.seed);
      candidates.insert(candidates.end(), extra.begin(), extra.end());
      population += " plus " + std::to_string(extra.size()) + " convex combinations";
    }
    return check_inductive(inv, loop.guard, loop.body, loop.env, candidates, population);
  }
  if (opt.mode == "partial")
    return check_hoare_partial(inv, loop.guard, loop.body, loop.env, post, {loop.init},
                               opt.depth);
  if (opt.mode == "total")
    return check_hoare_total(inv, loop.guard, loop.body, loop.env, post, {loop.init}, opt.depth,
                             opt.assume_ast);
  if (opt.mode == "unmod")
    return check_unmod(pg::while_loop(loop.guard, loop.body), loop.init, loop.env, opt.depth);
  throw std::invalid_argument("unknown mode '" + opt.mode + "'");
}

// "--n 3" or "--n 2..8"
std::vector<Int> parse_n_range(const std::string& text) {
  auto dots = text.find("..");
  if (dots == std::string::npos) return {Int(text)};
  Int lo(text.substr(0, dots)), hi(text.substr(dots + 2));
  if (lo > hi) throw std::invalid_argument("empty range '" + text + "'");
  std::vector<Int> out;
  for (Int v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

std::vector<Int> parse_a_list(const std::string& text) {
  std::vector<Int> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.emplace_back(item);
  if (out.empty()) throw std::invalid_argument("empty --a list");
  return out;
}

DistAssertion resolve_assertion(const std::string& spec, const LoopModel& loop,
                                const BuiltinParams& params, const std::string& builtin_name) {
  if (spec.rfind("builtin:", 0) == 0) return builtin_assertion(spec.substr(8), params);
  BindingRegistry bindings;
  if (builtin_name == "fldr") bindings = fldr_bindings({params.a});
  return parse_assertion(slurp(spec), loop.env, bindings);
}

DistAssertion resolve_post(const std::string& spec, const LoopModel& loop,
                           const BuiltinParams& params, const std::string& builtin_name) {
  if (spec.empty()) {
    if (builtin_name == "fdr") return builtin_post("fdr-uniform", params);
    if (builtin_name == "fldr") return builtin_post("fldr-bounds", params);
    if (builtin_name == "fig6") return builtin_post("fig6-split", params);
    return builtin_post("trivial", params);
  }
  if (spec.rfind("builtin:", 0) == 0) return builtin_post(spec.substr(8), params);
  BindingRegistry bindings;
  if (builtin_name == "fldr") bindings = fldr_bindings({params.a});
  return parse_assertion(slurp(spec), loop.env, bindings);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"exact distribution-transformer interpreter and invariant checker"};
  app.require_subcommand(1);

  std::string builtin, program_file, init_str, format = "text";
  std::string n_str, a_str, p_str;
  int depth = default_depth();

  auto add_common = [&](CLI::App* cmd, bool with_depth = true) {
    cmd->add_option("--builtin", builtin, "builtin program name");
    cmd->add_option("--program", program_file, "program file");
    cmd->add_option("--init", init_str, "initial distribution");
    cmd->add_option("--n", n_str, "instance parameter n (or lo..hi for check sweeps)");
    cmd->add_option("--a", a_str, "comma-separated positive weights");
    cmd->add_option("--p", p_str, "coin bias as a rational");
    if (with_depth) cmd->add_option("--depth", depth, "loop unrolling depth");
    cmd->add_option("--format", format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));
  };

  CLI::App* run = app.add_subcommand("run", "evaluate a program on an initial distribution");
  add_common(run);

  bool graph = false;
  CLI::App* reach = app.add_subcommand("reach", "enumerate reachable distributions of a loop");
  add_common(reach);
  reach->add_flag("--graph", graph, "emit the explicit MC fragment as edges");

  std::string invariant_spec, post_spec, mode = "inductive";
  bool assume_ast = false;
  int fuzz = 0;
  uint64_t seed = 0;
  CLI::App* check = app.add_subcommand("check", "check distributional assertions");
  add_common(check);
  check->add_option("--invariant", invariant_spec, "builtin:<name> or an assertion file")
      ->required();
  check->add_option("--post", post_spec, "postcondition for hoare modes");
  check->add_option("--mode", mode, "initial|inductive|partial|total|unmod")
      ->check(CLI::IsMember({"initial", "inductive", "partial", "total", "unmod"}));
  check->add_flag("--assume-ast", assume_ast, "assume almost-sure termination (total mode)");
  check->add_option("--fuzz", fuzz, "extra convex-combination candidates (inductive mode)");
  check->add_option("--seed", seed, "seed for --fuzz");

  std::string replay;
  long count = 1;
  uint64_t sample_seed = 0;
  CLI::App* sample = app.add_subcommand("sample", "run the executable samplers");
  add_common(sample, false);
  CLI::Option* replay_opt = sample->add_option("--replay", replay, "fixed 0/1 bit string");
  CLI::Option* seed_opt = sample->add_option("--seed", sample_seed, "seeded fair-bit source");
  sample->add_option("--count", count, "number of records with --seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    BuiltinParams params;
    if (!n_str.empty() && n_str.find("..") == std::string::npos) params.n = Int(n_str);
    if (!a_str.empty()) params.a = parse_a_list(a_str);
    if (!p_str.empty()) params.p = parse_rat(p_str);

    if (app.got_subcommand("run")) {
      ProgramChoice pc = resolve_program(builtin, program_file, params, init_str);
      DenoteResult res = denote(pc.model.program, pc.model.init, pc.model.env, depth);
      if (format == "json") {
        nlohmann::json j;
        j["schema"] = 1;
        j["command"] = "run";
        j["dist"] = dist_lines(res.dist);
        j["mass"] = rat_str(res.dist.mass());
        j["residual"] = rat_str(res.residual);
        out << j.dump(2) << '\n';
      } else {
        out << render(res.dist);
        out << "mass: " << rat_str(res.dist.mass()) << '\n';
        out << "residual: " << rat_str(res.residual) << '\n';
      }
      return 0;
    }

    if (app.got_subcommand("reach")) {
      ProgramChoice pc = resolve_program(builtin, program_file, params, init_str);
      if (!pc.model.loop) {
        err << "reach requires the program to be a single top-level loop\n";
        return 4;
      }
      const LoopModel& loop = *pc.model.loop;
      ReachSet rs = reach_set(loop.mc(), {loop.init}, depth);
      if (graph) {
        std::string g = graph_export(loop.mc(), rs, loop.scope);
        if (format == "json") {
          nlohmann::json j;
          j["schema"] = 1;
          j["command"] = "reach";
          nlohmann::json lines = nlohmann::json::array();
          std::istringstream in(g);
          std::string line;
          while (std::getline(in, line)) lines.push_back(line);
          j["graph"] = lines;
          out << j.dump(2) << '\n';
        } else {
          out << g;
        }
        return 0;
      }
      if (format == "json") {
        nlohmann::json j;
        j["schema"] = 1;
        j["command"] = "reach";
        nlohmann::json elements = nlohmann::json::array();
        for (size_t i = 0; i < rs.dists.size(); ++i) {
          nlohmann::json e;
          e["first_depth"] = rs.first_depth[i];
          e["dist"] = dist_lines(rs.dists[i]);
          elements.push_back(e);
        }
        j["elements"] = elements;
        out << j.dump(2) << '\n';
      } else {
        for (size_t i = 0; i < rs.dists.size(); ++i) {
          out << "# element " << i << ", first reached at depth " << rs.first_depth[i] << '\n';
          out << render(rs.dists[i]);
        }
      }
      return 0;
    }

    if (app.got_subcommand("check")) {
      // Sweep over the n range when given; otherwise a single instance.
      std::vector<BuiltinParams> instances;
      if (!n_str.empty() && n_str.find("..") != std::string::npos) {
        for (const Int& v : parse_n_range(n_str)) {
          BuiltinParams p = params;
          p.n = v;
          instances.push_back(p);
        }
      } else {
        instances.push_back(params);
      }
      CheckOptions opt{mode, depth, fuzz, seed, assume_ast};
      nlohmann::json results = nlohmann::json::array();
      bool all_pass = true;
      for (const BuiltinParams& inst : instances) {
        ProgramChoice pc = resolve_program(builtin, program_file, inst, init_str);
        if (!pc.model.loop) {
          err << "check mode '" << mode << "' requires a single top-level loop\n";
          return 4;
        }
        DistAssertion inv = resolve_assertion(invariant_spec, *pc.model.loop, inst,
                                              pc.builtin_name);
        DistAssertion post = resolve_post(post_spec, *pc.model.loop, inst, pc.builtin_name);
        CheckReport report = run_one_check(*pc.model.loop, inv, post, opt);
        nlohmann::json j = report_json(report);
        if (inst.n) j["param"] = "n=" + inst.n->str();
        results.push_back(j);
        all_pass = all_pass && report.pass;
      }
      nlohmann::json j;
      j["schema"] = 1;
      j["command"] = "check";
      j["mode"] = mode;
      j["verdict"] = all_pass ? "pass" : "fail";
      j["results"] = results;
      if (format == "text") {
        out << (all_pass ? "pass" : "fail") << '\n';
        for (const auto& r : results) {
          out << "  " << (r.contains("param") ? r["param"].get<std::string>() + ": " : "")
              << r["verdict"].get<std::string>();
          if (r.contains("witness"))
            out << "  [" << r["witness"]["clause"].get<std::string>() << ": "
                << r["witness"]["note"].get<std::string>() << "]";
          out << '\n';
        }
      } else {
        out << j.dump(2) << '\n';
      }
      return all_pass ? 0 : 1;
    }

    if (app.got_subcommand("sample")) {
      if (builtin != "fdr" && builtin != "fldr")
        throw std::invalid_argument("sample requires --builtin fdr or fldr");
      auto emit = [&](BitSource& bits) {
        SampleResult r = builtin == "fdr" ? fdr_sample({params.n.value_or(0)}, bits)
                                          : fldr_sample({params.a}, bits);
        out << r.value.str() << ", " << r.bits_consumed << '\n';
      };
      if (seed_opt->count() > 0) {
        SeededBits bits(sample_seed);
        for (long i = 0; i < count; ++i) emit(bits);
      } else if (replay_opt->count() > 0) {
        ReplayBits bits(replay);
        emit(bits);
      } else {
        throw std::invalid_argument("sample requires --replay or --seed");
      }
      return 0;
    }
  } catch (const ParseError& e) {
    err << e.what() << '\n';
    return 2;
  } catch (const EvalFault& e) {
    err << "evaluation fault: " << e.what() << '\n';
    return 3;
  } catch (const PreconditionError& e) {
    err << "refused: " << e.what() << '\n';
    return 5;
  } catch (const BitsExhausted& e) {
    err << e.what() << '\n';
    return 6;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace disti
