// Command-line workbench for CRWL program modules: parsing and checking,
// module-algebra flattening, bounded canonical models, proofs, equivalence
// verdicts, and structured (hidden-symbol) representations.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "crwl/gpc.hpp"
#include "crwl/parser.hpp"
#include "crwl/semantics.hpp"
#include "crwl/structured.hpp"

namespace fs = std::filesystem;
using namespace crwl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 3;

struct RunConfig {
  std::vector<std::string> files;
  std::vector<std::string> include_dirs;
  int depth = 1;
  int vars = 1;
  int proof_depth = 48;
  Limits limits;
  bool machine = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw Error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Loads all named files plus every .crwl file on the include paths and
// CRWL_PATH, reporting warnings on stderr.
FlattenEnv load_environment(const RunConfig& cfg) {
  std::vector<std::string> paths = cfg.files;
  std::vector<std::string> dirs = cfg.include_dirs;
  if (const char* env = std::getenv("CRWL_PATH")) {
    std::string s(env);
    size_t pos = 0;
    while (pos <= s.size()) {
      size_t colon = s.find(':', pos);
      std::string dir = s.substr(pos, colon == std::string::npos
                                          ? std::string::npos
                                          : colon - pos);
      if (!dir.empty()) dirs.push_back(dir);
      if (colon == std::string::npos) break;
      pos = colon + 1;
    }
  }
  for (const std::string& dir : dirs) {
    if (!fs::is_directory(dir)) throw Error("not a directory: " + dir);
    std::vector<std::string> found;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.path().extension() == ".crwl")
        found.push_back(entry.path().string());
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  FlattenEnv env;
  for (const std::string& path : paths) {
    ParsedFile pf = parse_file(read_file(path));
    for (const SourceModule& sm : pf.modules)
      for (const std::string& w : sm.warnings)
        std::cerr << path << ": warning: " << sm.name << ": " << w << "\n";
    add_to_env(env, pf);
  }
  return env;
}

// Constructor signature in scope for an expression: everything occurring in
// the structured representation (visible and hidden parts).
Signature scope_constructors(const StructuredModule& sm) {
  Signature out;
  for (const Rule& r : sm.full_rules()) {
    std::function<void(const Term&)> scan = [&](const Term& t) {
      if (!t.is_app()) return;
      if (t.symbol().is_constructor() && !t.symbol().labeled())
        out.add(t.symbol());
      for (const Term& a : t.args()) scan(a);
    };
    for (const Term& p : r.patterns) scan(p);
    scan(r.rhs);
    for (const Statement& c : r.conditions) {
      scan(c.lhs);
      scan(c.rhs);
    }
  }
  return out;
}

Signature goal_symbols(const StructuredModule& sm) {
  Signature sig = scope_constructors(sm);
  for (const SymbolRef& f : sm.exports) sig.add(f);
  for (const SymbolRef& f : sm.params) sig.add(f);
  return sig;
}

int cmd_check(const RunConfig& cfg) {
  size_t count = 0;
  FlattenEnv env;
  for (const std::string& path : cfg.files) {
    ParsedFile pf = parse_file(read_file(path));
    for (const SourceModule& sm : pf.modules) {
      for (const std::string& w : sm.warnings)
        std::cout << path << ": warning: " << sm.name << ": " << w << "\n";
      ++count;
    }
    add_to_env(env, pf);
  }
  // resolve every binding so unresolved names and cycles surface
  UniversePtr u =
      term_bounds(Signature{}, cfg.depth, cfg.vars, cfg.limits);
  for (const auto& [name, expr] : env.bindings) iota(expr, env);
  std::cout << "ok: " << count << " module definition(s)\n";
  return kExitOk;
}

int cmd_flatten(const RunConfig& cfg, const std::string& expr_text,
                const std::string& strategy) {
  FlattenEnv env = load_environment(cfg);
  ExprPtr e = parse_expr(expr_text);
  if (strategy == "materialize") {
    StructuredModule probe = iota(e, env);
    UniversePtr u = enumerate_universe(scope_constructors(probe), cfg.depth,
                                       cfg.vars, cfg.limits);
    std::vector<std::string> warnings;
    Module m = flatten_materialized(e, env, u, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << print_module(m);
    return kExitOk;
  }
  StructuredModule sm = iota(e, env);
  if (sm.is_plain())
    std::cout << print_module(sm.to_plain());
  else
    std::cout << print_structured(sm);
  return kExitOk;
}

int cmd_model(const RunConfig& cfg, const std::string& expr_text, bool all) {
  FlattenEnv env = load_environment(cfg);
  ExprPtr e = parse_expr(expr_text);
  StructuredModule sm = iota(e, env);
  UniversePtr u = enumerate_universe(scope_constructors(sm), cfg.depth,
                                     cfg.vars, cfg.limits);
  Algebra model = u_model(sm, u);
  std::string dump = dump_algebra(model, all);
  if (cfg.machine) {
    std::istringstream in(dump);
    std::string line;
    while (std::getline(in, line)) {
      size_t sep = line.find(" |-> ");
      std::cout << "model\t" << line.substr(0, sep) << "\t"
                << line.substr(sep + 5) << "\n";
    }
  } else {
    std::cout << dump;
  }
  return kExitOk;
}

int cmd_repr(const RunConfig& cfg, const std::string& expr_text) {
  FlattenEnv env = load_environment(cfg);
  StructuredModule sm = iota(parse_expr(expr_text), env);
  std::cout << print_structured(sm);
  return kExitOk;
}

int cmd_prove(const RunConfig& cfg, const std::string& expr_text,
              const std::string& goal_text, const std::string& engine,
              bool trace) {
  FlattenEnv env = load_environment(cfg);
  StructuredModule sm = iota(parse_expr(expr_text), env);
  Statement goal = parse_goal(goal_text, goal_symbols(sm));

  bool want_fixpoint = engine == "fixpoint" || engine == "both";
  bool want_gpc = engine == "gpc" || engine == "both";
  bool gpc_applicable =
      goal.kind == Statement::Kind::Joinability || goal.rhs.is_cterm();
  if (engine == "gpc" && !gpc_applicable)
    throw Error("GPC proves reductions to constructor terms only; "
                "use --engine fixpoint for a general right-hand side");

  std::optional<bool> fixpoint_verdict;
  std::optional<ProveResult> gpc_result;

  Signature ctors = scope_constructors(sm);
  if (want_fixpoint) {
    UniversePtr u =
        enumerate_universe(ctors, cfg.depth, cfg.vars, cfg.limits);
    Algebra model = u_model(sm, u);
    fixpoint_verdict = satisfies(model, goal, CSubst{});
  }
  if (want_gpc && gpc_applicable) {
    Signature ext = ctors;
    for (const Rule& r : sm.rules_h) {
      std::function<void(const Term&)> scan = [&](const Term& t) {
        if (!t.is_app()) return;
        if (t.symbol().is_constructor() && t.symbol().labeled())
          ext.add(t.symbol());
        for (const Term& a : t.args()) scan(a);
      };
      for (const Term& p : r.patterns) scan(p);
      scan(r.rhs);
    }
    UniversePtr u = term_bounds(ext, cfg.depth, cfg.vars, cfg.limits);
    Prover prover(sm.full_rules(), {cfg.proof_depth, u});
    gpc_result = prover.prove(goal);
    if (trace && gpc_result->proven)
      std::cout << format_derivation(*gpc_result->derivation);
  }

  if (engine == "both" && fixpoint_verdict && gpc_result && gpc_applicable) {
    if (*fixpoint_verdict != gpc_result->proven) {
      std::cerr << "engine disagreement: fixpoint="
                << (*fixpoint_verdict ? "proven" : "not proven")
                << " gpc=" << (gpc_result->proven ? "proven" : "not proven")
                << "\n";
      return kExitInconclusive;
    }
  }

  bool proven = fixpoint_verdict ? *fixpoint_verdict : gpc_result->proven;
  std::string binding;
  if (!proven && gpc_result)
    binding = gpc_result->depth_limited ? " (binding bound: proof depth)"
                                        : " (exhausted at universe bounds)";
  else if (!proven)
    binding = " (at universe bounds)";
  if (cfg.machine)
    std::cout << "verdict\t" << (proven ? "proven" : "not-proven") << "\n";
  else
    std::cout << (proven ? "proven" : "not proven within bounds" + binding)
              << "\n";
  return proven ? kExitOk : kExitNegative;
}

int cmd_equiv(const RunConfig& cfg, const std::string& e1_text,
              const std::string& e2_text, const std::string& rel_text,
              bool exhaustive, size_t samples, uint64_t seed) {
  FlattenEnv env = load_environment(cfg);
  auto rel = relation_from_string(rel_text);
  if (!rel) throw Error("unknown relation: " + rel_text);
  (void)exhaustive;

  ExprPtr e1 = parse_expr(e1_text);
  ExprPtr e2 = parse_expr(e2_text);
  StructuredModule s1 = iota(e1, env);
  StructuredModule s2 = iota(e2, env);
  Signature ctors = scope_constructors(s1);
  ctors.merge(scope_constructors(s2));
  UniversePtr u = enumerate_universe(ctors, cfg.depth, cfg.vars, cfg.limits);
  Module m1 = flatten_materialized(e1, env, u);
  Module m2 = flatten_materialized(e2, env, u);

  EquivOptions opts;
  opts.exhaustive = samples == 0;  // --samples switches to the fallback
  opts.samples = samples;
  opts.seed = seed;
  EquivVerdict v = equiv(m1.rules(), m2.rules(), *rel, u, opts);

  if (cfg.machine) {
    const char* tag = v.outcome == Outcome::EquivalentAtBounds
                          ? "equivalent-at-bounds"
                          : v.outcome == Outcome::Counterexample
                                ? "counterexample"
                                : "inconclusive";
    std::cout << "verdict\t" << tag << "\n";
  }
  switch (v.outcome) {
    case Outcome::EquivalentAtBounds:
      if (!cfg.machine)
        std::cout << "equivalent-at-bounds (relation " << relation_name(*rel)
                  << ", " << v.examined << " algebra(s) examined)\n";
      return kExitOk;
    case Outcome::Counterexample: {
      if (cfg.machine) return kExitNegative;
      std::cout << "counterexample (relation " << relation_name(*rel) << ")\n";
      if (v.witness_sigma)
        std::cout << "  deleted signature: " << to_string(*v.witness_sigma)
                  << "\n";
      if (v.discrepancy) {
        std::cout << "  at " << to_string(Term::app(v.discrepancy->f,
                                                    v.discrepancy->args))
                  << ": value " << to_string(v.discrepancy->value) << "\n";
      }
      if (v.witness_algebra) {
        std::string dump = dump_algebra(*v.witness_algebra, true);
        std::cout << "  witness algebra:\n";
        std::istringstream in(dump);
        std::string line;
        while (std::getline(in, line)) std::cout << "    " << line << "\n";
      }
      if (!v.note.empty()) std::cout << "  note: " << v.note << "\n";
      return kExitNegative;
    }
    case Outcome::InconclusiveSampled:
      if (!cfg.machine)
        std::cout << "inconclusive (sampled " << v.examined
                  << " algebra(s), no counterexample)\n";
      return kExitInconclusive;
  }
  return kExitInconclusive;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "crwl - a workbench for constructor-based conditional rewriting "
      "logic program modules"};
  app.require_subcommand(1);

  RunConfig cfg;
  app.add_option("-I,--include", cfg.include_dirs,
                 "directory scanned for .crwl files (CRWL_PATH adds more)");
  app.add_option("--depth", cfg.depth, "universe term depth bound")
      ->capture_default_str();
  app.add_option("--vars", cfg.vars, "universe variable pool size")
      ->capture_default_str();
  app.add_option("--proof-depth", cfg.proof_depth,
                 "proof tree depth budget for the GPC engine")
      ->capture_default_str();
  app.add_option("--max-universe", cfg.limits.max_universe_terms,
                 "cap on enumerated universe terms")
      ->capture_default_str();
  app.add_option("--max-instances", cfg.limits.max_instances,
                 "cap on rule instances per rule")
      ->capture_default_str();
  app.add_option("--max-algebras", cfg.limits.max_algebras,
                 "cap on exhaustively enumerated algebras")
      ->capture_default_str();
  app.add_flag("--machine", cfg.machine,
               "machine-readable key<TAB>value output");

  auto* check = app.add_subcommand("check", "parse and validate module files");
  check->fallthrough();
  check->add_option("files", cfg.files, "module files")->required();

  std::string expr_text, goal_text;
  std::string strategy = "structured";
  std::string engine = "both";
  std::string relation = "t";
  std::string expr2_text;
  bool all_rows = false;
  bool trace = false;
  bool exhaustive = false;
  size_t samples = 0;
  uint64_t seed = 1;

  auto add_files = [&cfg](CLI::App* sub) {
    sub->add_option("files", cfg.files, "module files");
  };

  auto* flatten =
      app.add_subcommand("flatten", "evaluate a module expression");
  flatten->fallthrough();
  flatten->add_option("-e,--expr", expr_text, "module expression")->required();
  flatten->add_option("--strategy", strategy,
                      "structured | materialize (closures as canonical rules)")
      ->check(CLI::IsMember({"structured", "materialize"}))
      ->capture_default_str();
  add_files(flatten);

  auto* model = app.add_subcommand(
      "model", "bounded canonical model of an expression");
  model->fallthrough();
  model->add_option("-e,--expr", expr_text, "module expression")->required();
  model->add_flag("--all", all_rows, "include bottom-only rows");
  add_files(model);

  auto* prove = app.add_subcommand("prove", "prove a goal statement");
  prove->fallthrough();
  prove->add_option("-e,--expr", expr_text, "module expression")->required();
  prove->add_option("-g,--goal", goal_text, "goal: `a -> b` or `a >< b`")
      ->required();
  prove->add_option("--engine", engine, "fixpoint | gpc | both")
      ->check(CLI::IsMember({"fixpoint", "gpc", "both"}))
      ->capture_default_str();
  prove->add_flag("--trace", trace, "print the GPC derivation tree");
  add_files(prove);

  auto* eq = app.add_subcommand("equiv", "decide a program equivalence");
  eq->fallthrough();
  std::vector<std::string> exprs;
  eq->add_option("-e,--expr", exprs, "the two module expressions")
      ->expected(2);
  eq->add_option("--relation", relation, "lm | t | m | cm | d")
      ->capture_default_str();
  eq->add_flag("--exhaustive", exhaustive,
               "enumerate every algebra (the default; refused over the cap)");
  eq->add_option("--samples", samples,
                 "switch to the sampling fallback with this many draws");
  eq->add_option("--seed", seed, "sampling seed")->capture_default_str();
  add_files(eq);

  auto* repr = app.add_subcommand(
      "repr", "structured (hidden-symbol) representation");
  repr->fallthrough();
  repr->add_option("-e,--expr", expr_text, "module expression")->required();
  add_files(repr);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(cfg);
    if (flatten->parsed()) return cmd_flatten(cfg, expr_text, strategy);
    if (model->parsed()) return cmd_model(cfg, expr_text, all_rows);
    if (prove->parsed())
      return cmd_prove(cfg, expr_text, goal_text, engine, trace);
    if (eq->parsed())
      return cmd_equiv(cfg, exprs.at(0), exprs.at(1), relation, exhaustive,
                       samples, seed);
    if (repr->parsed()) return cmd_repr(cfg, expr_text);
  } catch (const CapError& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return kExitInconclusive;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
