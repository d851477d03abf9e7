#include "doctest.h"

#include <random>

#include "crwl/parser.hpp"
#include "crwl/structured.hpp"
#include "helpers.hpp"

using namespace crwl;

namespace {

Module mod(const char* src) { return *parse_module(src).module; }

Signature consts(std::initializer_list<const char*> names) {
  Signature s;
  for (const char* n : names) s.add(ctor(n, 0));
  return s;
}

}  // namespace

TEST_CASE("union of the money-change modules") {
  FlattenEnv env = load_env({"paper.crwl"});
  Module u = union_modules(env_module(env, "MoneyChange"),
                           env_module(env, "NewCoins"));
  CHECK(u.exports() ==
        FnSig{func("coin", 0), func("getcoin", 1), func("change", 1)});
  CHECK(u.params() == FnSig{func("_=<_", 2), func("_-_", 2)});
  size_t coins = 0;
  for (const Rule& r : u.rules())
    if (r.head == func("coin", 0)) ++coins;
  CHECK(coins == 5);
}

TEST_CASE("union laws") {
  FlattenEnv env = load_env({"paper.crwl"});
  const Module& p = env_module(env, "MoneyChange");
  CHECK(union_modules(p, Module::null_module()) == p);
  CHECK(union_modules(p, p) == p);
  const Module& q = env_module(env, "NewCoins");
  CHECK(union_modules(p, q) == union_modules(q, p));
  const Module& r = env_module(env, "WeekDays");
  CHECK(union_modules(union_modules(p, q), r) ==
        union_modules(p, union_modules(q, r)));
  // kind clash across operands is a hard error
  Module cf = mod("A = <{},{f/1},{f(X) -> k(X).}>");
  Module ff = mod("B = <{},{k/1},{k(X) -> X.}>");
  CHECK_THROWS_AS(union_modules(cf, ff), Error);
}

TEST_CASE("deletion of a signature") {
  FlattenEnv env = load_env({"paper.crwl"});
  const Module& onl = env_module(env, "OrdNatList");
  FnSig sigma = {func("isnat", 1), func("leq", 2)};
  Module d = delete_signature(onl, sigma);
  CHECK(d.params() == sigma);
  CHECK(d.exports() == FnSig{func("insert", 2)});
  CHECK(d.rules().size() == 3);

  CHECK(delete_signature(onl, {}) == onl);
  CHECK(delete_signature(delete_signature(onl, {func("isnat", 1)}),
                         {func("leq", 2)}) ==
        delete_signature(onl, sigma));
  CHECK(delete_signature(Module::null_module(), sigma) ==
        Module::null_module());
}

TEST_CASE("renaming a module") {
  FlattenEnv env = load_env({"paper.crwl"});
  const Module& onl = env_module(env, "OrdNatList");
  Module d = delete_signature(onl, {func("isnat", 1), func("leq", 2)});
  Renaming rho;
  rho.add(func("isnat", 1), func("isbasetype", 1));
  Module renamed = rename_module(d, rho);
  CHECK(renamed.params() == FnSig{func("isbasetype", 1), func("leq", 2)});
  CHECK(renamed.exports() == FnSig{func("insert", 2)});
  // the paper's OrdList is exactly this module
  Module ordlist = flatten_materialized(
      parse_expr("OrdList"), env,
      enumerate_universe(onl.constructor_signature(), 1, 1));
  CHECK(renamed == ordlist);

  CHECK(rename_module(onl, Renaming{}) == onl);
  Renaming r1, r2, r21;
  r1.add(func("isnat", 1), func("isbasetype", 1));
  r2.add(func("isbasetype", 1), func("isnice", 1));
  CHECK(rename_module(rename_module(d, r1), r2) ==
        rename_module(d, r2.compose_after(r1)));
  // renaming may not touch constructor names
  Renaming bad;
  bad.add(func("zero", 0), func("one", 0));
  CHECK_THROWS_AS(rename_module(onl, bad), Error);
}

TEST_CASE("materialized closure of the week-days module") {
  FlattenEnv env = load_env({"paper.crwl"});
  const Module& wd = env_module(env, "WeekDays");
  UniversePtr u = enumerate_universe(wd.constructor_signature(), 0, 0);
  Module closed = close_materialized(wd, wd.exports(), u);
  CHECK(closed.params().empty());
  CHECK(closed.exports() == wd.exports());
  CHECK(closed.rules().size() == 14);
  for (const Rule& r : closed.rules()) CHECK(r.conditions.empty());
  // the closure lists exactly the paper's ground graph
  Module expected = mod(
      "C = <{},{next/1, before/1},"
      "{ next(mo) -> tu. next(tu) -> we. next(we) -> th. next(th) -> fr."
      "  next(fr) -> sa. next(sa) -> su. next(su) -> mo."
      "  before(tu) -> mo. before(we) -> tu. before(th) -> we."
      "  before(fr) -> th. before(sa) -> fr. before(su) -> sa."
      "  before(mo) -> su. }>");
  CHECK(closed == expected);
}

TEST_CASE("materialization is idempotent at fixed bounds") {
  // regression: instantiating canonical rules can stay inside the universe
  // where the original derivation could not; the stabilized graph makes
  // re-materialization the identity
  Module p = mod(
      "P = <{},{g/2, h/0},"
      "{ g(V1,V2) -> s(V1) <= s(V2) >< s(V2). h -> s(s(V1)). }>");
  Signature cs = consts({"a", "b"});
  cs.add(ctor("s", 1));
  UniversePtr u = enumerate_universe(cs, 1, 1);
  Module once = close_materialized(p, p.exports(), u);
  Module twice = close_materialized(once, once.exports(), u);
  CHECK(once == twice);
  // and per-symbol slices agree with the nested form
  FnSig g = {func("g", 2)};
  CHECK(close_materialized(once, g, u) == close_materialized(p, g, u));
}

TEST_CASE("materialized modules survive the internal round-trip") {
  Module p = mod(
      "P = <{},{g/2, h/0},"
      "{ g(V1,V2) -> s(V1) <= s(V2) >< s(V2). h -> s(s(V1)). }>");
  Signature cs = consts({"a", "b"});
  cs.add(ctor("s", 1));
  UniversePtr u = enumerate_universe(cs, 1, 1);
  Module closed = close_materialized(p, p.exports(), u);
  // bottom occurs inside right-hand sides; pool variables in patterns
  bool has_bottom = false;
  for (const Rule& r : closed.rules())
    if (!r.rhs.is_total()) has_bottom = true;
  CHECK(has_bottom);
  SourceModule back =
      parse_module(print_module("M", closed), ParseOptions{true});
  REQUIRE(back.module.has_value());
  CHECK(*back.module == closed);
}

TEST_CASE("closure laws at fixed bounds") {
  FlattenEnv env = load_env({"paper.crwl"});
  const Module& wd = env_module(env, "WeekDays");
  UniversePtr u = enumerate_universe(wd.constructor_signature(), 0, 0);
  // disjoint signature: empty module
  CHECK(close_materialized(wd, {func("nosuch", 1)}, u) ==
        Module::null_module());
  CHECK(close_materialized(Module::null_module(), {func("next", 1)}, u) ==
        Module::null_module());
  // nested closures intersect the signatures
  Module c1 = close_materialized(wd, {func("next", 1)}, u);
  Module c12 = close_materialized(c1, wd.exports(), u);
  CHECK(c12 == c1);
}

TEST_CASE("inheritance with overriding") {
  FlattenEnv env = load_env({"paper.crwl"});
  const Module& square = env_module(env, "Square");
  const Module& poly = env_module(env, "Polygonal");
  Module sp = isa_modules(square, poly);
  CHECK(sp.exports() == FnSig{func("issquare", 1), func("side", 1),
                              func("perimeter", 1), func("surface", 1),
                              func("translate", 2)});
  // perimeter comes from Square (one rule), translate from Polygonal
  size_t perimeter_rules = 0, translate_rules = 0;
  for (const Rule& r : sp.rules()) {
    if (r.head == func("perimeter", 1)) ++perimeter_rules;
    if (r.head == func("translate", 2)) ++translate_rules;
  }
  CHECK(perimeter_rules == 1);
  CHECK(translate_rules == 2);
  // overriding deletes Polygonal's perimeter rule, the only one invoking
  // _+_ and ispoint, so the derived parameters shrink accordingly
  CHECK(sp.params() == FnSig{func("_*_", 2), func("distance", 2),
                             func("translatepoint", 2)});
}

TEST_CASE("flattening expressions") {
  FlattenEnv env = load_env({"paper.crwl"});
  UniversePtr u = enumerate_universe(
      env_module(env, "OrdNatList").constructor_signature(), 1, 1);
  CHECK(flatten_materialized(parse_expr("OrdNatList"), env, u) ==
        env_module(env, "OrdNatList"));
  CHECK_THROWS_AS(flatten_materialized(parse_expr("NoSuchModule"), env, u),
                  Error);

  // import order is irrelevant and collapses to a single import
  FlattenEnv small;
  small.define("M", mod("M = <{f/1, g/1},{h/1},{h(X) -> f(g(X)).}>"));
  small.define("N1", mod("N1 = <{},{f/1},{f(a) -> a.}>"));
  small.define("N2", mod("N2 = <{},{g/1},{g(a) -> b.}>"));
  UniversePtr su = enumerate_universe(consts({"a", "b"}), 1, 1);
  Module two_step = flatten_materialized(
      parse_expr("import(import(M, N1), N2)"), small, su);
  Module one_step = flatten_materialized(
      parse_expr("import(M, N1 + N2)"), small, su);
  CHECK(two_step == one_step);
  // and equals the paper's reduced form
  Module reduced = flatten_materialized(
      parse_expr("M + close(N1) + close(N2)"), small, su);
  CHECK(two_step == reduced);

  CHECK(flatten_materialized(parse_expr("O + O"),
                             [] {
                               FlattenEnv e;
                               e.define("O", Module::null_module());
                               return e;
                             }(),
                             su) == Module::null_module());

  // cycles are reported
  FlattenEnv cyc;
  cyc.define("A", parse_expr("B"));
  cyc.define("B", parse_expr("A"));
  CHECK_THROWS_AS(flatten_materialized(parse_expr("A"), cyc, su), Error);
}

TEST_CASE("instantiation defines renamed parameters") {
  FlattenEnv env = load_env({"paper.crwl"});
  UniversePtr u = enumerate_universe(
      env_module(env, "OrdNat").constructor_signature(), 1, 1);
  std::vector<std::string> warnings;
  Module inst = flatten_materialized(
      parse_expr("inst(OrdList, OrdNat, {isbasetype/1 -> isnat/1, "
                 "leq/2 -> geq/2})"),
      env, u, &warnings);
  CHECK(warnings.empty());
  CHECK(inst.exports().count(func("isnat", 1)));
  CHECK(inst.exports().count(func("geq", 2)));
  CHECK(inst.exports().count(func("insert", 2)));
  CHECK(inst.params().empty());

  // an instantiation whose renamed parameters miss every export warns
  std::vector<std::string> w2;
  flatten_materialized(parse_expr("inst(OrdList, OrdNat, "
                                  "{isbasetype/1 -> no1/1, leq/2 -> no2/2})"),
                       env, u, &w2);
  CHECK(w2.size() == 1);
}

TEST_CASE("semantic coherence of algebraically equal expressions") {
  FlattenEnv env = load_env({"paper.crwl"});
  const Module& onl = env_module(env, "OrdNatList");
  UniversePtr u = enumerate_universe(onl.constructor_signature(), 1, 0);
  ExprPtr e1 = parse_expr("close(OrdNatList, {isnat/1, leq/2})");
  ExprPtr e2 = parse_expr("close(close(OrdNatList, {isnat/1, leq/2}))");
  Module m1 = flatten_materialized(e1, env, u);
  Module m2 = flatten_materialized(e2, env, u);
  FnSig fs = onl.functions();
  CHECK(lfp(m1.rules(), u, fs) == lfp(m2.rules(), u, fs));
}

// ------------------------------------------------------------ law testing

namespace {

// Random small modules over a fixed constructor pool; heads drawn from the
// given name pool so tests can force disjointness.
struct ModuleGen {
  std::mt19937_64 rng;
  std::vector<SymbolRef> heads;
  std::vector<SymbolRef> ctors = {ctor("a", 0), ctor("b", 0), ctor("s", 1)};

  explicit ModuleGen(uint64_t seed, std::vector<SymbolRef> hs)
      : rng(seed), heads(std::move(hs)) {}

  size_t pick(size_t n) { return rng() % n; }

  Term cterm(int depth, const std::vector<const char*>& vars) {
    if (depth == 0 || pick(3) == 0) {
      size_t k = pick(vars.size() + 2);
      if (k < vars.size()) return Term::var(vars[k]);
      return Term::app(ctors[k - vars.size()]);  // a or b
    }
    return Term::app(ctors[2], {cterm(depth - 1, vars)});
  }

  Term body(int depth, const std::vector<const char*>& vars) {
    if (pick(4) == 0) {
      const SymbolRef& f = heads[pick(heads.size())];
      std::vector<Term> args;
      for (int i = 0; i < f.arity; ++i) args.push_back(cterm(1, vars));
      return Term::app(f, std::move(args));
    }
    return cterm(depth, vars);
  }

  Rule rule() {
    static const std::vector<const char*> pool = {"X", "Y", "Z"};
    Rule r;
    r.head = heads[pick(heads.size())];
    std::vector<const char*> avail = pool;
    for (int i = 0; i < r.head.arity; ++i) {
      // linear patterns: each variable used once
      size_t k = pick(avail.size() + 1);
      if (k < avail.size()) {
        r.patterns.push_back(Term::var(avail[k]));
        avail.erase(avail.begin() + (long)k);
      } else {
        r.patterns.push_back(Term::app(ctors[pick(2)]));
      }
    }
    std::vector<const char*> vars;
    for (const Term& p : r.patterns)
      for (VarId v : p.vars()) vars.push_back(pool[0]), (void)v;
    vars.clear();
    for (const Term& p : r.patterns)
      for (VarId v : p.vars()) vars.push_back(var_name(v).c_str());
    if (vars.empty()) vars = {"X"};
    r.rhs = body(2, vars);
    size_t nconds = pick(3);
    for (size_t i = 0; i < nconds; ++i) {
      Term a = body(1, vars);
      Term b = cterm(1, vars);
      if (a.is_total() && b.is_total())
        r.conditions.push_back(Statement::joinability(a, b));
    }
    return r;
  }

  Module module() {
    std::vector<Rule> rules;
    size_t n = 1 + pick(3);
    for (size_t i = 0; i < n; ++i) {
      Rule r = rule();
      try {
        r.validate();
        rules.push_back(std::move(r));
      } catch (const Error&) {
        // discard ill-formed draws
      }
    }
    return Module::from_rules(std::move(rules));
  }
};

std::vector<SymbolRef> pool_one() {
  return {func("f", 1), func("g", 2), func("h", 0)};
}
std::vector<SymbolRef> pool_two() {
  return {func("p", 1), func("q", 0), func("r", 2)};
}

}  // namespace

TEST_CASE("algebraic laws on random modules") {
  UniversePtr u = enumerate_universe(consts({"a", "b"}), 1, 1);
  Signature with_s = consts({"a", "b"});
  with_s.add(ctor("s", 1));
  u = enumerate_universe(with_s, 1, 1);
  ModuleGen gen(42, pool_one());
  ModuleGen gen2(43, pool_two());
  Renaming rho;  // injective on everything the pools touch
  rho.add(func("f", 1), func("f2", 1));
  rho.add(func("g", 2), func("g2", 2));
  rho.add(func("h", 0), func("h2", 0));
  FnSig s1 = {func("f", 1), func("g", 2)};
  FnSig s2 = {func("g", 2), func("h", 0)};

  for (int i = 0; i < 60; ++i) {
    Module p = gen.module();
    Module p1 = gen.module();
    Module q = gen2.module();

    // union laws
    CHECK(union_modules(p, Module::null_module()) == p);
    CHECK(union_modules(p, p) == p);
    CHECK(union_modules(p, p1) == union_modules(p1, p));
    CHECK(union_modules(union_modules(p, p1), q) ==
          union_modules(p, union_modules(p1, q)));

    // deletion laws
    CHECK(delete_signature(p, p.exports()) == Module::null_module());
    CHECK(delete_signature(p, {func("zz", 7)}) == p);
    CHECK(delete_signature(delete_signature(p, s1), s2) ==
          delete_signature(p, [&] {
            FnSig both = s1;
            both.insert(s2.begin(), s2.end());
            return both;
          }()));
    CHECK(delete_signature(union_modules(p, q), s1) ==
          union_modules(delete_signature(p, s1), delete_signature(q, s1)));

    // renaming laws
    CHECK(rename_module(p, Renaming{}) == p);
    CHECK(rename_module(Module::null_module(), rho) == Module::null_module());
    CHECK(rename_module(union_modules(p, q), rho) ==
          union_modules(rename_module(p, rho), rename_module(q, rho)));
    CHECK(rename_module(delete_signature(p, s1), rho) ==
          delete_signature(rename_module(p, rho), rename_sig(rho, s1)));

    // closure laws under materialization
    CHECK(close_materialized(p, {func("zz", 7)}, u) == Module::null_module());
    Module cu = close_materialized(p, [&] {
      FnSig both = s1;
      both.insert(s2.begin(), s2.end());
      return both;
    }(), u);
    CHECK(cu == union_modules(close_materialized(p, s1, u),
                              close_materialized(p, s2, u)));
    Module nested = close_materialized(close_materialized(p, s1, u), s2, u);
    FnSig inter;
    for (const SymbolRef& f : s1)
      if (s2.count(f)) inter.insert(f);
    CHECK(nested == close_materialized(p, inter, u));
    // disjoint-definition closure law: the pools are disjoint and neither
    // module invokes the other pool's symbols
    CHECK(close_materialized(union_modules(p, q), p.exports(), u) ==
          close_materialized(p, p.exports(), u));
    CHECK(rename_module(close_materialized(p, s1, u), rho) ==
          close_materialized(rename_module(p, rho), rename_sig(rho, s1), u));
  }
}
