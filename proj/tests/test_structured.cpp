#include "doctest.h"

#include "crwl/gpc.hpp"
#include "crwl/parser.hpp"
#include "crwl/structured.hpp"
#include "helpers.hpp"

using namespace crwl;

namespace {

Signature consts(std::initializer_list<const char*> names) {
  Signature s;
  for (const char* n : names) s.add(ctor(n, 0));
  return s;
}

size_t count_heads(const std::vector<Rule>& rules, const SymbolRef& f) {
  size_t n = 0;
  for (const Rule& r : rules)
    if (r.head == f) ++n;
  return n;
}

}  // namespace

TEST_CASE("embedding a plain module") {
  FlattenEnv env = load_env({"paper.crwl"});
  StructuredModule sm = iota(parse_expr("OrdNatList"), env);
  CHECK(sm.is_plain());
  CHECK(sm.rules_v.size() == 9);
  CHECK(sm.provenance == "OrdNatList");
  CHECK(sm.to_plain() == env_module(env, "OrdNatList"));
  CHECK_NOTHROW(sm.check_invariants());
}

TEST_CASE("the ordered-list representation of the paper") {
  FlattenEnv env = load_env({"paper.crwl"});
  StructuredModule sm = iota(
      parse_expr("OrdList + {isnat/1 -> isbasetype/1}(close(OrdNat))"), env);
  CHECK(sm.rules_v.size() == 3);   // the insert rules
  CHECK(sm.rules_b.size() == 3);   // isbasetype, leq, geq bridges
  CHECK(sm.rules_h.size() == 7);   // the OrdNat body behind the label
  CHECK(sm.params.empty());
  CHECK(sm.exports == FnSig{func("isbasetype", 1), func("leq", 2),
                            func("geq", 2), func("insert", 2)});
  for (const Rule& r : sm.rules_h) {
    CHECK(r.head.labeled());
    CHECK(r.head.label == "OrdNat");
  }
  // the bridge carries the renamed visible name to the original hidden one
  bool isbasetype_bridge = false;
  for (const Rule& r : sm.rules_b)
    if (r.head == func("isbasetype", 1) &&
        r.rhs.symbol() == func("isnat", 1, "OrdNat"))
      isbasetype_bridge = true;
  CHECK(isbasetype_bridge);
  CHECK_NOTHROW(sm.check_invariants());

  std::string dump = print_structured(sm);
  CHECK(dump.find("-- visible") != std::string::npos);
  CHECK(dump.find("-- bridge") != std::string::npos);
  CHECK(dump.find("-- hidden") != std::string::npos);
  CHECK(dump.find("OrdNat.isnat") != std::string::npos);
}

TEST_CASE("iota commutes with deletion") {
  FlattenEnv env = load_env({"paper.crwl"});
  FnSig sigma = {func("isnat", 1)};
  StructuredModule lhs = iota(parse_expr("OrdNatList \\ {isnat/1}"), env);
  StructuredModule rhs =
      delete_structured(iota(parse_expr("OrdNatList"), env), sigma);
  CHECK(lhs.rules_v.size() == rhs.rules_v.size());
  CHECK(lhs.exports == rhs.exports);
  CHECK(lhs.params == rhs.params);
}

TEST_CASE("structured closure of the week-days module") {
  FlattenEnv env = load_env({"paper.crwl"});
  StructuredModule sm = iota(parse_expr("close(WeekDays)"), env);
  CHECK(sm.rules_v.empty());
  CHECK(sm.rules_b.size() == 2);
  CHECK(sm.rules_h.size() == 8);
  CHECK(sm.params.empty());
  CHECK(count_heads(sm.rules_b, func("next", 1)) == 1);
  CHECK(count_heads(sm.rules_b, func("before", 1)) == 1);
  for (const Rule& r : sm.rules_h) CHECK(r.head.label == "WeekDays");

  // closing a module with empty exports leaves only a hidden body
  FlattenEnv tiny;
  tiny.define("O", Module::null_module());
  StructuredModule closed_null = iota(parse_expr("close(O)"), tiny);
  CHECK(closed_null.rules_b.empty());
  CHECK(closed_null.exports.empty());

  // nested closures use distinct labels
  StructuredModule twice = iota(parse_expr("close(close(WeekDays))"), env);
  bool outer = false, inner = false;
  for (const Rule& r : twice.rules_h) {
    if (r.head.label == "WeekDays") inner = true;
    if (r.head.label == "close(WeekDays)") outer = true;
  }
  CHECK(inner);
  CHECK(outer);
}

TEST_CASE("partial closure drops the other bridges") {
  FlattenEnv env = load_env({"paper.crwl"});
  StructuredModule sm =
      iota(parse_expr("close(WeekDays, {next/1})"), env);
  CHECK(sm.rules_b.size() == 1);
  CHECK(sm.exports == FnSig{func("next", 1)});
  CHECK(sm.rules_h.size() == 8);
}

TEST_CASE("constructor hiding on the search-tree fixture") {
  FlattenEnv env = load_env({"hiding.crwl"});
  StructuredModule sm = iota(parse_expr("SortedBST"), env);
  CHECK(sm.rules_v.empty());
  CHECK(sm.rules_b.size() == 6);  // isnat, _<_, _++_, empty, insert, inorder
  CHECK(sm.hidden_ctors.size() == 2);
  const std::string label = "LNat + BST";
  CHECK(sm.hidden_ctors.count(ctor("nil", 0, label)) == 1);
  CHECK(sm.hidden_ctors.count(ctor("mktree", 3, label)) == 1);
  // hidden tree constructors occur only in the hidden part
  for (const Rule& r : sm.rules_b) {
    for (const Term& p : r.patterns) CHECK_FALSE(p.has_labeled_symbol());
    CHECK(r.rhs.symbol().is_function());
  }
  bool tree_ctor_hidden = false;
  for (const Rule& r : sm.rules_h)
    for (const SymbolRef& s : {r.rhs.is_app() ? r.rhs.symbol() : r.head})
      if (s.is_constructor() && s.labeled()) tree_ctor_hidden = true;
  for (const Rule& r : sm.rules_h)
    if (r.rhs.has_labeled_symbol()) tree_ctor_hidden = true;
  CHECK(tree_ctor_hidden);
  CHECK_NOTHROW(sm.check_invariants());

  // hiding nothing is the plain structured closure
  StructuredModule s1 = iota(parse_expr("closeH(LNat + BST, {})"), env);
  StructuredModule s2 = iota(parse_expr("close(LNat + BST)"), env);
  CHECK(s1.rules_b.size() == s2.rules_b.size());
  CHECK(s1.rules_h.size() == s2.rules_h.size());
  CHECK(s1.hidden_ctors.empty());

  CHECK_THROWS_AS(iota(parse_expr("closeH(LNat, {isnat/0})"), env), Error);
}

TEST_CASE("u_step on a plain module degenerates to t_step") {
  FlattenEnv env = load_env({"counterexamples.crwl"});
  const Module& dc2 = env_module(env, "DC2");
  StructuredModule sm = StructuredModule::embed(dc2, "DC2");
  UniversePtr u = enumerate_universe(consts({"a", "b"}), 0, 0);
  AlgebraEnumerator en(dc2.functions(), u, AlgebraEnumerator::Filter::All);
  Algebra a;
  while (en.next(a)) CHECK(u_step(sm, a) == t_step(dc2.rules(), a));
}

TEST_CASE("closure behaves as a constant transformer through the bridges") {
  FlattenEnv env = load_env({"paper.crwl"});
  const Module& wd = env_module(env, "WeekDays");
  StructuredModule closed = iota(parse_expr("close(WeekDays)"), env);
  UniversePtr u = enumerate_universe(wd.constructor_signature(), 0, 0);
  FnSig fs = wd.functions();

  Algebra expected = lfp(wd.rules(), u, fs);
  std::mt19937_64 rng(3);
  std::vector<Algebra> family = {Algebra::bottom(u, fs),
                                 Algebra::top(u, fs, fs)};
  for (int i = 0; i < 5; ++i) family.push_back(sample_algebra(fs, u, rng));
  for (const Algebra& a : family) {
    Algebra stepped = u_step(closed, a);
    CHECK(stepped == expected);
    std::vector<size_t> tu = {*u->index(Term::app(ctor("tu", 0)))};
    CHECK(u->cone_to_string(stepped.cone(func("before", 1), tu)) ==
          "{_|_,mo}");
  }
  // the u-model coincides with the plain model
  CHECK(u_model(closed, u) == expected);
  CHECK(u_model(StructuredModule::embed(wd, "WeekDays"), u) == expected);
}

TEST_CASE("representation theorem on reduced instances") {
  // plain, union, deletion, renaming, closure over an enumerable instance
  FlattenEnv env;
  env.define("U1", *parse_module("U1 = <{},{f/0},{f -> a.}>").module);
  env.define("U2",
             *parse_module("U2 = <{f/0},{g/0},{g -> b <= f >< a.}>").module);
  env.define("WD2", *parse_module("WD2 = <{},{next/1, before/1},"
                                  "{ next(mo) -> tu. next(tu) -> mo."
                                  "  before(X) -> Y <= next(Y) >< X. }>")
                         .module);

  auto check_expr = [&](const char* text, UniversePtr u, const FnSig& fs) {
    ExprPtr e = parse_expr(text);
    StructuredModule sm = iota(e, env);
    Module flat = flatten_materialized(e, env, u);
    AlgebraEnumerator en(fs, u, AlgebraEnumerator::Filter::All);
    Algebra a;
    size_t n = 0;
    while (en.next(a)) {
      REQUIRE(u_step(sm, a) == t_step(flat.rules(), a));
      ++n;
    }
    CHECK(n > 0);
  };

  UniversePtr uab = enumerate_universe(consts({"a", "b"}), 0, 0);
  FnSig fg = {func("f", 0), func("g", 0)};
  check_expr("U1", uab, fg);
  check_expr("U1 + U2", uab, fg);
  check_expr("(U1 + U2) \\ {f/0}", uab, fg);
  FnSig fgh = {func("f", 0), func("g", 0), func("h", 0)};
  check_expr("{f/0 -> h/0}(U1 + U2)", uab, fgh);

  UniversePtr uwd = enumerate_universe(consts({"mo", "tu"}), 0, 0);
  FnSig wd2 = {func("next", 1), func("before", 1)};
  check_expr("close(WD2)", uwd, wd2);
}

TEST_CASE("bridge soundness at bounded scale") {
  // statements about visible label-free terms agree between the structured
  // rule set and the materialized flat module
  FlattenEnv env = load_env({"paper.crwl"});
  const Module& wd = env_module(env, "WeekDays");
  UniversePtr u = enumerate_universe(wd.constructor_signature(), 0, 0);
  ExprPtr e = parse_expr("close(WeekDays)");
  StructuredModule sm = iota(e, env);
  Module flat = flatten_materialized(e, env, u);

  Prover structured_prover(sm.full_rules(), {24, u});
  Prover flat_prover(flat.rules(), {24, u});
  for (const SymbolRef& f : sm.exports) {
    for (size_t i = 0; i < u->size(); ++i) {
      Term goal = Term::app(f, {u->term(i)});
      auto rs = structured_prover.reducts(goal);
      auto rf = flat_prover.reducts(goal);
      // visible, label-free reducts agree
      std::vector<Term> vs, vf;
      for (const auto& [t, d] : rs)
        if (!t.has_labeled_symbol()) vs.push_back(t);
      for (const auto& [t, d] : rf) vf.push_back(t);
      CHECK(vs == vf);
    }
  }
}

TEST_CASE("u-operator with hidden constructors") {
  // values built from the hidden constructor flow inside the hidden part
  // and surface only when a hidden rule unwraps them
  FlattenEnv env;
  env.define("Boxes",
             *parse_module("Boxes = <{},{mk/1, peek/1, open/1},"
                           "{ mk(X) -> box(X)."
                           "  peek(X) -> open(box(X))."
                           "  open(box(X)) -> X. }>")
                  .module);
  env.define("User", *parse_module("User = <{peek/1},{wrap/1},"
                                   "{ wrap(X) -> s(peek(X)). }>")
                          .module);
  // `open` leaks the payload; hide it along with the constructor
  StructuredModule sm =
      iota(parse_expr("closeH(Boxes, {box/1}) \\ {open/1} + User"), env);
  CHECK(sm.hidden_ctors.size() == 1);

  Signature cs;
  cs.add(ctor("a", 0));
  cs.add(ctor("s", 1));
  UniversePtr u = enumerate_universe(cs, 1, 0);
  Algebra model = u_model(sm, u);

  auto cone_str = [&](const char* f, const Term& arg) {
    std::vector<size_t> tuple = {*u->index(arg)};
    return u->cone_to_string(model.cone(func(f, 1), tuple));
  };
  Term a = Term::app(ctor("a", 0));
  // mk's value is a hidden term: the visible cone keeps only bottom
  CHECK(cone_str("mk", a) == "{_|_}");
  // peek unboxes inside the hidden part, so the payload is visible
  CHECK(cone_str("peek", a) == "{_|_,a}");
  // and visible composition propagates it
  CHECK(cone_str("wrap", a) == "{_|_,s(_|_),s(a)}");
  // no labeled term ever reaches a visible cone
  for (const auto& [f, table] : model.tables())
    for (const Bits& c : table.cones)
      for (const Term& t : u->cone_terms(c)) CHECK_FALSE(t.has_labeled_symbol());
}

TEST_CASE("structured interface errors") {
  FlattenEnv env = load_env({"paper.crwl"});
  StructuredModule sm = iota(parse_expr("close(WeekDays)"), env);
  FnSig labeled = {func("next", 1, "WeekDays")};
  CHECK_THROWS_AS(delete_structured(sm, labeled), Error);
  Renaming bad;
  bad.add(func("next", 1), func("next2", 1, "WeekDays"));
  CHECK_THROWS_AS(rename_structured(sm, bad), Error);
}
