#include "doctest.h"

#include <algorithm>

#include "crwl/algebra.hpp"
#include "crwl/parser.hpp"
#include "helpers.hpp"

using namespace crwl;

namespace {

Term tv(const char* n) { return Term::var(n); }
Term ta(const char* n) { return Term::app(ctor(n, 0)); }

Signature consts(std::initializer_list<const char*> names) {
  Signature s;
  for (const char* n : names) s.add(ctor(n, 0));
  return s;
}

std::vector<Rule> rules_of(const char* src) {
  SourceModule sm = parse_module(src);
  return sm.module->rules();
}

}  // namespace

TEST_CASE("universe enumeration") {
  UniversePtr u0 = enumerate_universe(consts({"a", "b"}), 0, 1);
  CHECK(u0->size() == 4);  // _|_, X1, a, b
  CHECK(u0->term(0) == Term::bottom());
  CHECK(u0->contains(tv("X1")));
  CHECK_FALSE(u0->contains(tv("Y")));

  Signature s1 = consts({"a", "b"});
  s1.add(ctor("s", 1));
  UniversePtr u1 = enumerate_universe(s1, 1, 1);
  CHECK(u1->size() == 8);
  // supersets under growing bounds
  for (size_t i = 0; i < u0->size(); ++i)
    CHECK(u1->index(u0->term(i)).has_value());
  UniversePtr u2 = enumerate_universe(s1, 2, 1);
  for (size_t i = 0; i < u1->size(); ++i)
    CHECK(u2->index(u1->term(i)).has_value());

  UniversePtr empty = enumerate_universe(Signature{}, 2, 0);
  CHECK(empty->size() == 1);

  Limits tight;
  tight.max_universe_terms = 3;
  CHECK_THROWS_AS(enumerate_universe(s1, 2, 1, tight), CapError);
}

TEST_CASE("term order linearly extends the approximation order") {
  // cone enumeration and monotone table pruning rely on this
  Signature s = consts({"a", "b"});
  s.add(ctor("s", 1));
  s.add(ctor("c", 2));
  UniversePtr u = enumerate_universe(s, 2, 2);
  for (size_t i = 0; i < u->size(); ++i)
    for (size_t j = u->down(i).find_first(); j != Bits::npos;
         j = u->down(i).find_next(j))
      CHECK(j <= i);
}

TEST_CASE("ideals") {
  Signature s = consts({"a"});
  s.add(ctor("c", 1));
  UniversePtr u = enumerate_universe(s, 1, 1);
  CHECK(u->cone_to_string(u->ideal_of(Term::bottom())) == "{_|_}");
  Term calif = Term::app(ctor("c", 1), {ta("a")});
  CHECK(u->cone_to_string(u->ideal_of(calif)) == "{_|_,c(_|_),c(a)}");
  CHECK(u->cone_to_string(u->ideal_of(tv("X1"))) == "{_|_,X1}");
  CHECK_THROWS_AS(u->ideal_of(tv("Zed")), Error);
}

TEST_CASE("term evaluation") {
  Signature s = consts({"a", "c"});
  UniversePtr u = enumerate_universe(s, 1, 1);
  FnSig fs = {func("f", 1)};
  Algebra bot = Algebra::bottom(u, fs);

  // constructor application evaluates to the ideal of the built term
  Signature s2 = consts({"a"});
  s2.add(ctor("c", 1));
  UniversePtr u2 = enumerate_universe(s2, 1, 1);
  Algebra a2 = Algebra::bottom(u2, fs);
  CSubst th;
  th.bind("X", ta("a"));
  Bits got = eval_term(a2, Term::app(ctor("c", 1), {tv("X")}), th);
  CHECK(got == u2->ideal_of(Term::app(ctor("c", 1), {ta("a")})));

  // function tables are read through argument cones
  Algebra fa = Algebra::bottom(u, fs);
  size_t ia = *u->index(ta("a"));
  Bits val = u->bottom_cone();
  val.set(*u->index(ta("c")));
  fa.or_into(func("f", 1), ia, val);
  // monotone repair upward
  for (size_t j = u->up(ia).find_first(); j != Bits::npos;
       j = u->up(ia).find_next(j))
    fa.or_into(func("f", 1), j, val);
  Bits fx = eval_term(fa, Term::app(func("f", 1), {tv("X")}), th);
  CHECK(u->cone_to_string(fx) == "{_|_,c}");

  // bottom algebra sends every function application to bottom
  Bits fb = eval_term(bot, Term::app(func("f", 1), {ta("a")}), CSubst{});
  CHECK(u->cone_to_string(fb) == "{_|_}");

  // evaluation of a cterm equals the ideal of its instance
  Bits ev = eval_term(bot, Term::app(ctor("c", 0), {}), CSubst{});
  CHECK(ev == u->ideal_of(ta("c")));
  CHECK_THROWS_AS(eval_term(bot, tv("Unbound"), CSubst{}), Error);
}

TEST_CASE("satisfaction") {
  UniversePtr u = enumerate_universe(consts({"c"}), 0, 0);
  FnSig fs = {func("f", 0)};
  Algebra a = Algebra::bottom(u, fs);

  // e -> _|_ always holds
  CHECK(satisfies(a, Statement::reduction(Term::app(func("f", 0)),
                                          Term::bottom()),
                  CSubst{}));
  // f |-> {c,_|_} makes f >< c hold
  Bits val = u->bottom_cone();
  val.set(*u->index(ta("c")));
  a.or_into(func("f", 0), 0, val);
  CHECK(satisfies(a, Statement::joinability(Term::app(func("f", 0)), ta("c")),
                  CSubst{}));
  // bottom is not a maximal witness
  Algebra b = Algebra::bottom(u, fs);
  CHECK_FALSE(satisfies(
      b, Statement::joinability(Term::app(func("f", 0)), Term::app(func("f", 0))),
      CSubst{}));
}

TEST_CASE("transformer separates the T-semantics example") {
  std::vector<Rule> p = rules_of("P = <{},{f/0},{f -> c. f -> d.}>");
  std::vector<Rule> q = rules_of("Q = <{},{f/0},{f -> c. f -> d <= f >< c.}>");
  UniversePtr u = enumerate_universe(consts({"c", "d"}), 0, 0);
  Algebra bot = Algebra::bottom(u, {func("f", 0)});
  Algebra tp = t_step(p, bot);
  Algebra tq = t_step(q, bot);
  CHECK(u->cone_to_string(tp.cone(func("f", 0), (size_t)0)) == "{_|_,c,d}");
  CHECK(u->cone_to_string(tq.cone(func("f", 0), (size_t)0)) == "{_|_,c}");
  CHECK(t_step({}, tp) == Algebra::bottom(u, tp.signature()));
}

TEST_CASE("transformer output is well formed and monotone in the algebra") {
  std::vector<Rule> p = rules_of(
      "P = <{},{f/1, g/0},{f(s(X)) -> f(X). f(a) -> b. g -> f(s(a)).}>");
  Signature s = consts({"a", "b"});
  s.add(ctor("s", 1));
  UniversePtr u = enumerate_universe(s, 1, 1);
  FnSig fs = rule_functions(p);
  AlgebraEnumerator en(fs, u, AlgebraEnumerator::Filter::All);
  // exhaustive monotonicity would square the stream; pace it
  std::vector<Algebra> some;
  Algebra a;
  size_t k = 0;
  while (en.next(a) && some.size() < 40) {
    if (k++ % 97 == 0) some.push_back(a);
  }
  for (const Algebra& x : some) {
    Algebra tx = t_step(p, x);
    CHECK(tx.well_formed());
    for (const Algebra& y : some)
      if (x.le(y)) CHECK(t_step(p, x).le(t_step(p, y)));
  }
}

TEST_CASE("transformer monotone over all algebra pairs of a tiny instance") {
  std::vector<Rule> q = rules_of(
      "Q = <{},{f/0, g/0},{f -> a. g -> b <= f >< a.}>");
  UniversePtr u = enumerate_universe(consts({"a", "b"}), 0, 0);
  FnSig fs = {func("f", 0), func("g", 0)};
  std::vector<Algebra> all;
  AlgebraEnumerator en(fs, u, AlgebraEnumerator::Filter::All);
  Algebra a;
  while (en.next(a)) all.push_back(a);
  REQUIRE(all.size() == 16);
  std::vector<Algebra> stepped;
  for (const Algebra& x : all) stepped.push_back(t_step(q, x));
  for (size_t i = 0; i < all.size(); ++i)
    for (size_t j = 0; j < all.size(); ++j)
      if (all[i].le(all[j])) CHECK(stepped[i].le(stepped[j]));
}

TEST_CASE("the fixpoint is the least pre-fixpoint") {
  std::vector<Rule> q = rules_of(
      "Q = <{},{f/0, g/0},{f -> a. g -> b <= f >< a.}>");
  UniversePtr u = enumerate_universe(consts({"a", "b"}), 0, 0);
  FnSig fs = {func("f", 0), func("g", 0)};
  Algebra least = lfp(q, u, fs);
  AlgebraEnumerator en(fs, u, AlgebraEnumerator::Filter::All);
  Algebra a;
  size_t models = 0;
  while (en.next(a))
    if (is_model(q, a)) {
      CHECK(least.le(a));
      ++models;
    }
  CHECK(models > 0);
}

TEST_CASE("least fixpoint of the week-days module") {
  FlattenEnv env = load_env({"paper.crwl"});
  const Module& wd = env_module(env, "WeekDays");
  UniversePtr u = enumerate_universe(wd.constructor_signature(), 0, 0);
  Algebra model = lfp(wd.rules(), u, wd.functions());

  auto cone_str = [&](const char* f, const char* day) {
    std::vector<size_t> tuple = {*u->index(ta(day))};
    return u->cone_to_string(model.cone(func(f, 1), tuple));
  };
  CHECK(cone_str("next", "mo") == "{_|_,tu}");
  CHECK(cone_str("before", "tu") == "{_|_,mo}");
  CHECK(cone_str("before", "mo") == "{_|_,su}");
  CHECK(cone_str("before", "we") == "{_|_,tu}");
  // the model is a pre-fixpoint and consistent
  CHECK(is_model(wd.rules(), model));
  CHECK(is_consistent(model));
}

TEST_CASE("least models of the union counterexample") {
  FlattenEnv env = load_env({"counterexamples.crwl"});
  std::vector<Rule> p1 = env_module(env, "NC1").rules();
  std::vector<Rule> p2 = env_module(env, "NC2").rules();
  std::vector<Rule> q = env_module(env, "NCQ").rules();
  UniversePtr u = enumerate_universe(consts({"a", "b", "c"}), 1, 0);
  FnSig fs = {func("p", 1), func("r", 1)};

  CHECK(lfp(p1, u, fs) == lfp(p2, u, fs));

  std::vector<Rule> p1q = p1;
  p1q.insert(p1q.end(), q.begin(), q.end());
  std::vector<Rule> p2q = p2;
  p2q.insert(p2q.end(), q.begin(), q.end());
  Algebra m1 = lfp(p1q, u, fs);
  Algebra m2 = lfp(p2q, u, fs);
  CHECK_FALSE(m1 == m2);
  std::vector<size_t> tb = {*u->index(ta("b"))};
  CHECK(u->cone_to_string(m1.cone(func("r", 1), tb)) == "{_|_}");
  CHECK(u->cone_to_string(m2.cone(func("r", 1), tb)) == "{_|_,c}");
}

TEST_CASE("lattice operations") {
  UniversePtr u = enumerate_universe(consts({"a", "b"}), 0, 0);
  FnSig fs = {func("f", 0), func("g", 0)};
  Algebra bot = Algebra::bottom(u, fs);
  Algebra top = Algebra::top(u, fs, fs);
  Algebra mid = Algebra::bottom(u, fs);
  Bits va = u->bottom_cone();
  va.set(*u->index(ta("a")));
  mid.set_cone(func("f", 0), 0, va);

  CHECK(join(bot, mid) == mid);
  CHECK(meet(top, mid) == mid);
  CHECK(restrict_to(mid, FnSig{}) == bot);
  CHECK(restrict_to(mid, fs) == mid);
  CHECK(bot.le(mid));
  CHECK(mid.le(top));

  // top over a subsignature
  Algebra tf = Algebra::top(u, fs, {func("f", 0)});
  CHECK(u->cone_to_string(tf.cone(func("g", 0), (size_t)0)) == "{_|_}");
  CHECK(tf.cone(func("f", 0), (size_t)0).count() == u->size());

  // renaming transformers
  Renaming rho;
  rho.add(func("f", 0), func("g", 0));
  Algebra viag = apply_rho(mid, rho);  // f reads g's table
  CHECK(u->cone_to_string(viag.cone(func("f", 0), (size_t)0)) == "{_|_}");
  Algebra back = apply_rho_inv(mid, rho);  // g collects f's table
  CHECK(u->cone_to_string(back.cone(func("g", 0), (size_t)0)) == "{_|_,a}");
  CHECK(u->cone_to_string(back.cone(func("f", 0), (size_t)0)) == "{_|_}");

  // adjunction: rho_inv(A) <= B  iff  A <= rho(B)
  AlgebraEnumerator en(fs, u, AlgebraEnumerator::Filter::All);
  std::vector<Algebra> all;
  Algebra x;
  while (en.next(x)) all.push_back(x);
  CHECK(all.size() == 16);
  for (const Algebra& a : all)
    for (const Algebra& b : all)
      CHECK(apply_rho_inv(a, rho).le(b) == a.le(apply_rho(b, rho)));
}

TEST_CASE("model characterization agrees with direct satisfaction") {
  std::vector<Rule> q = rules_of(
      "Q = <{},{f/0, g/0},{f -> a. g -> b <= f >< a.}>");
  UniversePtr u = enumerate_universe(consts({"a", "b"}), 0, 0);
  FnSig fs = {func("f", 0), func("g", 0)};
  AlgebraEnumerator en(fs, u, AlgebraEnumerator::Filter::All);
  Algebra a;
  size_t models = 0;
  while (en.next(a)) {
    bool via_step = is_model(q, a);
    CHECK(via_step == is_model_direct(q, a));
    if (via_step) ++models;
  }
  CHECK(models > 0);
  // top is always a model; the fixpoint is a model
  CHECK(is_model(q, Algebra::top(u, fs, fs)));
  CHECK(is_model(q, lfp(q, u, fs)));
  // bottom is a model of the conditional variant only
  std::vector<Rule> plain = rules_of("P = <{},{g/0},{g -> b.}>");
  std::vector<Rule> cond = rules_of("P = <{f/0},{g/0},{g -> b <= f >< a.}>");
  CHECK_FALSE(is_model(plain, Algebra::bottom(u, fs)));
  CHECK(is_model(cond, Algebra::bottom(u, fs)));
}

TEST_CASE("consistency") {
  Signature s = consts({"a"});
  UniversePtr u = enumerate_universe(s, 0, 1);  // {_|_, X1, a}
  FnSig fs = {func("g", 1)};
  CHECK(is_consistent(Algebra::bottom(u, fs)));

  // the non-full-abstraction witness: g(X)={a,_|_}, g(a)={_|_}
  Algebra w = Algebra::bottom(u, fs);
  Bits va = u->bottom_cone();
  va.set(*u->index(ta("a")));
  w.set_cone(func("g", 1), *u->index(tv("X1")), va);
  CHECK(w.well_formed());
  CHECK_FALSE(is_consistent(w));

  // least fixpoints are consistent
  std::vector<Rule> p = rules_of("P = <{},{g/1},{g(X) -> a. g(a) -> a.}>");
  CHECK(is_consistent(lfp(p, u, fs)));
}

TEST_CASE("enumeration of cones and algebras") {
  UniversePtr two = enumerate_universe(consts({"a"}), 0, 0);
  CHECK(enumerate_cones(*two).size() == 2);
  UniversePtr three = enumerate_universe(consts({"a", "b"}), 0, 0);
  CHECK(enumerate_cones(*three).size() == 4);

  AlgebraEnumerator e1({func("f", 0)}, two, AlgebraEnumerator::Filter::All);
  Algebra a;
  size_t n = 0;
  while (e1.next(a)) ++n;
  CHECK(n == 2);

  CHECK(count_algebras({func("f", 0)}, three, AlgebraEnumerator::Filter::All,
                       1e9) == 4);
  CHECK(count_algebras({func("f", 0), func("g", 0)}, three,
                       AlgebraEnumerator::Filter::All, 1e9) == 16);
  CHECK_THROWS_AS(count_algebras({func("f", 0), func("g", 0)}, three,
                                 AlgebraEnumerator::Filter::All, 10.0),
                  CapError);

  // every streamed algebra is well formed and distinct
  AlgebraEnumerator e2({func("f", 0), func("g", 0)}, three,
                       AlgebraEnumerator::Filter::All);
  std::vector<Algebra> seen;
  while (e2.next(a)) {
    CHECK(a.well_formed());
    for (const Algebra& prev : seen) CHECK(Algebra::compare(prev, a) != 0);
    seen.push_back(a);
  }
  CHECK(seen.size() == 16);
}

TEST_CASE("sampling repairs to monotone cones") {
  Signature s = consts({"a", "b"});
  s.add(ctor("s", 1));
  UniversePtr u = enumerate_universe(s, 1, 1);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i)
    CHECK(sample_algebra({func("f", 1), func("g", 0)}, u, rng).well_formed());
}

TEST_CASE("rule instances") {
  UniversePtr u = enumerate_universe(consts({"a", "b"}), 0, 1);
  std::vector<Rule> fx = rules_of("P = <{},{f/1},{f(X) -> X.}>");
  std::vector<Rule> inst = rule_instances(fx[0], *u);
  CHECK(inst.size() == 4);  // one per universe term

  std::vector<Rule> ground = rules_of("P = <{},{f/0},{f -> a.}>");
  CHECK(rule_instances(ground[0], *u).size() == 1);

  std::vector<Rule> two = rules_of("P = <{},{f/2},{f(X,Y) -> X.}>");
  CHECK(rule_instances(two[0], *u).size() == 16);

  Limits tight;
  tight.max_instances = 3;
  UniversePtr cap = enumerate_universe(consts({"a", "b"}), 0, 1, tight);
  CHECK_THROWS_AS(rule_instances(fx[0], *cap), CapError);
}

TEST_CASE("universe monotonicity of the fixpoint") {
  FlattenEnv env = load_env({"paper.crwl"});
  const Module& onl = env_module(env, "OrdNatList");
  Signature cs = onl.constructor_signature();
  UniversePtr small = enumerate_universe(cs, 1, 0);
  UniversePtr large = enumerate_universe(cs, 1, 1);
  Algebra ms = lfp(onl.rules(), small, onl.functions());
  Algebra ml = lfp(onl.rules(), large, onl.functions());
  // enlarging the pool never removes members from any cone
  for (const auto& [f, table] : ms.tables()) {
    for (size_t flat = 0; flat < table.cones.size(); ++flat) {
      std::vector<size_t> tuple = ms.tuple_at(flat, table.arity);
      std::vector<size_t> mapped;
      for (size_t c : tuple) mapped.push_back(*large->index(small->term(c)));
      const Bits& big = ml.cone(f, mapped);
      for (size_t b = table.cones[flat].find_first(); b != Bits::npos;
           b = table.cones[flat].find_next(b))
        CHECK(big.test(*large->index(small->term(b))));
    }
  }
}

TEST_CASE("eval and substitution cohere on consistent algebras") {
  Signature s = consts({"a"});
  s.add(ctor("s", 1));
  UniversePtr u = enumerate_universe(s, 1, 1);
  FnSig fs = {func("f", 1), func("g", 0)};
  std::mt19937_64 rng(11);
  size_t tried = 0;
  while (tried < 10) {
    Algebra a = sample_algebra(fs, u, rng);
    if (!is_consistent(a)) continue;
    ++tried;
    CSubst th;
    th.bind("X1", ta("a"));
    for (const Term& e :
         {Term::app(func("f", 1), {tv("X1")}),
          Term::app(ctor("s", 1), {Term::app(func("g", 0))}),
          Term::app(func("f", 1), {Term::app(ctor("s", 1), {tv("X1")})})}) {
      Bits lhs = eval_term(a, apply_subst(e, th), CSubst{});
      Bits rhs(u->size());
      Bits base = eval_term(a, e, CSubst{});
      for (size_t b = base.find_first(); b != Bits::npos; b = base.find_next(b)) {
        auto img = u->index(apply_subst(u->term(b), th));
        if (img) rhs.set(*img);
      }
      CHECK(rhs.is_subset_of(lhs));
    }
  }
}
