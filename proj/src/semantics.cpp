#include "crwl/semantics.hpp"

#include <algorithm>
#include <sstream>

namespace crwl {

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::LM:
      return "lm";
    case Relation::T:
      return "t";
    case Relation::M:
      return "m";
    case Relation::CM:
      return "cm";
    case Relation::D:
      return "d";
  }
  return "?";
}

std::optional<Relation> relation_from_string(const std::string& s) {
  if (s == "lm") return Relation::LM;
  if (s == "t") return Relation::T;
  if (s == "m") return Relation::M;
  if (s == "cm") return Relation::CM;
  if (s == "d") return Relation::D;
  return std::nullopt;
}

Algebra observable(const std::vector<Rule>& rules, UniversePtr u,
                   const FnSig& funcs) {
  return lfp(rules, std::move(u), funcs);
}

namespace {

FnSig engine_signature(const std::vector<Rule>& p, const std::vector<Rule>& q) {
  FnSig sig = rule_functions(p);
  for (const SymbolRef& f : rule_functions(q)) sig.insert(f);
  return sig;
}

std::optional<Discrepancy> first_difference(const Algebra& a,
                                            const Algebra& b) {
  const Universe& u = *a.universe();
  FnSig keys = a.signature();
  for (const SymbolRef& f : b.signature()) keys.insert(f);
  for (const SymbolRef& f : keys) {
    size_t count = a.tuple_count(f.arity);
    for (size_t flat = 0; flat < count; ++flat) {
      Bits diff = a.cone(f, flat) ^ b.cone(f, flat);
      size_t bit = diff.find_first();
      if (bit == Bits::npos) continue;
      Discrepancy d;
      d.f = f;
      for (size_t c : a.tuple_at(flat, f.arity)) d.args.push_back(u.term(c));
      d.value = u.term(bit);
      return d;
    }
  }
  return std::nullopt;
}

std::vector<Rule> delete_rules(const std::vector<Rule>& rules,
                               const FnSig& sigma) {
  std::vector<Rule> out;
  for (const Rule& r : rules)
    if (!sigma.count(r.head)) out.push_back(r);
  return out;
}

// Verdict of one algebra under a pointwise relation; nullopt when the
// algebra agrees on both sides.
std::optional<EquivVerdict> check_algebra(Relation rel,
                                          const std::vector<Rule>& p,
                                          const std::vector<Rule>& q,
                                          const Algebra& a) {
  switch (rel) {
    case Relation::T: {
      Algebra tp = t_step(p, a);
      Algebra tq = t_step(q, a);
      if (tp == tq) return std::nullopt;
      EquivVerdict v;
      v.outcome = Outcome::Counterexample;
      v.witness_algebra = a;
      v.discrepancy = first_difference(tp, tq);
      v.note = "transformers differ";
      return v;
    }
    case Relation::M:
    case Relation::CM: {
      bool mp = is_model(p, a);
      bool mq = is_model(q, a);
      if (mp == mq) return std::nullopt;
      EquivVerdict v;
      v.outcome = Outcome::Counterexample;
      v.witness_algebra = a;
      v.note = mp ? "model of the left program only"
                  : "model of the right program only";
      return v;
    }
    default:
      throw Error("internal: pointwise check on a non-pointwise relation");
  }
}

EquivVerdict pointwise_equiv(Relation rel, const std::vector<Rule>& p,
                             const std::vector<Rule>& q, UniversePtr u,
                             const FnSig& engine, const EquivOptions& opts) {
  EquivVerdict out;
  out.relation = rel;
  bool consistent_only = rel == Relation::CM;
  if (opts.exhaustive) {
    count_algebras(engine, u,
                   consistent_only ? AlgebraEnumerator::Filter::ConsistentOnly
                                   : AlgebraEnumerator::Filter::All,
                   u->limits().max_algebras);
    AlgebraEnumerator en(engine, u,
                         consistent_only
                             ? AlgebraEnumerator::Filter::ConsistentOnly
                             : AlgebraEnumerator::Filter::All);
    Algebra a;
    while (en.next(a)) {
      ++out.examined;
      if (auto v = check_algebra(rel, p, q, a)) {
        v->relation = rel;
        v->examined = out.examined;
        return *v;
      }
    }
    out.outcome = Outcome::EquivalentAtBounds;
    return out;
  }
  std::mt19937_64 rng(opts.seed);
  for (size_t i = 0; i < opts.samples; ++i) {
    Algebra a = sample_algebra(engine, u, rng);
    if (consistent_only && !is_consistent(a)) continue;
    ++out.examined;
    if (auto v = check_algebra(rel, p, q, a)) {
      v->relation = rel;
      v->examined = out.examined;
      return *v;
    }
  }
  out.outcome = Outcome::InconclusiveSampled;
  return out;
}

}  // namespace

EquivVerdict equiv(const std::vector<Rule>& p, const std::vector<Rule>& q,
                   Relation rel, UniversePtr u, const EquivOptions& opts) {
  FnSig engine = engine_signature(p, q);
  switch (rel) {
    case Relation::LM: {
      EquivVerdict out;
      out.relation = rel;
      Algebra mp = lfp(p, u, engine);
      Algebra mq = lfp(q, u, engine);
      if (mp == mq) {
        out.outcome = Outcome::EquivalentAtBounds;
      } else {
        out.outcome = Outcome::Counterexample;
        out.discrepancy = first_difference(mp, mq);
        out.note = "least models differ";
      }
      return out;
    }
    case Relation::T:
    case Relation::M:
    case Relation::CM:
      return pointwise_equiv(rel, p, q, u, engine, opts);
    case Relation::D: {
      FnSig heads = rule_heads(p);
      for (const SymbolRef& f : rule_heads(q)) heads.insert(f);
      std::vector<SymbolRef> hv(heads.begin(), heads.end());
      size_t total = 0;
      for (size_t mask = 0; mask < ((size_t)1 << hv.size()); ++mask) {
        FnSig sigma;
        for (size_t i = 0; i < hv.size(); ++i)
          if (mask & ((size_t)1 << i)) sigma.insert(hv[i]);
        EquivVerdict v = pointwise_equiv(Relation::CM, delete_rules(p, sigma),
                                         delete_rules(q, sigma), u, engine,
                                         opts);
        total += v.examined;
        if (v.outcome == Outcome::Counterexample) {
          v.relation = Relation::D;
          v.witness_sigma = sigma;
          v.examined = total;
          return v;
        }
        if (v.outcome == Outcome::InconclusiveSampled && mask + 1 ==
                                                             ((size_t)1
                                                              << hv.size())) {
          v.relation = Relation::D;
          v.examined = total;
          return v;
        }
      }
      EquivVerdict out;
      out.relation = Relation::D;
      out.outcome = opts.exhaustive ? Outcome::EquivalentAtBounds
                                    : Outcome::InconclusiveSampled;
      out.examined = total;
      return out;
    }
  }
  throw Error("internal: unhandled relation");
}

bool revalidate(const EquivVerdict& v, const std::vector<Rule>& p,
                const std::vector<Rule>& q, UniversePtr u) {
  if (v.outcome != Outcome::Counterexample) return false;
  std::vector<Rule> dp = p;
  std::vector<Rule> dq = q;
  if (v.witness_sigma) {
    dp = delete_rules(p, *v.witness_sigma);
    dq = delete_rules(q, *v.witness_sigma);
  }
  switch (v.relation) {
    case Relation::LM: {
      FnSig engine = engine_signature(p, q);
      return !(lfp(dp, u, engine) == lfp(dq, u, engine));
    }
    case Relation::T: {
      if (!v.witness_algebra || !v.witness_algebra->well_formed()) return false;
      return !(t_step(dp, *v.witness_algebra) == t_step(dq, *v.witness_algebra));
    }
    case Relation::M: {
      if (!v.witness_algebra || !v.witness_algebra->well_formed()) return false;
      return is_model(dp, *v.witness_algebra) != is_model(dq, *v.witness_algebra);
    }
    case Relation::CM:
    case Relation::D: {
      if (!v.witness_algebra || !v.witness_algebra->well_formed()) return false;
      if (!is_consistent(*v.witness_algebra)) return false;
      return is_model(dp, *v.witness_algebra) != is_model(dq, *v.witness_algebra);
    }
  }
  return false;
}

DeletionSemantics deletion_semantics(const std::vector<Rule>& rules,
                                     UniversePtr u, const FnSig& engine,
                                     const FnSig& domain) {
  count_algebras(engine, u, AlgebraEnumerator::Filter::ConsistentOnly,
                 u->limits().max_algebras);
  DeletionSemantics out;
  for (const SymbolRef& f : domain) out.models[f] = {};
  AlgebraEnumerator en(engine, u, AlgebraEnumerator::Filter::ConsistentOnly);
  Algebra a;
  size_t idx = 0;
  while (en.next(a)) {
    for (const SymbolRef& f : domain) {
      std::vector<Rule> own;
      for (const Rule& r : rules)
        if (r.head == f) own.push_back(r);
      if (is_model(own, a)) out.models[f].push_back(idx);
    }
    ++idx;
  }
  out.consistent_count = idx;
  return out;
}

HomReport check_homomorphism(const Module& p, const Module& q,
                             const FnSig& sigma, const Renaming& rho,
                             UniversePtr u) {
  HomReport rep;
  FnSig engine = engine_signature(p.rules(), q.rules());
  for (const SymbolRef& f : sigma) engine.insert(f);
  for (const auto& [from, to] : rho.entries()) {
    engine.insert(from);
    engine.insert(to);
  }

  Module closed = close_materialized(p, sigma, u);
  Algebra closure_expected = restrict_to(lfp(p.rules(), u, engine), sigma);
  Module deleted = delete_signature(p, sigma);
  FnSig kept;
  for (const SymbolRef& f : p.exports())
    if (!sigma.count(f)) kept.insert(f);
  Algebra top_kept = Algebra::top(u, engine, kept);
  Module renamed = rename_module(p, rho);

  AlgebraEnumerator en(engine, u, AlgebraEnumerator::Filter::All);
  Algebra a;
  while (en.next(a)) {
    ++rep.algebras;
    if (rep.a.ok) {
      Algebra lhs = t_step(union_modules(p, q).rules(), a);
      Algebra rhs = join(t_step(p.rules(), a), t_step(q.rules(), a));
      if (!(lhs == rhs)) rep.a = {false, "union case failed"};
    }
    if (rep.b.ok) {
      Algebra lhs = t_step(closed.rules(), a);
      if (!(lhs == closure_expected))
        rep.b = {false, "closure transformer is not the restricted fixpoint"};
    }
    if (rep.c.ok) {
      Algebra lhs = t_step(deleted.rules(), a);
      Algebra rhs = meet(t_step(p.rules(), a), top_kept);
      if (!(lhs == rhs)) rep.c = {false, "deletion case failed"};
    }
    if (rep.d.ok) {
      Algebra lhs = t_step(renamed.rules(), a);
      Algebra rhs = apply_rho_inv(t_step(p.rules(), apply_rho(a, rho)), rho);
      if (!(lhs == rhs)) rep.d = {false, "renaming case failed"};
    }
    if (!rep.a.ok && !rep.b.ok && !rep.c.ok && !rep.d.ok) break;
  }
  return rep;
}

namespace {

void witness_rec(const Algebra& a, const Term& r, const Term& t,
                 std::vector<Rule>& out) {
  const Universe& u = *a.universe();
  if (t.is_bottom()) return;
  if (r.is_cterm()) {
    if (!approx_le(t, r))
      throw Error("witness construction: value does not approximate the term");
    return;
  }
  if (!r.is_app() || !r.symbol().is_function())
    throw Error("witness construction: unexpected term shape");
  const SymbolRef& h = r.symbol();
  if (h.arity == 0) {
    out.push_back(make_crr(h, {}, t).first);
    return;
  }
  // pick the least member tuple exhibiting t
  std::vector<Bits> argc;
  for (const Term& e : r.args()) argc.push_back(eval_term(a, e, CSubst{}));
  std::vector<size_t> pick(argc.size());
  for (size_t i = 0; i < pick.size(); ++i) pick[i] = argc[i].find_first();
  auto tidx = u.index(t);
  if (!tidx)
    throw Error("witness construction: value outside the universe");
  while (true) {
    bool hit;
    if (h.is_constructor()) {
      // t ⊑ c(picked): components recurse directly on t's arguments
      hit = t.is_app() && t.symbol() == h;
      if (hit) {
        for (size_t i = 0; i < pick.size() && hit; ++i)
          hit = approx_le(t.args()[i], u.term(pick[i]));
      }
    } else {
      hit = a.cone(h, pick).test(*tidx);
    }
    if (hit) {
      if (h.is_constructor()) {
        for (size_t i = 0; i < pick.size(); ++i)
          witness_rec(a, r.args()[i], t.args()[i], out);
      } else {
        std::vector<Term> vs;
        for (size_t i = 0; i < pick.size(); ++i) {
          vs.push_back(u.term(pick[i]));
          witness_rec(a, r.args()[i], vs.back(), out);
        }
        out.push_back(make_crr(h, vs, t).first);
      }
      return;
    }
    size_t i = pick.size();
    while (i > 0) {
      --i;
      size_t nxt = argc[i].find_next(pick[i]);
      if (nxt != Bits::npos) {
        pick[i] = nxt;
        for (size_t j = i + 1; j < pick.size(); ++j)
          pick[j] = argc[j].find_first();
        break;
      }
      if (i == 0)
        throw Error("witness construction: membership precondition fails");
    }
  }
}

}  // namespace

std::vector<Rule> build_witness_program(const Algebra& a, const Term& r,
                                        const Term& t) {
  if (!is_consistent(a))
    throw Error("witness construction requires a consistent algebra");
  Bits cone = eval_term(a, r, CSubst{});
  auto tidx = a.universe()->index(t);
  if (!tidx || !cone.test(*tidx))
    throw Error("witness construction: t is not in the evaluation of r");
  std::vector<Rule> out;
  witness_rec(a, r, t, out);
  return canonical_rules(std::move(out));
}

std::optional<SeparationContext> distinguish(const std::vector<Rule>& p,
                                             const std::vector<Rule>& q,
                                             UniversePtr u) {
  FnSig engine = engine_signature(p, q);
  AlgebraEnumerator en(engine, u, AlgebraEnumerator::Filter::ConsistentOnly);
  Algebra a;
  while (en.next(a)) {
    bool mp = is_model(p, a);
    bool mq = is_model(q, a);
    if (mp == mq) continue;
    const std::vector<Rule>& bad = mp ? q : p;   // not modeled by a
    const std::vector<Rule>& good = mp ? p : q;  // modeled by a

    Algebra stepped = t_step(bad, a);
    SeparationContext ctx;
    ctx.q_side = mp;
    bool found = false;
    for (const SymbolRef& f : stepped.signature()) {
      size_t count = stepped.tuple_count(f.arity);
      for (size_t flat = 0; flat < count && !found; ++flat) {
        Bits extra = stepped.cone(f, flat);
        extra -= a.cone(f, flat);
        size_t bit = extra.find_first();
        if (bit == Bits::npos) continue;
        found = true;
        ctx.f = f;
        for (size_t c : stepped.tuple_at(flat, f.arity))
          ctx.args.push_back(u->term(c));
        ctx.value = u->term(bit);
      }
      if (found) break;
    }
    if (!found) throw Error("internal: model gap without a cone gap");

    // locate a triggering instance of the bad program
    std::vector<size_t> tuple;
    for (const Term& arg : ctx.args) tuple.push_back(*u->index(arg));
    auto vidx = *u->index(ctx.value);
    bool built = false;
    for (const Rule& r : bad) {
      if (built || !(r.head == ctx.f)) continue;
      std::set<VarId> vs = r.vars();
      std::vector<VarId> vars(vs.begin(), vs.end());
      std::sort(vars.begin(), vars.end(), [](VarId x, VarId y) {
        return var_name(x) < var_name(y);
      });
      size_t n = u->size();
      std::vector<size_t> pickv(vars.size(), 0);
      while (!built) {
        CSubst theta;
        for (size_t i = 0; i < vars.size(); ++i)
          theta.bind(vars[i], u->term(pickv[i]));
        bool applicable = true;
        for (size_t i = 0; i < r.patterns.size() && applicable; ++i) {
          auto pi = u->index(apply_subst(r.patterns[i], theta));
          applicable = pi && u->down(tuple[i]).test(*pi);
        }
        for (size_t i = 0; i < r.conditions.size() && applicable; ++i)
          applicable = satisfies(a, r.conditions[i], theta);
        if (applicable) {
          Term rtheta = apply_subst(r.rhs, theta);
          Bits val = eval_term(a, r.rhs, theta);
          if (val.test(vidx)) {
            std::vector<Rule> rules =
                build_witness_program(a, rtheta, ctx.value);
            for (const Statement& c : r.conditions) {
              Term at = apply_subst(c.lhs, theta);
              Term bt = apply_subst(c.rhs, theta);
              Bits shared = eval_term(a, at, CSubst{});
              shared &= eval_term(a, bt, CSubst{});
              shared &= u->totals();
              size_t l = shared.find_first();
              if (l == Bits::npos)
                throw Error("internal: satisfied condition without witness");
              for (const Rule& w :
                   build_witness_program(a, at, u->term(l)))
                rules.push_back(w);
              for (const Rule& w :
                   build_witness_program(a, bt, u->term(l)))
                rules.push_back(w);
            }
            ctx.rules = canonical_rules(std::move(rules));
            built = true;
            break;
          }
        }
        size_t i = vars.size();
        bool carried = true;
        while (i > 0) {
          --i;
          if (++pickv[i] < n) {
            carried = false;
            break;
          }
          pickv[i] = 0;
        }
        if (carried) break;
      }
    }
    if (!built) throw Error("internal: no triggering instance found");

    // the context must separate the observables
    std::vector<Rule> bad_ctx = bad;
    bad_ctx.insert(bad_ctx.end(), ctx.rules.begin(), ctx.rules.end());
    std::vector<Rule> good_ctx = good;
    good_ctx.insert(good_ctx.end(), ctx.rules.begin(), ctx.rules.end());
    Algebra ob_bad = lfp(bad_ctx, u, engine);
    Algebra ob_good = lfp(good_ctx, u, engine);
    Algebra probe(u);
    size_t flat = 0;
    {
      std::vector<size_t> tup;
      for (const Term& arg : ctx.args) tup.push_back(*u->index(arg));
      flat = probe.tuple_index(tup);
    }
    if (!ob_bad.cone(ctx.f, flat).test(vidx) ||
        ob_good.cone(ctx.f, flat).test(vidx))
      throw Error("internal: context failed to separate the observables");
    return ctx;
  }
  return std::nullopt;
}

}  // namespace crwl
