#include "crwl/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace crwl {

// ----------------------------------------------------------------- tables

static size_t checked_pow(size_t base, int exp, size_t cap, const char* what) {
  size_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && out > cap / base)
      throw CapError(std::string(what), "> " + std::to_string(cap));
    out *= base;
  }
  return out;
}

size_t Algebra::tuple_count(int arity) const {
  return checked_pow(universe_->size(), arity, (size_t)1 << 40,
                     "table size exceeds cap");
}

size_t Algebra::tuple_index(const std::vector<size_t>& tuple) const {
  size_t n = universe_->size();
  size_t flat = 0;
  for (size_t c : tuple) flat = flat * n + c;
  return flat;
}

std::vector<size_t> Algebra::tuple_at(size_t flat, int arity) const {
  size_t n = universe_->size();
  std::vector<size_t> tuple((size_t)arity, 0);
  for (int i = arity - 1; i >= 0; --i) {
    tuple[(size_t)i] = flat % n;
    flat /= n;
  }
  return tuple;
}

const Bits& Algebra::bottom_ref() const {
  static thread_local std::map<size_t, Bits> cache;
  size_t n = universe_->size();
  auto it = cache.find(n);
  if (it == cache.end()) {
    Bits b(n);
    b.set(0);
    it = cache.emplace(n, std::move(b)).first;
  }
  return it->second;
}

Algebra Algebra::bottom(UniversePtr u, const FnSig& funcs) {
  Algebra a(std::move(u));
  for (const SymbolRef& f : funcs) a.ensure_table(f);
  return a;
}

Algebra Algebra::top(UniversePtr u, const FnSig& funcs, const FnSig& sigma) {
  Algebra a = bottom(std::move(u), funcs);
  for (const SymbolRef& f : sigma) {
    a.ensure_table(f);
    Table& t = a.tables_[f];
    Bits full = a.universe_->full_cone();
    for (Bits& c : t.cones) c = full;
  }
  return a;
}

FnSig Algebra::signature() const {
  FnSig out;
  for (const auto& [f, t] : tables_) out.insert(f);
  return out;
}

void Algebra::ensure_table(const SymbolRef& f) {
  if (!f.is_function())
    throw Error("algebra tables interpret function symbols only: " +
                f.display());
  auto it = tables_.find(f);
  if (it != tables_.end()) return;
  Table t;
  t.arity = f.arity;
  t.cones.assign(tuple_count(f.arity), bottom_ref());
  tables_.emplace(f, std::move(t));
}

const Bits& Algebra::cone(const SymbolRef& f, size_t flat) const {
  auto it = tables_.find(f);
  if (it == tables_.end()) return bottom_ref();
  return it->second.cones.at(flat);
}

const Bits& Algebra::cone(const SymbolRef& f,
                          const std::vector<size_t>& tuple) const {
  return cone(f, tuple_index(tuple));
}

Bits Algebra::cone_of_terms(const SymbolRef& f,
                            const std::vector<Term>& args) const {
  std::vector<size_t> tuple;
  for (const Term& a : args) {
    auto i = universe_->index(a);
    if (!i) throw Error("argument outside the universe: " + to_string(a));
    tuple.push_back(*i);
  }
  return cone(f, tuple);
}

void Algebra::or_into(const SymbolRef& f, size_t flat, const Bits& add) {
  ensure_table(f);
  tables_[f].cones[flat] |= add;
}

void Algebra::set_cone(const SymbolRef& f, size_t flat, Bits value) {
  ensure_table(f);
  tables_[f].cones[flat] = std::move(value);
}

bool Algebra::well_formed() const {
  const Universe& u = *universe_;
  for (const auto& [f, t] : tables_) {
    for (const Bits& c : t.cones)
      if (!u.is_cone(c)) return false;
    // monotone: tuple componentwise below implies cone inclusion
    size_t count = t.cones.size();
    for (size_t i = 0; i < count; ++i) {
      std::vector<size_t> ti = tuple_at(i, t.arity);
      for (size_t j = 0; j < count; ++j) {
        if (i == j) continue;
        std::vector<size_t> tj = tuple_at(j, t.arity);
        bool below = true;
        for (size_t k = 0; k < ti.size() && below; ++k)
          below = u.down(tj[k]).test(ti[k]);
        if (below && !t.cones[i].is_subset_of(t.cones[j])) return false;
      }
    }
  }
  return true;
}

bool Algebra::le(const Algebra& other) const {
  if (universe_ != other.universe_)
    throw Error("algebra comparison requires a shared universe");
  std::set<SymbolRef> keys;
  for (const auto& [f, t] : tables_) keys.insert(f);
  for (const auto& [f, t] : other.tables_) keys.insert(f);
  for (const SymbolRef& f : keys) {
    size_t count = tuple_count(f.arity);
    for (size_t i = 0; i < count; ++i)
      if (!cone(f, i).is_subset_of(other.cone(f, i))) return false;
  }
  return true;
}

bool operator==(const Algebra& a, const Algebra& b) {
  return a.le(b) && b.le(a);
}

int Algebra::compare(const Algebra& a, const Algebra& b) {
  std::set<SymbolRef> keys;
  for (const auto& [f, t] : a.tables_) keys.insert(f);
  for (const auto& [f, t] : b.tables_) keys.insert(f);
  for (const SymbolRef& f : keys) {
    size_t count = a.tuple_count(f.arity);
    for (size_t i = 0; i < count; ++i) {
      const Bits& ca = a.cone(f, i);
      const Bits& cb = b.cone(f, i);
      if (ca < cb) return -1;
      if (cb < ca) return 1;
    }
  }
  return 0;
}

// ---------------------------------------------------------------- lattice

static Algebra pointwise(const Algebra& a, const Algebra& b, bool join_op) {
  if (a.universe() != b.universe())
    throw Error("lattice operation requires a shared universe");
  FnSig keys = a.signature();
  for (const SymbolRef& f : b.signature()) keys.insert(f);
  Algebra out = Algebra::bottom(a.universe(), keys);
  for (const SymbolRef& f : keys) {
    size_t count = out.tuple_count(f.arity);
    for (size_t i = 0; i < count; ++i) {
      Bits v = a.cone(f, i);
      if (join_op)
        v |= b.cone(f, i);
      else
        v &= b.cone(f, i);
      v.set(0);  // every cone contains bottom
      out.set_cone(f, i, std::move(v));
    }
  }
  return out;
}

Algebra join(const Algebra& a, const Algebra& b) { return pointwise(a, b, true); }
Algebra meet(const Algebra& a, const Algebra& b) { return pointwise(a, b, false); }

Algebra restrict_to(const Algebra& a, const FnSig& sigma) {
  Algebra out = Algebra::bottom(a.universe(), a.signature());
  for (const SymbolRef& f : a.signature()) {
    if (!sigma.count(f)) continue;
    size_t count = out.tuple_count(f.arity);
    for (size_t i = 0; i < count; ++i) out.set_cone(f, i, a.cone(f, i));
  }
  return out;
}

Algebra apply_rho(const Algebra& a, const Renaming& rho) {
  Algebra out = Algebra::bottom(a.universe(), a.signature());
  for (const SymbolRef& f : a.signature()) {
    const SymbolRef& g = rho.apply(f);
    size_t count = out.tuple_count(f.arity);
    for (size_t i = 0; i < count; ++i) out.set_cone(f, i, a.cone(g, i));
  }
  return out;
}

Algebra apply_rho_inv(const Algebra& a, const Renaming& rho) {
  Algebra out = Algebra::bottom(a.universe(), a.signature());
  FnSig domain = a.signature();
  for (const SymbolRef& f : a.signature()) {
    size_t count = out.tuple_count(f.arity);
    for (const SymbolRef& g : rho.preimages(f, domain))
      for (size_t i = 0; i < count; ++i) out.or_into(f, i, a.cone(g, i));
  }
  return out;
}

// ------------------------------------------------------------- evaluation

namespace {

// Iterate all choices of one set bit per component mask.
template <typename Fn>
void for_member_tuples(const std::vector<Bits>& masks, Fn&& fn) {
  size_t n = masks.size();
  std::vector<size_t> pick(n);
  for (size_t i = 0; i < n; ++i) {
    pick[i] = masks[i].find_first();
    if (pick[i] == Bits::npos) return;  // empty component: no tuples
  }
  while (true) {
    fn(pick);
    size_t i = n;
    while (i > 0) {
      --i;
      size_t nxt = masks[i].find_next(pick[i]);
      if (nxt != Bits::npos) {
        pick[i] = nxt;
        for (size_t j = i + 1; j < n; ++j) pick[j] = masks[j].find_first();
        break;
      }
      if (i == 0) return;
    }
    if (n == 0) return;
  }
}

}  // namespace

Bits eval_term(const Algebra& a, const Term& e, const CSubst& theta) {
  const Universe& u = *a.universe();
  switch (e.tag()) {
    case Term::Tag::Bottom:
      return u.bottom_cone();
    case Term::Tag::Var: {
      const Term& img = theta.lookup(e.var_id());
      auto i = u.index(img);
      if (!i)
        throw Error("free variable image outside the universe: " +
                    var_name(e.var_id()) + " -> " + to_string(img));
      return u.down(*i);
    }
    case Term::Tag::App: {
      const SymbolRef& s = e.symbol();
      if (s.arity == 0) {
        if (s.is_constructor()) {
          auto i = u.index(e);
          return i ? Bits(u.down(*i)) : u.bottom_cone();
        }
        Bits out = a.cone(s, (size_t)0);
        return out;
      }
      std::vector<Bits> argc;
      argc.reserve(e.args().size());
      for (const Term& arg : e.args()) argc.push_back(eval_term(a, arg, theta));
      Bits out = u.bottom_cone();
      if (s.is_constructor()) {
        for_member_tuples(argc, [&](const std::vector<size_t>& pick) {
          std::vector<Term> args;
          args.reserve(pick.size());
          for (size_t i : pick) args.push_back(u.term(i));
          auto idx = u.index(Term::app(s, std::move(args)));
          if (idx) out |= u.down(*idx);
        });
      } else {
        for_member_tuples(argc, [&](const std::vector<size_t>& pick) {
          out |= a.cone(s, pick);
        });
      }
      return out;
    }
  }
  return u.bottom_cone();
}

bool satisfies(const Algebra& a, const Statement& phi, const CSubst& theta) {
  Bits l = eval_term(a, phi.lhs, theta);
  Bits r = eval_term(a, phi.rhs, theta);
  if (phi.kind == Statement::Kind::Reduction) return r.is_subset_of(l);
  l &= r;
  l &= a.universe()->totals();
  return l.any();
}

// ------------------------------------------------------------ rule slices

FnSig rule_functions(const std::vector<Rule>& rules) {
  FnSig out;
  std::function<void(const Term&)> scan = [&](const Term& t) {
    if (!t.is_app()) return;
    if (t.symbol().is_function()) out.insert(t.symbol());
    for (const Term& a : t.args()) scan(a);
  };
  for (const Rule& r : rules) {
    out.insert(r.head);
    scan(r.rhs);
    for (const Statement& c : r.conditions) {
      scan(c.lhs);
      scan(c.rhs);
    }
  }
  return out;
}

FnSig rule_heads(const std::vector<Rule>& rules) {
  FnSig out;
  for (const Rule& r : rules) out.insert(r.head);
  return out;
}

Signature rule_constructors(const std::vector<Rule>& rules) {
  Signature out;
  std::function<void(const Term&)> scan = [&](const Term& t) {
    if (!t.is_app()) return;
    if (t.symbol().is_constructor()) out.add(t.symbol());
    for (const Term& a : t.args()) scan(a);
  };
  for (const Rule& r : rules) {
    for (const Term& p : r.patterns) scan(p);
    scan(r.rhs);
    for (const Statement& c : r.conditions) {
      scan(c.lhs);
      scan(c.rhs);
    }
  }
  return out;
}

// ----------------------------------------------------- instances / t_step

namespace {

// Enumerates substitutions of `vars` (sorted by name) over universe terms.
template <typename Fn>
void for_instantiations(const std::vector<VarId>& vars, const Universe& u,
                        Fn&& fn) {
  size_t n = u.size();
  size_t k = vars.size();
  double total = std::pow((double)n, (double)k);
  if (total > (double)u.limits().max_instances)
    throw CapError("rule instance count exceeds cap",
                   std::to_string((unsigned long long)total) + " instances");
  std::vector<size_t> pick(k, 0);
  while (true) {
    CSubst theta;
    for (size_t i = 0; i < k; ++i) theta.bind(vars[i], u.term(pick[i]));
    fn(theta);
    size_t i = k;
    while (i > 0) {
      --i;
      if (++pick[i] < n) break;
      pick[i] = 0;
      if (i == 0) return;
    }
    if (k == 0) return;
  }
}

std::vector<VarId> sorted_vars(const Rule& r) {
  std::set<VarId> vs = r.vars();
  std::vector<VarId> out(vs.begin(), vs.end());
  std::sort(out.begin(), out.end(), [](VarId a, VarId b) {
    return var_name(a) < var_name(b);
  });
  return out;
}

}  // namespace

std::vector<Rule> rule_instances(const Rule& rule, const Universe& u) {
  std::vector<Rule> out;
  for_instantiations(sorted_vars(rule), u, [&](const CSubst& theta) {
    Rule inst;
    inst.head = rule.head;
    for (const Term& p : rule.patterns)
      inst.patterns.push_back(apply_subst(p, theta));
    inst.rhs = apply_subst(rule.rhs, theta);
    for (const Statement& c : rule.conditions)
      inst.conditions.push_back(
          {c.kind, apply_subst(c.lhs, theta), apply_subst(c.rhs, theta)});
    out.push_back(std::move(inst));
  });
  return out;
}

Algebra t_step(const std::vector<Rule>& rules, const Algebra& a) {
  UniversePtr u = a.universe();
  FnSig sig = a.signature();
  for (const SymbolRef& f : rule_heads(rules)) sig.insert(f);
  Algebra out = Algebra::bottom(u, sig);

  for (const Rule& r : rules) {
    for_instantiations(sorted_vars(r), *u, [&](const CSubst& theta) {
      // instantiated patterns must stay inside the universe
      std::vector<size_t> pidx;
      pidx.reserve(r.patterns.size());
      for (const Term& p : r.patterns) {
        auto i = u->index(apply_subst(p, theta));
        if (!i) return;
        pidx.push_back(*i);
      }
      for (const Statement& c : r.conditions)
        if (!satisfies(a, c, theta)) return;
      Bits val = eval_term(a, r.rhs, theta);
      if (r.patterns.empty()) {
        out.or_into(r.head, 0, val);
        return;
      }
      std::vector<Bits> above;
      above.reserve(pidx.size());
      for (size_t i : pidx) above.push_back(u->up(i));
      for_member_tuples(above, [&](const std::vector<size_t>& pick) {
        out.or_into(r.head, out.tuple_index(pick), val);
      });
    });
  }
  return out;
}

Algebra lfp(const std::vector<Rule>& rules, UniversePtr u, const FnSig& funcs) {
  FnSig sig = funcs;
  for (const SymbolRef& f : rule_heads(rules)) sig.insert(f);
  Algebra cur = Algebra::bottom(std::move(u), sig);
  while (true) {
    Algebra next = t_step(rules, cur);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

bool is_model(const std::vector<Rule>& rules, const Algebra& a) {
  return t_step(rules, a).le(a);
}

bool is_model_direct(const std::vector<Rule>& rules, const Algebra& a) {
  const Universe& u = *a.universe();
  for (const Rule& r : rules) {
    bool ok = true;
    for_instantiations(sorted_vars(r), u, [&](const CSubst& theta) {
      if (!ok) return;
      for (const Term& p : r.patterns)
        if (!u.index(apply_subst(p, theta))) return;
      for (const Statement& c : r.conditions)
        if (!satisfies(a, c, theta)) return;
      Bits lhs = eval_term(a, r.lhs_term(), theta);
      Bits rhs = eval_term(a, r.rhs, theta);
      if (!rhs.is_subset_of(lhs)) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

bool is_consistent(const Algebra& a) {
  const Universe& u = *a.universe();
  int v = u.var_pool();
  if (v == 0) return true;
  std::vector<VarId> pool;
  for (int i = 1; i <= v; ++i) pool.push_back(intern_var("X" + std::to_string(i)));
  std::vector<size_t> total_idx;
  for (size_t i = u.totals().find_first(); i != Bits::npos;
       i = u.totals().find_next(i))
    total_idx.push_back(i);

  size_t n = u.size();
  std::vector<size_t> pick((size_t)v, 0);
  while (true) {
    // substitution pool -> total terms
    CSubst theta;
    bool identity = true;
    for (int i = 0; i < v; ++i) {
      const Term& img = u.term(total_idx[pick[(size_t)i]]);
      if (!(img.is_var() && img.var_id() == pool[(size_t)i])) identity = false;
      theta.bind(pool[(size_t)i], img);
    }
    if (!identity) {
      std::vector<std::optional<size_t>> img(n);
      for (size_t i = 0; i < n; ++i)
        img[i] = u.index(apply_subst(u.term(i), theta));
      for (const auto& [f, table] : a.tables()) {
        size_t count = table.cones.size();
        for (size_t flat = 0; flat < count; ++flat) {
          std::vector<size_t> tuple = a.tuple_at(flat, table.arity);
          std::vector<size_t> mapped;
          mapped.reserve(tuple.size());
          bool inside = true;
          for (size_t c : tuple) {
            if (!img[c]) {
              inside = false;
              break;
            }
            mapped.push_back(*img[c]);
          }
          if (!inside) continue;
          const Bits& target = a.cone(f, mapped);
          const Bits& src = table.cones[flat];
          for (size_t b = src.find_first(); b != Bits::npos;
               b = src.find_next(b)) {
            if (img[b] && !target.test(*img[b])) return false;
          }
        }
      }
    }
    size_t i = (size_t)v;
    bool more = false;
    while (i > 0) {
      --i;
      if (++pick[i] < total_idx.size()) {
        more = true;
        break;
      }
      pick[i] = 0;
    }
    if (!more) return true;
  }
}

// ------------------------------------------------------------ enumeration

std::vector<Bits> enumerate_cones(const Universe& u) {
  size_t n = u.size();
  std::vector<Bits> downsets;
  Bits base(n);
  base.set(u.bottom_index());
  downsets.push_back(base);
  // Elements in canonical order form a linear extension: the strict
  // down-set of element i lies entirely below i.
  for (size_t i = 0; i < n; ++i) {
    if (i == u.bottom_index()) continue;
    Bits need = u.down(i);
    size_t existing = downsets.size();
    for (size_t k = 0; k < existing; ++k) {
      Bits below = need;
      below.reset(i);
      if (below.is_subset_of(downsets[k])) {
        Bits extended = downsets[k];
        extended.set(i);
        downsets.push_back(std::move(extended));
        if (downsets.size() > u.limits().max_cones)
          throw CapError("cone count exceeds cap",
                         "> " + std::to_string(u.limits().max_cones));
      }
    }
  }
  std::sort(downsets.begin(), downsets.end());
  return downsets;
}

AlgebraEnumerator::AlgebraEnumerator(FnSig funcs, UniversePtr u, Filter filter)
    : funcs_(std::move(funcs)), u_(std::move(u)), filter_(filter) {
  cones_ = enumerate_cones(*u_);
  Algebra probe(u_);
  for (const SymbolRef& f : funcs_) {
    size_t count = probe.tuple_count(f.arity);
    for (size_t flat = 0; flat < count; ++flat) {
      Slot s;
      s.f = f;
      s.flat = flat;
      slots_.push_back(std::move(s));
    }
  }
  // strict predecessors: same symbol, componentwise below
  size_t base = 0;
  for (const SymbolRef& f : funcs_) {
    size_t count = probe.tuple_count(f.arity);
    for (size_t flat = 0; flat < count; ++flat) {
      Slot& s = slots_[base + flat];
      std::vector<size_t> tuple = probe.tuple_at(flat, f.arity);
      std::vector<Bits> downs;
      for (size_t c : tuple) downs.push_back(u_->down(c));
      for_member_tuples(downs, [&](const std::vector<size_t>& pick) {
        size_t pflat = probe.tuple_index(pick);
        if (pflat != flat) s.preds.push_back({base + pflat, 0});
      });
    }
    base += count;
  }
  reset();
}

void AlgebraEnumerator::reset() {
  choice_.assign(slots_.size(), 0);
  fresh_ = true;
  done_ = false;
}

bool AlgebraEnumerator::constraints_ok(size_t slot) const {
  const Bits& mine = cones_[choice_[slot]];
  for (const auto& [pred, unused] : slots_[slot].preds)
    if (!cones_[choice_[pred]].is_subset_of(mine)) return false;
  return true;
}

// Sets slots [from..end) to their least valid choices; false on failure.
static bool fill_min(std::vector<size_t>& choice, size_t from,
                     const std::function<bool(size_t)>& ok, size_t nslots,
                     size_t ncones) {
  for (size_t s = from; s < nslots; ++s) {
    choice[s] = 0;
    while (choice[s] < ncones && !ok(s)) ++choice[s];
    if (choice[s] == ncones) return false;
  }
  return true;
}

bool AlgebraEnumerator::advance() {
  auto ok = [this](size_t s) { return constraints_ok(s); };
  if (fresh_) {
    fresh_ = false;
    if (slots_.empty()) return true;  // single empty-signature algebra
    if (fill_min(choice_, 0, ok, slots_.size(), cones_.size())) return true;
    done_ = true;
    return false;
  }
  if (slots_.empty()) {
    done_ = true;
    return false;
  }
  size_t pos = slots_.size();
  while (pos > 0) {
    --pos;
    ++choice_[pos];
    while (choice_[pos] < cones_.size() && !constraints_ok(pos)) ++choice_[pos];
    if (choice_[pos] < cones_.size()) {
      if (fill_min(choice_, pos + 1, ok, slots_.size(), cones_.size()))
        return true;
      // later slots unsatisfiable cannot happen (full cone always valid),
      // but keep backtracking for safety
      continue;
    }
  }
  done_ = true;
  return false;
}

Algebra AlgebraEnumerator::current() const {
  Algebra a = Algebra::bottom(u_, funcs_);
  for (size_t s = 0; s < slots_.size(); ++s)
    a.set_cone(slots_[s].f, slots_[s].flat, cones_[choice_[s]]);
  return a;
}

bool AlgebraEnumerator::next(Algebra& out) {
  if (done_) return false;
  while (advance()) {
    Algebra a = current();
    if (filter_ == Filter::ConsistentOnly && !is_consistent(a)) continue;
    out = std::move(a);
    if (slots_.empty()) done_ = true;
    return true;
  }
  return false;
}

size_t count_algebras(const FnSig& funcs, UniversePtr u,
                      AlgebraEnumerator::Filter filter, double cap) {
  AlgebraEnumerator en(funcs, u, filter);
  Algebra a;
  size_t count = 0;
  while (en.next(a)) {
    if ((double)++count > cap)
      throw CapError("algebra count exceeds cap; use the sampling fallback",
                     "> " + std::to_string((size_t)cap) + " algebras");
  }
  return count;
}

Algebra sample_algebra(const FnSig& funcs, UniversePtr u,
                       std::mt19937_64& rng) {
  const Universe& uni = *u;
  size_t n = uni.size();
  Algebra a = Algebra::bottom(u, funcs);
  for (const SymbolRef& f : funcs) {
    size_t count = a.tuple_count(f.arity);
    for (size_t flat = 0; flat < count; ++flat) {
      Bits raw(n);
      for (size_t i = 0; i < n; ++i)
        if (rng() & 1) raw.set(i);
      Bits cone = uni.downclose(raw);
      // monotone repair: absorb every predecessor cone
      std::vector<size_t> tuple = a.tuple_at(flat, f.arity);
      std::vector<Bits> downs;
      for (size_t c : tuple) downs.push_back(uni.down(c));
      for_member_tuples(downs, [&](const std::vector<size_t>& pick) {
        size_t pflat = a.tuple_index(pick);
        if (pflat != flat) cone |= a.cone(f, pflat);
      });
      a.set_cone(f, flat, std::move(cone));
    }
  }
  return a;
}

std::string dump_algebra(const Algebra& a, bool include_bottom_rows) {
  const Universe& u = *a.universe();
  std::ostringstream os;
  for (const auto& [f, table] : a.tables()) {
    for (size_t flat = 0; flat < table.cones.size(); ++flat) {
      const Bits& c = table.cones[flat];
      if (!include_bottom_rows && c.count() <= 1) continue;
      std::vector<size_t> tuple = a.tuple_at(flat, table.arity);
      std::vector<Term> args;
      for (size_t i : tuple) args.push_back(u.term(i));
      os << to_string(Term::app(f, args)) << " |-> " << u.cone_to_string(c)
         << '\n';
    }
  }
  return os.str();
}

}  // namespace crwl
