#include "crwl/structured.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace crwl {

namespace {

void scan_term_symbols(const Term& t, Signature& sig) {
  if (!t.is_app()) return;
  sig.add(t.symbol());
  for (const Term& a : t.args()) scan_term_symbols(a, sig);
}

Signature rules_symbols(const std::vector<Rule>& rules) {
  Signature sig;
  for (const Rule& r : rules) {
    sig.add(r.head);
    for (const Term& p : r.patterns) scan_term_symbols(p, sig);
    scan_term_symbols(r.rhs, sig);
    for (const Statement& c : r.conditions) {
      scan_term_symbols(c.lhs, sig);
      scan_term_symbols(c.rhs, sig);
    }
  }
  return sig;
}

void recompute_interface(StructuredModule& sm) {
  sm.exports.clear();
  for (const Rule& r : sm.rules_v) sm.exports.insert(r.head);
  for (const Rule& r : sm.rules_b) sm.exports.insert(r.head);
  sm.params.clear();
  for (const SymbolRef& f : rule_functions(sm.rules_v))
    if (!f.labeled() && !sm.exports.count(f)) sm.params.insert(f);
}

}  // namespace

Module StructuredModule::to_plain() const {
  if (!is_plain())
    throw Error("structured module with a hidden part is not plain");
  return Module::from_rules(rules_v);
}

std::vector<Rule> StructuredModule::full_rules() const {
  std::vector<Rule> out = rules_v;
  out.insert(out.end(), rules_b.begin(), rules_b.end());
  out.insert(out.end(), rules_h.begin(), rules_h.end());
  return out;
}

StructuredModule StructuredModule::embed(const Module& m,
                                         std::string provenance) {
  StructuredModule sm;
  sm.params = m.params();
  sm.exports = m.exports();
  sm.rules_v = m.rules();
  sm.provenance = std::move(provenance);
  return sm;
}

void StructuredModule::check_invariants() const {
  rules_symbols(full_rules());  // kind/arity clashes
  for (const Rule& r : rules_v) {
    if (r.head.labeled())
      throw Error("visible rule with labeled head: " + to_string(r));
    for (const SymbolRef& f : rule_functions({r}))
      if (f.labeled())
        throw Error("visible rule invokes a labeled symbol: " + to_string(r));
  }
  FnSig hidden_heads;
  for (const Rule& r : rules_h) {
    if (!r.head.labeled())
      throw Error("hidden rule with visible head: " + to_string(r));
    hidden_heads.insert(r.head);
    for (const SymbolRef& f : rule_functions({r}))
      if (!f.labeled())
        throw Error("hidden rule invokes a visible function: " + to_string(r));
  }
  for (const Rule& r : rules_b) {
    bool shape = !r.head.labeled() && r.rhs.is_app() &&
                 r.rhs.symbol().labeled() && r.rhs.symbol().is_function() &&
                 r.conditions.empty() &&
                 r.rhs.args().size() == r.patterns.size();
    for (size_t i = 0; shape && i < r.patterns.size(); ++i)
      shape = r.patterns[i].is_var() && r.rhs.args()[i] == r.patterns[i];
    if (!shape) throw Error("malformed bridge rule: " + to_string(r));
    if (!hidden_heads.count(r.rhs.symbol()))
      throw Error("bridge targets an undefined hidden symbol: " +
                  to_string(r));
  }
  StructuredModule probe = *this;
  recompute_interface(probe);
  if (probe.exports != exports || probe.params != params)
    throw Error("structured interface out of sync");
  for (const SymbolRef& s : rules_symbols(rules_h).constructors())
    if (s.labeled() && !hidden_ctors.count(s))
      throw Error("unrecorded hidden constructor: " + s.display());
}

StructuredModule union_structured(const StructuredModule& a,
                                  const StructuredModule& b) {
  StructuredModule out;
  auto cat = [](std::vector<Rule> x, const std::vector<Rule>& y) {
    x.insert(x.end(), y.begin(), y.end());
    return canonical_rules(std::move(x));
  };
  out.rules_v = cat(a.rules_v, b.rules_v);
  out.rules_b = cat(a.rules_b, b.rules_b);
  out.rules_h = cat(a.rules_h, b.rules_h);
  out.hidden_ctors = a.hidden_ctors;
  out.hidden_ctors.insert(b.hidden_ctors.begin(), b.hidden_ctors.end());
  recompute_interface(out);
  out.provenance = a.provenance + "+" + b.provenance;
  out.check_invariants();
  return out;
}

StructuredModule delete_structured(const StructuredModule& sm,
                                   const FnSig& sigma) {
  for (const SymbolRef& f : sigma)
    if (f.labeled())
      throw Error("deletion may only name visible symbols: " + f.display());
  StructuredModule out = sm;
  auto drop = [&sigma](std::vector<Rule>& rules) {
    rules.erase(std::remove_if(rules.begin(), rules.end(),
                               [&sigma](const Rule& r) {
                                 return sigma.count(r.head) != 0;
                               }),
                rules.end());
  };
  drop(out.rules_v);
  drop(out.rules_b);
  recompute_interface(out);
  out.check_invariants();
  return out;
}

StructuredModule rename_structured(const StructuredModule& sm,
                                   const Renaming& rho) {
  for (const auto& [from, to] : rho.entries()) {
    if (from.labeled() || to.labeled())
      throw Error("renaming may only involve visible signature: " +
                  from.display() + " -> " + to.display());
    Signature vis = rules_symbols(sm.rules_v);
    for (const std::string& name : {from.name, to.name}) {
      auto s = vis.lookup(name);
      if (s && s->is_constructor())
        throw Error("renaming names a constructor symbol: " + name);
    }
  }
  StructuredModule out = sm;
  for (Rule& r : out.rules_v) r = rename_rule(rho, r);
  for (Rule& r : out.rules_b) r = rename_rule(rho, r);
  out.rules_v = canonical_rules(std::move(out.rules_v));
  out.rules_b = canonical_rules(std::move(out.rules_b));
  recompute_interface(out);
  out.check_invariants();
  return out;
}

namespace {

Term relabel_ctors(const Term& t,
                   const std::map<SymbolRef, SymbolRef>& map) {
  if (!t.is_app()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const Term& a : t.args()) args.push_back(relabel_ctors(a, map));
  auto it = map.find(t.symbol());
  return Term::app(it == map.end() ? t.symbol() : it->second, std::move(args));
}

Rule relabel_rule_ctors(const Rule& r,
                        const std::map<SymbolRef, SymbolRef>& map) {
  Rule out;
  out.head = r.head;
  for (const Term& p : r.patterns) out.patterns.push_back(relabel_ctors(p, map));
  out.rhs = relabel_ctors(r.rhs, map);
  for (const Statement& c : r.conditions)
    out.conditions.push_back(
        {c.kind, relabel_ctors(c.lhs, map), relabel_ctors(c.rhs, map)});
  return out;
}

}  // namespace

StructuredModule star_hiding(const StructuredModule& sm,
                             const std::set<SymbolRef>& ctors) {
  const std::string& label = sm.provenance;
  Signature occurring = rules_symbols(sm.full_rules());
  for (const SymbolRef& c : ctors) {
    if (!c.is_constructor() || c.labeled())
      throw Error("closure may only hide visible constructor symbols: " +
                  c.display());
    auto s = occurring.lookup(c.name);
    if (!s || !(*s == c))
      throw Error("closure hides " + c.display() +
                  " which is not a constructor of the module");
  }

  // tau: every visible function of the visible and bridge parts gets the
  // label; labeled symbols are kept.
  Renaming tau;
  std::vector<Rule> vb = sm.rules_v;
  vb.insert(vb.end(), sm.rules_b.begin(), sm.rules_b.end());
  for (const SymbolRef& f : rule_functions(vb))
    if (!f.labeled())
      tau.add(f, SymbolRef{f.name, f.arity, Kind::Function, label});

  StructuredModule out;
  out.exports = sm.exports;
  out.hidden_ctors = sm.hidden_ctors;
  out.rules_h = sm.rules_h;
  for (const Rule& r : vb) out.rules_h.push_back(rename_rule(tau, r));

  if (!ctors.empty()) {
    std::map<SymbolRef, SymbolRef> cmap;
    for (const SymbolRef& c : ctors) {
      SymbolRef hidden{c.name, c.arity, Kind::Constructor, label};
      cmap.emplace(c, hidden);
      out.hidden_ctors.insert(hidden);
    }
    for (Rule& r : out.rules_h) r = relabel_rule_ctors(r, cmap);
  }
  out.rules_h = canonical_rules(std::move(out.rules_h));

  for (const SymbolRef& f : sm.exports) {
    Rule bridge;
    bridge.head = f;
    std::vector<Term> vars;
    for (int i = 1; i <= f.arity; ++i)
      vars.push_back(Term::var("X" + std::to_string(i)));
    bridge.patterns = vars;
    bridge.rhs = Term::app(tau.apply(f), vars);
    out.rules_b.push_back(std::move(bridge));
  }
  out.rules_b = canonical_rules(std::move(out.rules_b));
  recompute_interface(out);
  out.provenance = "close(" + label + ")";
  out.check_invariants();
  return out;
}

StructuredModule star(const StructuredModule& sm) {
  return star_hiding(sm, {});
}

namespace {

StructuredModule iota_rec(const ExprPtr& e0, const FlattenEnv& env,
                          std::set<std::string>& visiting) {
  ExprPtr e = desugar(e0);
  StructuredModule out;
  switch (e->k) {
    case Expr::K::Ref: {
      auto mit = env.modules.find(e->name);
      if (mit != env.modules.end()) {
        out = StructuredModule::embed(mit->second, e->name);
        return out;
      }
      auto bit = env.bindings.find(e->name);
      if (bit == env.bindings.end())
        throw Error("unresolved module name: " + e->name);
      if (!visiting.insert(e->name).second)
        throw Error("cyclic module definition: " + e->name);
      out = iota_rec(bit->second, env, visiting);
      visiting.erase(e->name);
      out.provenance = e->name;
      return out;
    }
    case Expr::K::Union:
      out = union_structured(iota_rec(e->a, env, visiting),
                             iota_rec(e->b, env, visiting));
      break;
    case Expr::K::Delete:
      out = delete_structured(iota_rec(e->a, env, visiting), *e->sig);
      break;
    case Expr::K::Rename:
      out = rename_structured(iota_rec(e->a, env, visiting), e->rho);
      break;
    case Expr::K::Close: {
      StructuredModule inner = iota_rec(e->a, env, visiting);
      out = star(inner);
      if (e->sig) {
        FnSig drop;
        for (const SymbolRef& f : inner.exports)
          if (!e->sig->count(f)) drop.insert(f);
        out = delete_structured(out, drop);
      }
      break;
    }
    case Expr::K::CloseHiding:
      out = star_hiding(iota_rec(e->a, env, visiting), e->hide);
      break;
    case Expr::K::Isa: {
      StructuredModule a = iota_rec(e->a, env, visiting);
      StructuredModule b = iota_rec(e->b, env, visiting);
      out = union_structured(a, delete_structured(b, a.exports));
      break;
    }
    default:
      throw Error("internal: derived node survived desugaring");
  }
  out.provenance = canonical_label(e);
  return out;
}

}  // namespace

StructuredModule iota(const ExprPtr& e, const FlattenEnv& env) {
  std::set<std::string> visiting;
  return iota_rec(e, env, visiting);
}

// ------------------------------------------------------------- U operator

namespace {

// t*: replace every subterm headed by a labeled constructor with bottom.
Term star_term(const Term& t) {
  if (!t.is_app()) return t;
  if (t.symbol().labeled()) return Term::bottom();
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const Term& a : t.args()) args.push_back(star_term(a));
  return Term::app(t.symbol(), std::move(args));
}

}  // namespace

Algebra u_step(const StructuredModule& sm, const Algebra& a) {
  UniversePtr uvis = a.universe();
  bool hiding = !sm.hidden_ctors.empty();
  UniversePtr uext = uvis;
  if (hiding) {
    Signature ext = uvis->constructors();
    for (const SymbolRef& c : sm.hidden_ctors) ext.add(c);
    uext = enumerate_universe(ext, uvis->depth(), uvis->var_pool(),
                              uvis->limits());
  }

  FnSig vis_fns = a.signature();
  FnSig lab_fns;
  std::vector<Rule> vb = sm.rules_v;
  vb.insert(vb.end(), sm.rules_b.begin(), sm.rules_b.end());
  for (const SymbolRef& f : rule_functions(vb))
    (f.labeled() ? lab_fns : vis_fns).insert(f);
  for (const SymbolRef& f : rule_functions(sm.rules_h)) lab_fns.insert(f);

  size_t nv = uvis->size();
  size_t ne = uext->size();
  std::vector<size_t> vis2ext(nv);
  std::vector<std::optional<size_t>> ext2vis(ne);
  std::vector<size_t> star_vis(ne);
  for (size_t i = 0; i < nv; ++i) {
    auto j = uext->index(uvis->term(i));
    if (!j) throw Error("internal: extended universe misses a visible term");
    vis2ext[i] = *j;
    ext2vis[*j] = i;
  }
  for (size_t j = 0; j < ne; ++j) {
    auto i = uvis->index(star_term(uext->term(j)));
    if (!i) throw Error("internal: starred term escaped the visible universe");
    star_vis[j] = *i;
  }

  // extension of `a`: visible functions read arguments through t*, labeled
  // functions start at bottom
  FnSig all_fns = vis_fns;
  all_fns.insert(lab_fns.begin(), lab_fns.end());
  Algebra extended = Algebra::bottom(uext, all_fns);
  Algebra probe(uvis);
  for (const SymbolRef& f : vis_fns) {
    size_t count = extended.tuple_count(f.arity);
    for (size_t flat = 0; flat < count; ++flat) {
      std::vector<size_t> tuple = extended.tuple_at(flat, f.arity);
      std::vector<size_t> vtuple;
      vtuple.reserve(tuple.size());
      for (size_t c : tuple) vtuple.push_back(star_vis[c]);
      const Bits& vcone = a.cone(f, probe.tuple_index(vtuple));
      Bits econe(ne);
      for (size_t b = vcone.find_first(); b != Bits::npos;
           b = vcone.find_next(b))
        econe.set(vis2ext[b]);
      extended.set_cone(f, flat, std::move(econe));
    }
  }

  Algebra hidden_model = lfp(sm.rules_h, uext, lab_fns);
  Algebra stepped = t_step(vb, join(hidden_model, extended));

  // reduct: visible symbols, visible carrier
  FnSig out_sig = a.signature();
  for (const Rule& r : vb)
    if (!r.head.labeled()) out_sig.insert(r.head);
  Algebra out = Algebra::bottom(uvis, out_sig);
  for (const SymbolRef& f : out_sig) {
    size_t count = out.tuple_count(f.arity);
    for (size_t flat = 0; flat < count; ++flat) {
      std::vector<size_t> tuple = out.tuple_at(flat, f.arity);
      std::vector<size_t> etuple;
      etuple.reserve(tuple.size());
      for (size_t c : tuple) etuple.push_back(vis2ext[c]);
      const Bits& econe = stepped.cone(f, etuple);
      Bits vcone(nv);
      for (size_t b = econe.find_first(); b != Bits::npos;
           b = econe.find_next(b))
        if (ext2vis[b]) vcone.set(*ext2vis[b]);
      out.set_cone(f, flat, std::move(vcone));
    }
  }
  return out;
}

Algebra u_model(const StructuredModule& sm, UniversePtr u) {
  FnSig sig = sm.exports;
  sig.insert(sm.params.begin(), sm.params.end());
  Algebra cur = Algebra::bottom(std::move(u), sig);
  while (true) {
    Algebra next = u_step(sm, cur);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

Module materialize_structured(const StructuredModule& sm, UniversePtr u) {
  Algebra graph = restrict_to(u_model(sm, u), sm.exports);
  graph = stabilize_graph(std::move(graph), sm.exports, u);
  return Module::from_rules(graph_rules(graph, sm.exports, *u));
}

// ------------------------------------------------------------- flattening

namespace {

Module flatten_mat_rec(const ExprPtr& e0, const FlattenEnv& env, UniversePtr u,
                       std::vector<std::string>* warnings,
                       std::set<std::string>& visiting) {
  const ExprPtr& e = e0;
  switch (e->k) {
    case Expr::K::Ref: {
      auto mit = env.modules.find(e->name);
      if (mit != env.modules.end()) return mit->second;
      auto bit = env.bindings.find(e->name);
      if (bit == env.bindings.end())
        throw Error("unresolved module name: " + e->name);
      if (!visiting.insert(e->name).second)
        throw Error("cyclic module definition: " + e->name);
      Module m = flatten_mat_rec(bit->second, env, u, warnings, visiting);
      visiting.erase(e->name);
      return m;
    }
    case Expr::K::Union:
      return union_modules(flatten_mat_rec(e->a, env, u, warnings, visiting),
                           flatten_mat_rec(e->b, env, u, warnings, visiting));
    case Expr::K::Delete:
      return delete_signature(
          flatten_mat_rec(e->a, env, u, warnings, visiting), *e->sig);
    case Expr::K::Rename:
      return rename_module(flatten_mat_rec(e->a, env, u, warnings, visiting),
                           e->rho);
    case Expr::K::Close: {
      Module m = flatten_mat_rec(e->a, env, u, warnings, visiting);
      return close_materialized(m, e->sig ? *e->sig : m.exports(), u);
    }
    case Expr::K::CloseHiding:
      return materialize_structured(iota(e, env), u);
    case Expr::K::Isa: {
      Module a = flatten_mat_rec(e->a, env, u, warnings, visiting);
      Module b = flatten_mat_rec(e->b, env, u, warnings, visiting);
      return isa_modules(a, b);
    }
    case Expr::K::Instantiate: {
      Module a = flatten_mat_rec(e->a, env, u, warnings, visiting);
      Module b = flatten_mat_rec(e->b, env, u, warnings, visiting);
      if (warnings) {
        bool meaningful = false;
        for (const SymbolRef& f : rename_sig(e->rho, a.params()))
          if (b.exports().count(f)) meaningful = true;
        if (!meaningful)
          warnings->push_back(
              "inst: no renamed parameter matches an export of the argument");
      }
      return union_modules(rename_module(a, e->rho),
                           close_materialized(b, b.exports(), u));
    }
    case Expr::K::Abstract:
      return abstract_module(
          flatten_mat_rec(e->a, env, u, warnings, visiting), *e->sig,
          warnings);
    case Expr::K::Export:
    case Expr::K::Import:
      return flatten_mat_rec(desugar(e), env, u, warnings, visiting);
  }
  throw Error("internal: unhandled expression node");
}

}  // namespace

Module flatten_materialized(const ExprPtr& e, const FlattenEnv& env,
                            UniversePtr u,
                            std::vector<std::string>* warnings) {
  std::set<std::string> visiting;
  return flatten_mat_rec(e, env, std::move(u), warnings, visiting);
}

// ---------------------------------------------------------------- display

std::string print_structured(const StructuredModule& sm) {
  std::ostringstream os;
  os << "< " << to_string(sm.params) << ",\n  " << to_string(sm.exports)
     << ",\n  {\n";
  auto section = [&os](const char* header, const std::vector<Rule>& rules) {
    if (rules.empty()) return;
    os << "  -- " << header << '\n';
    for (const Rule& r : rules) os << "  " << to_string(r) << '\n';
  };
  section("visible", sm.rules_v);
  section("bridge", sm.rules_b);
  section("hidden", sm.rules_h);
  if (!sm.hidden_ctors.empty()) {
    os << "  -- hidden constructors:";
    bool first = true;
    for (const SymbolRef& c : sm.hidden_ctors) {
      os << (first ? " " : ", ") << c.display();
      first = false;
    }
    os << '\n';
  }
  os << "  } >\n";
  return os.str();
}

}  // namespace crwl
