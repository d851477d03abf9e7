#include "crwl/module.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace crwl {

Module Module::from_rules(std::vector<Rule> rules) {
  for (const Rule& r : rules) r.validate();
  Module m;
  m.rules_ = canonical_rules(std::move(rules));
  // one global signature: kind/arity clashes are errors
  Signature sig;
  std::function<void(const Term&)> scan = [&](const Term& t) {
    if (!t.is_app()) return;
    sig.add(t.symbol());
    for (const Term& a : t.args()) scan(a);
  };
  for (const Rule& r : m.rules_) {
    sig.add(r.head);
    for (const Term& p : r.patterns) scan(p);
    scan(r.rhs);
    for (const Statement& c : r.conditions) {
      scan(c.lhs);
      scan(c.rhs);
    }
  }
  m.exports_ = rule_heads(m.rules_);
  for (const SymbolRef& f : rule_functions(m.rules_))
    if (!m.exports_.count(f)) m.params_.insert(f);
  return m;
}

const Module& Module::null_module() {
  static Module o;
  return o;
}

FnSig Module::functions() const {
  FnSig out = exports_;
  out.insert(params_.begin(), params_.end());
  return out;
}

Signature Module::symbols() const {
  Signature sig;
  std::function<void(const Term&)> scan = [&](const Term& t) {
    if (!t.is_app()) return;
    sig.add(t.symbol());
    for (const Term& a : t.args()) scan(a);
  };
  for (const Rule& r : rules_) {
    sig.add(r.head);
    for (const Term& p : r.patterns) scan(p);
    scan(r.rhs);
    for (const Statement& c : r.conditions) {
      scan(c.lhs);
      scan(c.rhs);
    }
  }
  return sig;
}

Signature Module::constructor_signature() const {
  Signature out;
  for (const SymbolRef& s : symbols().constructors()) out.add(s);
  return out;
}

bool operator==(const Module& a, const Module& b) {
  if (a.params_ != b.params_ || a.exports_ != b.exports_) return false;
  if (a.rules_.size() != b.rules_.size()) return false;
  for (size_t i = 0; i < a.rules_.size(); ++i)
    if (!rule_equal(a.rules_[i], b.rules_[i])) return false;
  return true;
}

Module union_modules(const Module& a, const Module& b) {
  std::vector<Rule> rules = a.rules();
  rules.insert(rules.end(), b.rules().begin(), b.rules().end());
  return Module::from_rules(std::move(rules));
}

Module delete_signature(const Module& m, const FnSig& sigma) {
  std::vector<Rule> rules;
  for (const Rule& r : m.rules())
    if (!sigma.count(r.head)) rules.push_back(r);
  Module out = Module::from_rules(std::move(rules));
  // par(P \ sigma) ⊆ par(P) ∪ (exp(P) ∩ sigma)
  for (const SymbolRef& f : out.params())
    if (!m.params().count(f) && !(m.exports().count(f) && sigma.count(f)))
      throw Error("deletion broke the parameter bound for " + f.display());
  return out;
}

Module rename_module(const Module& m, const Renaming& rho) {
  Signature occurring = m.symbols();
  for (const auto& [from, to] : rho.entries()) {
    for (const std::string& name : {from.name, to.name}) {
      auto s = occurring.lookup(name);
      if (s && s->is_constructor())
        throw Error("renaming names a constructor symbol: " + name);
    }
  }
  std::vector<Rule> rules;
  for (const Rule& r : m.rules()) rules.push_back(rename_rule(rho, r));
  return Module::from_rules(std::move(rules));
}

std::vector<Rule> graph_rules(const Algebra& graph, const FnSig& sigma,
                              const Universe& u) {
  std::vector<Rule> rules;
  for (const SymbolRef& f : sigma) {
    if (!graph.has(f)) continue;
    size_t count = graph.tuple_count(f.arity);
    for (size_t flat = 0; flat < count; ++flat) {
      const Bits& cone = graph.cone(f, flat);
      std::vector<size_t> tuple = graph.tuple_at(flat, f.arity);
      std::vector<Term> args;
      args.reserve(tuple.size());
      for (size_t i : tuple) args.push_back(u.term(i));
      for (size_t r = cone.find_first(); r != Bits::npos;
           r = cone.find_next(r)) {
        if (r == u.bottom_index()) continue;
        rules.push_back(make_crr(f, args, u.term(r)).first);
      }
    }
  }
  return rules;
}

Algebra stabilize_graph(Algebra graph, const FnSig& sigma, UniversePtr u) {
  // Canonical rules regenerate their graph in one transformer step (their
  // bodies invoke no functions). Instantiating them can stay inside the
  // universe where the original derivation could not, so the bounded graph
  // is iterated to a fixpoint; each step only adds approximations that are
  // sound for the unbounded closure, and re-materializing the result is the
  // identity.
  while (true) {
    std::vector<Rule> rules = graph_rules(graph, sigma, *u);
    Algebra next = t_step(rules, Algebra::bottom(u, graph.signature()));
    if (next.le(graph)) return graph;
    graph = join(graph, next);
  }
}

Module close_materialized(const Module& m, const FnSig& sigma, UniversePtr u) {
  Algebra model = lfp(m.rules(), u, m.functions());
  FnSig kept;
  for (const SymbolRef& f : sigma)
    if (m.exports().count(f)) kept.insert(f);
  Algebra graph = stabilize_graph(restrict_to(model, kept), kept, u);
  return Module::from_rules(graph_rules(graph, kept, *u));
}

Module isa_modules(const Module& m, const Module& n) {
  return union_modules(m, delete_signature(n, m.exports()));
}

Module abstract_module(const Module& m, const FnSig& sigma,
                       std::vector<std::string>* warnings) {
  Module out = delete_signature(m, sigma);
  if (warnings) {
    for (const SymbolRef& f : sigma) {
      if (!m.exports().count(f)) {
        warnings->push_back("abstract: " + f.display() +
                            " is not exported by the operand");
      } else if (!out.params().count(f)) {
        warnings->push_back("abstract: " + f.display() +
                            " no longer occurs in any surviving rule");
      }
    }
  }
  return out;
}

std::string print_module(const Module& m) {
  std::ostringstream os;
  os << "< " << to_string(m.params()) << ",\n  " << to_string(m.exports())
     << ",\n  {";
  bool first = true;
  for (const Rule& r : m.rules()) {
    os << (first ? " " : "    ") << to_string(r) << '\n';
    first = false;
  }
  if (first) os << ' ';
  if (!first) os << "  ";
  os << "} >\n";
  return os.str();
}

std::string print_module(const std::string& name, const Module& m) {
  return name + " = " + print_module(m);
}

// ------------------------------------------------------------ expressions

namespace {
ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }
}  // namespace

ExprPtr Expr::ref(std::string name) {
  Expr e;
  e.k = K::Ref;
  e.name = std::move(name);
  return make(std::move(e));
}
ExprPtr Expr::union_(ExprPtr a, ExprPtr b) {
  Expr e;
  e.k = K::Union;
  e.a = std::move(a);
  e.b = std::move(b);
  return make(std::move(e));
}
ExprPtr Expr::close(ExprPtr a, std::optional<FnSig> sig) {
  Expr e;
  e.k = K::Close;
  e.a = std::move(a);
  e.sig = std::move(sig);
  return make(std::move(e));
}
ExprPtr Expr::close_hiding(ExprPtr a, std::set<SymbolRef> ctors) {
  for (const SymbolRef& c : ctors)
    if (!c.is_constructor())
      throw Error("closeH hides constructor symbols only: " + c.display());
  Expr e;
  e.k = K::CloseHiding;
  e.a = std::move(a);
  e.hide = std::move(ctors);
  return make(std::move(e));
}
ExprPtr Expr::del(ExprPtr a, FnSig sig) {
  Expr e;
  e.k = K::Delete;
  e.a = std::move(a);
  e.sig = std::move(sig);
  return make(std::move(e));
}
ExprPtr Expr::rename(Renaming rho, ExprPtr a) {
  Expr e;
  e.k = K::Rename;
  e.rho = std::move(rho);
  e.a = std::move(a);
  return make(std::move(e));
}
ExprPtr Expr::export_(FnSig sig, ExprPtr a) {
  Expr e;
  e.k = K::Export;
  e.sig = std::move(sig);
  e.a = std::move(a);
  return make(std::move(e));
}
ExprPtr Expr::import_(ExprPtr a, ExprPtr b) {
  Expr e;
  e.k = K::Import;
  e.a = std::move(a);
  e.b = std::move(b);
  return make(std::move(e));
}
ExprPtr Expr::import_sel(ExprPtr a, FnSig sig, ExprPtr b) {
  return import_(std::move(a), export_(std::move(sig), std::move(b)));
}
ExprPtr Expr::import_ren(ExprPtr a, Renaming rho, FnSig sig, ExprPtr b) {
  return import_(std::move(a),
                 rename(std::move(rho), export_(std::move(sig), std::move(b))));
}
ExprPtr Expr::instantiate(ExprPtr a, ExprPtr b, Renaming rho) {
  Expr e;
  e.k = K::Instantiate;
  e.a = std::move(a);
  e.b = std::move(b);
  e.rho = std::move(rho);
  return make(std::move(e));
}
ExprPtr Expr::abstract_(ExprPtr a, FnSig sig) {
  Expr e;
  e.k = K::Abstract;
  e.a = std::move(a);
  e.sig = std::move(sig);
  return make(std::move(e));
}
ExprPtr Expr::isa(ExprPtr a, ExprPtr b) {
  Expr e;
  e.k = K::Isa;
  e.a = std::move(a);
  e.b = std::move(b);
  return make(std::move(e));
}

ExprPtr desugar(const ExprPtr& e) {
  switch (e->k) {
    case Expr::K::Ref:
      return e;
    case Expr::K::Union:
      return Expr::union_(desugar(e->a), desugar(e->b));
    case Expr::K::Close:
      return Expr::close(desugar(e->a), e->sig);
    case Expr::K::CloseHiding:
      return Expr::close_hiding(desugar(e->a), e->hide);
    case Expr::K::Delete:
      return Expr::del(desugar(e->a), *e->sig);
    case Expr::K::Rename:
      return Expr::rename(e->rho, desugar(e->a));
    case Expr::K::Export:  // sigma □ M = close(M, sigma)
      return Expr::close(desugar(e->a), e->sig);
    case Expr::K::Import:  // M << N = M ∪ close(N)
      return Expr::union_(desugar(e->a), Expr::close(desugar(e->b)));
    case Expr::K::Instantiate:  // M[N,rho] = rho(M) ∪ close(N)
      return Expr::union_(Expr::rename(e->rho, desugar(e->a)),
                          Expr::close(desugar(e->b)));
    case Expr::K::Abstract:  // M[sigma] = M \ sigma
      return Expr::del(desugar(e->a), *e->sig);
    case Expr::K::Isa:  // resolved while flattening (needs exp of lhs)
      return Expr::isa(desugar(e->a), desugar(e->b));
  }
  return e;
}

namespace {

std::string renaming_to_string(const Renaming& rho) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& [from, to] : rho.entries()) {
    if (!first) os << ", ";
    os << from.display() << " -> " << to.display();
    first = false;
  }
  os << '}';
  return os.str();
}

std::string ctors_to_string(const std::set<SymbolRef>& cs) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const SymbolRef& c : cs) {
    if (!first) os << ", ";
    os << c.display();
    first = false;
  }
  os << '}';
  return os.str();
}

// precedence: 0 isa, 1 union, 2 postfix deletion, 3 primary
int level_of(const Expr& e) {
  switch (e.k) {
    case Expr::K::Isa:
      return 0;
    case Expr::K::Union:
      return 1;
    case Expr::K::Delete:
    case Expr::K::Abstract:
      return 2;
    default:
      return 3;
  }
}

void print_expr(std::ostringstream& os, const ExprPtr& e, int min_level) {
  bool parens = level_of(*e) < min_level;
  if (parens) os << '(';
  switch (e->k) {
    case Expr::K::Ref:
      os << e->name;
      break;
    case Expr::K::Union:
      print_expr(os, e->a, 1);
      os << " + ";
      print_expr(os, e->b, 2);
      break;
    case Expr::K::Delete:
      print_expr(os, e->a, 2);
      os << " \\ " << to_string(*e->sig);
      break;
    case Expr::K::Rename:
      os << renaming_to_string(e->rho) << '(';
      print_expr(os, e->a, 0);
      os << ')';
      break;
    case Expr::K::Close:
      os << "close(";
      print_expr(os, e->a, 0);
      if (e->sig) os << ", " << to_string(*e->sig);
      os << ')';
      break;
    case Expr::K::CloseHiding:
      os << "closeH(";
      print_expr(os, e->a, 0);
      os << ", " << ctors_to_string(e->hide) << ')';
      break;
    case Expr::K::Export:
      os << "export(" << to_string(*e->sig) << ", ";
      print_expr(os, e->a, 0);
      os << ')';
      break;
    case Expr::K::Import:
      os << "import(";
      print_expr(os, e->a, 0);
      os << ", ";
      print_expr(os, e->b, 0);
      os << ')';
      break;
    case Expr::K::Instantiate:
      os << "inst(";
      print_expr(os, e->a, 0);
      os << ", ";
      print_expr(os, e->b, 0);
      os << ", " << renaming_to_string(e->rho) << ')';
      break;
    case Expr::K::Abstract:
      os << "abstract(";
      print_expr(os, e->a, 0);
      os << ", " << to_string(*e->sig) << ')';
      break;
    case Expr::K::Isa:
      print_expr(os, e->a, 1);
      os << " isa ";
      print_expr(os, e->b, 1);
      break;
  }
  if (parens) os << ')';
}

}  // namespace

std::string to_string(const ExprPtr& e) {
  std::ostringstream os;
  print_expr(os, e, 0);
  return os.str();
}

std::string canonical_label(const ExprPtr& e) { return to_string(desugar(e)); }

void FlattenEnv::define(const std::string& name, Module m) {
  if (known(name)) throw Error("duplicate module definition: " + name);
  modules.emplace(name, std::move(m));
}

void FlattenEnv::define(const std::string& name, ExprPtr e) {
  if (known(name)) throw Error("duplicate module definition: " + name);
  bindings.emplace(name, std::move(e));
}

// flatten_materialized lives in structured.cpp: constructor hiding
// materializes through the structured engine.

}  // namespace crwl
