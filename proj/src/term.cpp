#include "crwl/term.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace crwl {

// ---------------------------------------------------------------- symbols

static bool plain_identifier(const std::string& s) {
  if (s.empty() || !std::isalpha((unsigned char)s[0])) return false;
  for (char c : s)
    if (!std::isalnum((unsigned char)c) && c != '_') return false;
  return true;
}

std::string SymbolRef::display() const {
  std::string out;
  if (labeled()) {
    if (plain_identifier(label))
      out += label;
    else
      out += "\"" + label + "\"";
    out += ".";
  }
  out += name;
  out += "/" + std::to_string(arity);
  return out;
}

void Signature::add(const SymbolRef& s) {
  auto key = std::make_pair(s.label, s.name);
  auto it = by_name_.find(key);
  if (it == by_name_.end()) {
    by_name_.emplace(key, s);
    return;
  }
  if (!(it->second == s))
    throw Error("symbol clash: " + s.display() + " vs " + it->second.display());
}

void Signature::merge(const Signature& other) {
  for (const auto& [k, s] : other.by_name_) add(s);
}

bool Signature::contains(const SymbolRef& s) const {
  auto it = by_name_.find({s.label, s.name});
  return it != by_name_.end() && it->second == s;
}

std::optional<SymbolRef> Signature::lookup(const std::string& name,
                                           const std::string& label) const {
  auto it = by_name_.find({label, name});
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::vector<SymbolRef> Signature::constructors() const {
  std::vector<SymbolRef> out;
  for (const auto& [k, s] : by_name_)
    if (s.is_constructor()) out.push_back(s);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SymbolRef> Signature::functions() const {
  std::vector<SymbolRef> out;
  for (const auto& [k, s] : by_name_)
    if (s.is_function()) out.push_back(s);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SymbolRef> Signature::all() const {
  std::vector<SymbolRef> out;
  for (const auto& [k, s] : by_name_) out.push_back(s);
  std::sort(out.begin(), out.end());
  return out;
}

// -------------------------------------------------------------- variables

namespace {
struct VarTable {
  std::mutex mu;
  std::vector<std::string> names;
  std::unordered_map<std::string, VarId> ids;
};
VarTable& var_table() {
  static VarTable t;
  return t;
}
}  // namespace

VarId intern_var(std::string_view name) {
  auto& t = var_table();
  std::lock_guard<std::mutex> lock(t.mu);
  std::string key(name);
  auto it = t.ids.find(key);
  if (it != t.ids.end()) return it->second;
  VarId id = (VarId)t.names.size();
  t.names.push_back(key);
  t.ids.emplace(std::move(key), id);
  return id;
}

const std::string& var_name(VarId v) {
  auto& t = var_table();
  std::lock_guard<std::mutex> lock(t.mu);
  return t.names.at((size_t)v);
}

// ------------------------------------------------------------------ terms

static size_t mix(size_t h, size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

const Term& Term::bottom() {
  static Term b{std::make_shared<const Node>(
      Node{Tag::Bottom, -1, {}, {}, 0x0b0770 /*hash*/, 0, true, false, false})};
  return b;
}

Term Term::var(VarId v) {
  Node n;
  n.tag = Tag::Var;
  n.var = v;
  n.hash = mix(0x7a5, std::hash<std::string>{}(var_name(v)));
  n.depth = 0;
  n.cterm = true;
  n.total = true;
  return Term(std::make_shared<const Node>(std::move(n)));
}

Term Term::app(SymbolRef sym, std::vector<Term> args) {
  if ((int)args.size() != sym.arity)
    throw Error("arity mismatch constructing " + sym.display() + ": got " +
                std::to_string(args.size()) + " arguments");
  Node n;
  n.tag = Tag::App;
  size_t h = mix(std::hash<std::string>{}(sym.name),
                 mix(std::hash<std::string>{}(sym.label),
                     (size_t)sym.arity * 2 + (sym.kind == Kind::Function)));
  n.depth = 0;
  n.cterm = sym.is_constructor();
  n.total = true;
  n.labeled = sym.labeled();
  for (const Term& a : args) {
    h = mix(h, a.hash());
    n.depth = std::max(n.depth, 1 + a.depth());
    n.cterm = n.cterm && a.is_cterm();
    n.total = n.total && a.is_total();
    n.labeled = n.labeled || a.has_labeled_symbol();
  }
  n.hash = h;
  n.sym = std::move(sym);
  n.args = std::move(args);
  return Term(std::make_shared<const Node>(std::move(n)));
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.tag() != b.tag()) return false;
  switch (a.tag()) {
    case Term::Tag::Bottom:
      return true;
    case Term::Tag::Var:
      return a.var_id() == b.var_id();
    case Term::Tag::App: {
      if (!(a.symbol() == b.symbol())) return false;
      for (size_t i = 0; i < a.args().size(); ++i)
        if (!(a.args()[i] == b.args()[i])) return false;
      return true;
    }
  }
  return false;
}

void Term::vars_into(std::set<VarId>& out) const {
  switch (tag()) {
    case Tag::Bottom:
      return;
    case Tag::Var:
      out.insert(var_id());
      return;
    case Tag::App:
      for (const Term& a : args()) a.vars_into(out);
  }
}

std::set<VarId> Term::vars() const {
  std::set<VarId> out;
  vars_into(out);
  return out;
}

void Term::vars_in_order(std::vector<VarId>& out, std::set<VarId>& seen) const {
  switch (tag()) {
    case Tag::Bottom:
      return;
    case Tag::Var:
      if (seen.insert(var_id()).second) out.push_back(var_id());
      return;
    case Tag::App:
      for (const Term& a : args()) a.vars_in_order(out, seen);
  }
}

int term_compare(const Term& a, const Term& b) {
  if (a.tag() != b.tag()) return (int)a.tag() < (int)b.tag() ? -1 : 1;
  switch (a.tag()) {
    case Term::Tag::Bottom:
      return 0;
    case Term::Tag::Var: {
      if (a.var_id() == b.var_id()) return 0;
      return var_name(a.var_id()) < var_name(b.var_id()) ? -1 : 1;
    }
    case Term::Tag::App: {
      const SymbolRef& sa = a.symbol();
      const SymbolRef& sb = b.symbol();
      if (!(sa == sb)) return sa < sb ? -1 : 1;
      for (size_t i = 0; i < a.args().size(); ++i)
        if (int c = term_compare(a.args()[i], b.args()[i])) return c;
      return 0;
    }
  }
  return 0;
}

bool approx_le(const Term& s, const Term& t) {
  if (!s.is_cterm() || !t.is_cterm())
    throw Error("approx_le requires constructor terms");
  if (s.is_bottom()) return true;
  if (s.is_var()) return t.is_var() && s.var_id() == t.var_id();
  if (!t.is_app() || !(s.symbol() == t.symbol())) return false;
  for (size_t i = 0; i < s.args().size(); ++i)
    if (!approx_le(s.args()[i], t.args()[i])) return false;
  return true;
}

// ----------------------------------------------------------- substitution

void CSubst::bind(VarId v, Term t) {
  if (!t.is_cterm())
    throw Error("C-substitution image must be a constructor term: " +
                to_string(t));
  bindings_[v] = std::move(t);
}

const Term& CSubst::lookup(VarId v) const {
  auto it = bindings_.find(v);
  if (it != bindings_.end()) return it->second;
  // identity outside the domain
  thread_local std::map<VarId, Term> idcache;
  auto [jt, inserted] = idcache.try_emplace(v, Term::bottom());
  if (inserted) jt->second = Term::var(v);
  return jt->second;
}

bool CSubst::total() const {
  for (const auto& [v, t] : bindings_)
    if (!t.is_total()) return false;
  return true;
}

Term apply_subst(const Term& t, const CSubst& theta) {
  switch (t.tag()) {
    case Term::Tag::Bottom:
      return t;
    case Term::Tag::Var:
      return theta.lookup(t.var_id());
    case Term::Tag::App: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      bool changed = false;
      for (const Term& a : t.args()) {
        args.push_back(apply_subst(a, theta));
        changed = changed || !(args.back() == a);
      }
      if (!changed) return t;
      return Term::app(t.symbol(), std::move(args));
    }
  }
  return t;
}

int statement_compare(const Statement& a, const Statement& b) {
  if (a.kind != b.kind) return (int)a.kind < (int)b.kind ? -1 : 1;
  if (int c = term_compare(a.lhs, b.lhs)) return c;
  return term_compare(a.rhs, b.rhs);
}

// ------------------------------------------------------------------ rules

std::set<VarId> Rule::vars() const {
  std::set<VarId> out;
  for (const Term& p : patterns) p.vars_into(out);
  rhs.vars_into(out);
  for (const Statement& c : conditions) {
    c.lhs.vars_into(out);
    c.rhs.vars_into(out);
  }
  return out;
}

void Rule::validate() const {
  if (!head.is_function())
    throw Error("rule head must be a function symbol: " + head.display());
  if ((int)patterns.size() != head.arity)
    throw Error("rule head arity mismatch for " + head.display());
  std::set<VarId> seen;
  for (const Term& p : patterns) {
    if (!p.is_cterm() || !p.is_total())
      throw Error("rule patterns must be total constructor terms: " +
                  to_string(lhs_term()));
    std::vector<VarId> order;
    std::set<VarId> local;
    p.vars_in_order(order, local);
    for (VarId v : order)
      if (!seen.insert(v).second)
        throw Error("non-linear left-hand side: " + to_string(lhs_term()));
  }
  if (rhs.is_bottom()) throw Error("rule right-hand side may not be bottom");
  for (const Statement& c : conditions) {
    if (c.kind != Statement::Kind::Joinability)
      throw Error("rule conditions must be joinability statements");
    if (!c.lhs.is_total() || !c.rhs.is_total())
      throw Error("rule conditions may not contain bottom: " + to_string(c));
  }
}

namespace {

Rule substituted(const Rule& r, const CSubst& theta) {
  Rule out;
  out.head = r.head;
  for (const Term& p : r.patterns) out.patterns.push_back(apply_subst(p, theta));
  out.rhs = apply_subst(r.rhs, theta);
  for (const Statement& c : r.conditions)
    out.conditions.push_back({c.kind, apply_subst(c.lhs, theta),
                              apply_subst(c.rhs, theta)});
  return out;
}

}  // namespace

Rule canonical_rule(const Rule& r) {
  // Pass 1: number variables occurring in patterns and rhs.
  std::vector<VarId> order;
  std::set<VarId> seen;
  for (const Term& p : r.patterns) p.vars_in_order(order, seen);
  r.rhs.vars_in_order(order, seen);

  CSubst ren;
  int next = 1;
  auto fresh = [&next]() { return Term::var("V" + std::to_string(next++)); };
  for (VarId v : order) ren.bind(v, fresh());

  // Pass 2: order conditions; condition-only variables are numbered as the
  // sorted order reaches them, so alpha-variants agree.
  std::vector<Statement> pending = r.conditions;
  std::vector<Statement> conds;
  while (!pending.empty()) {
    size_t best = 0;
    Statement best_img = {pending[0].kind, apply_subst(pending[0].lhs, ren),
                          apply_subst(pending[0].rhs, ren)};
    for (size_t i = 1; i < pending.size(); ++i) {
      Statement img = {pending[i].kind, apply_subst(pending[i].lhs, ren),
                       apply_subst(pending[i].rhs, ren)};
      if (statement_compare(img, best_img) < 0) {
        best = i;
        best_img = img;
      }
    }
    // Number any still-unbound variables of the chosen condition.
    std::vector<VarId> corder;
    std::set<VarId> cseen;
    pending[best].lhs.vars_in_order(corder, cseen);
    pending[best].rhs.vars_in_order(corder, cseen);
    for (VarId v : corder)
      if (!ren.bound(v)) ren.bind(v, fresh());
    conds.push_back({pending[best].kind, apply_subst(pending[best].lhs, ren),
                     apply_subst(pending[best].rhs, ren)});
    pending.erase(pending.begin() + (long)best);
  }

  Rule out = substituted(r, ren);
  out.conditions = std::move(conds);
  return out;
}

int rule_compare(const Rule& a, const Rule& b) {
  Rule ca = canonical_rule(a), cb = canonical_rule(b);
  if (!(ca.head == cb.head)) return ca.head < cb.head ? -1 : 1;
  if (int c = term_compare(ca.lhs_term(), cb.lhs_term())) return c;
  if (int c = term_compare(ca.rhs, cb.rhs)) return c;
  if (ca.conditions.size() != cb.conditions.size())
    return ca.conditions.size() < cb.conditions.size() ? -1 : 1;
  for (size_t i = 0; i < ca.conditions.size(); ++i)
    if (int c = statement_compare(ca.conditions[i], cb.conditions[i])) return c;
  return 0;
}

bool rule_equal(const Rule& a, const Rule& b) { return rule_compare(a, b) == 0; }

std::vector<Rule> canonical_rules(std::vector<Rule> rules) {
  std::vector<Rule> canon;
  canon.reserve(rules.size());
  for (const Rule& r : rules) canon.push_back(canonical_rule(r));
  std::sort(canon.begin(), canon.end(),
            [](const Rule& a, const Rule& b) { return rule_compare(a, b) < 0; });
  canon.erase(std::unique(canon.begin(), canon.end(),
                          [](const Rule& a, const Rule& b) {
                            return rule_compare(a, b) == 0;
                          }),
              canon.end());
  return canon;
}

// -------------------------------------------------------------- renamings

void Renaming::add(const SymbolRef& from, const SymbolRef& to) {
  if (!from.is_function() || !to.is_function())
    throw Error("renaming may only map function symbols: " + from.display() +
                " -> " + to.display());
  if (from.arity != to.arity)
    throw Error("renaming must preserve arity: " + from.display() + " -> " +
                to.display());
  if (from == to) return;
  auto [it, inserted] = map_.emplace(from, to);
  if (!inserted && !(it->second == to))
    throw Error("conflicting renaming entries for " + from.display());
}

const SymbolRef& Renaming::apply(const SymbolRef& s) const {
  auto it = map_.find(s);
  return it == map_.end() ? s : it->second;
}

bool Renaming::injective() const {
  std::set<SymbolRef> affected;
  for (const auto& [from, to] : map_) {
    affected.insert(from);
    affected.insert(to);
  }
  std::set<SymbolRef> images;
  for (const SymbolRef& s : affected)
    if (!images.insert(apply(s)).second) return false;
  return true;
}

Renaming Renaming::compose_after(const Renaming& inner) const {
  Renaming out;
  std::set<SymbolRef> domain;
  for (const auto& [from, to] : inner.map_) domain.insert(from);
  for (const auto& [from, to] : map_) domain.insert(from);
  for (const SymbolRef& s : domain) {
    SymbolRef img = apply(inner.apply(s));
    if (!(img == s)) out.map_.emplace(s, img);
  }
  return out;
}

std::vector<SymbolRef> Renaming::preimages(const SymbolRef& f,
                                           const FnSig& domain) const {
  std::set<SymbolRef> candidates(domain.begin(), domain.end());
  for (const auto& [from, to] : map_) candidates.insert(from);
  std::vector<SymbolRef> out;
  for (const SymbolRef& g : candidates)
    if (apply(g) == f) out.push_back(g);
  return out;
}

Term rename_term(const Renaming& rho, const Term& t) {
  if (!t.is_app()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const Term& a : t.args()) args.push_back(rename_term(rho, a));
  const SymbolRef& sym =
      t.symbol().is_function() ? rho.apply(t.symbol()) : t.symbol();
  return Term::app(sym, std::move(args));
}

Statement rename_statement(const Renaming& rho, const Statement& s) {
  return {s.kind, rename_term(rho, s.lhs), rename_term(rho, s.rhs)};
}

Rule rename_rule(const Renaming& rho, const Rule& r) {
  Rule out;
  out.head = rho.apply(r.head);
  out.patterns = r.patterns;  // patterns are constructor terms
  out.rhs = rename_term(rho, r.rhs);
  for (const Statement& c : r.conditions)
    out.conditions.push_back(rename_statement(rho, c));
  return out;
}

FnSig rename_sig(const Renaming& rho, const FnSig& sig) {
  FnSig out;
  for (const SymbolRef& s : sig) out.insert(rho.apply(s));
  return out;
}

// ------------------------------------------------------ canonical rewrite

std::pair<Rule, CSubst> make_crr(const SymbolRef& head,
                                 const std::vector<Term>& args,
                                 const Term& rhs) {
  if (rhs.is_bottom()) throw Error("crr right-hand side may not be bottom");
  if ((int)args.size() != head.arity)
    throw Error("crr arity mismatch for " + head.display());
  for (const Term& a : args)
    if (!a.is_cterm()) throw Error("crr arguments must be constructor terms");
  if (!rhs.is_cterm())
    throw Error("crr right-hand side must be a constructor term");

  std::set<std::string> used;
  for (const Term& a : args)
    for (VarId v : a.vars()) used.insert(var_name(v));
  for (VarId v : rhs.vars()) used.insert(var_name(v));

  auto fresh_named = [&used](const std::string& base) {
    if (!used.count(base)) {
      used.insert(base);
      return Term::var(base);
    }
    for (int i = 1;; ++i) {
      std::string cand = base + std::to_string(i);
      if (!used.count(cand)) {
        used.insert(cand);
        return Term::var(cand);
      }
    }
  };

  CSubst back;  // fresh variable -> what it replaced
  std::vector<Statement> pair_conds;
  std::set<VarId> covered;
  std::set<VarId> seen_vars;
  std::map<VarId, int> occurrences;
  // Count occurrences first so single-occurrence variables are known.
  std::function<void(const Term&)> count = [&](const Term& t) {
    if (t.is_var())
      occurrences[t.var_id()]++;
    else if (t.is_app())
      for (const Term& a : t.args()) count(a);
  };
  for (const Term& a : args) count(a);

  std::function<Term(const Term&)> walk = [&](const Term& t) -> Term {
    switch (t.tag()) {
      case Term::Tag::Bottom: {
        Term v = fresh_named("V");
        back.bind(v.var_id(), Term::bottom());
        return v;
      }
      case Term::Tag::Var: {
        if (seen_vars.insert(t.var_id()).second) return t;  // first occurrence
        Term v = fresh_named(var_name(t.var_id()));
        back.bind(v.var_id(), t);
        pair_conds.push_back(Statement::joinability(v, t));
        covered.insert(v.var_id());
        covered.insert(t.var_id());
        return v;
      }
      case Term::Tag::App: {
        std::vector<Term> as;
        as.reserve(t.args().size());
        for (const Term& a : t.args()) as.push_back(walk(a));
        return Term::app(t.symbol(), std::move(as));
      }
    }
    return t;
  };

  Rule rule;
  rule.head = head;
  for (const Term& a : args) rule.patterns.push_back(walk(a));
  rule.rhs = rhs;
  rule.conditions = std::move(pair_conds);

  // X >< X for single-occurrence pattern variables, then rhs variables.
  std::vector<VarId> porder;
  std::set<VarId> pseen;
  for (const Term& a : args) a.vars_in_order(porder, pseen);
  for (VarId v : porder)
    if (occurrences[v] == 1 && covered.insert(v).second)
      rule.conditions.push_back(
          Statement::joinability(Term::var(v), Term::var(v)));
  std::vector<VarId> rorder;
  std::set<VarId> rseen;
  rhs.vars_in_order(rorder, rseen);
  for (VarId v : rorder)
    if (covered.insert(v).second)
      rule.conditions.push_back(
          Statement::joinability(Term::var(v), Term::var(v)));

  rule.validate();
  return {std::move(rule), std::move(back)};
}

// --------------------------------------------------------------- printing

namespace {

bool infix_symbol(const SymbolRef& s) {
  return s.arity == 2 && s.name.size() >= 3 && s.name.front() == '_' &&
         s.name.back() == '_' && !s.labeled();
}

std::string infix_token(const SymbolRef& s) {
  return s.name.substr(1, s.name.size() - 2);
}

bool cons_symbol(const SymbolRef& s) {
  return s.name == "|" && s.arity == 2 && !s.labeled() && s.is_constructor();
}
bool nil_symbol(const SymbolRef& s) {
  return s.name == "[]" && s.arity == 0 && !s.labeled() && s.is_constructor();
}

void print_term(std::ostream& os, const Term& t, bool infix_operand);

void print_symbol_name(std::ostream& os, const SymbolRef& s) {
  if (s.labeled()) {
    if (plain_identifier(s.label))
      os << s.label;
    else
      os << '"' << s.label << '"';
    os << '.';
  }
  os << s.name;
}

void print_list(std::ostream& os, const Term& t) {
  os << '[';
  const Term* cur = &t;
  bool first = true;
  while (cur->is_app() && cons_symbol(cur->symbol())) {
    if (!first) os << ',';
    print_term(os, cur->args()[0], false);
    first = false;
    cur = &cur->args()[1];
  }
  if (!(cur->is_app() && nil_symbol(cur->symbol()))) {
    os << '|';
    print_term(os, *cur, false);
  }
  os << ']';
}

void print_term(std::ostream& os, const Term& t, bool infix_operand) {
  switch (t.tag()) {
    case Term::Tag::Bottom:
      os << "_|_";
      return;
    case Term::Tag::Var:
      os << var_name(t.var_id());
      return;
    case Term::Tag::App: {
      const SymbolRef& s = t.symbol();
      if (nil_symbol(s) || cons_symbol(s)) {
        print_list(os, t);
        return;
      }
      if (infix_symbol(s)) {
        if (infix_operand) os << '(';
        print_term(os, t.args()[0], false);
        os << ' ' << infix_token(s) << ' ';
        print_term(os, t.args()[1], true);  // left-assoc: parenthesize right
        if (infix_operand) os << ')';
        return;
      }
      print_symbol_name(os, s);
      if (s.arity > 0) {
        os << '(';
        for (int i = 0; i < s.arity; ++i) {
          if (i) os << ',';
          print_term(os, t.args()[(size_t)i], false);
        }
        os << ')';
      }
      return;
    }
  }
}

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  print_term(os, t, false);
  return os.str();
}

std::string to_string(const Statement& s) {
  std::ostringstream os;
  print_term(os, s.lhs, false);
  os << (s.kind == Statement::Kind::Reduction ? " -> " : " >< ");
  print_term(os, s.rhs, false);
  return os.str();
}

std::string to_string(const Rule& r) {
  std::ostringstream os;
  print_term(os, r.lhs_term(), false);
  os << " -> ";
  print_term(os, r.rhs, false);
  if (!r.conditions.empty()) {
    os << " <= ";
    for (size_t i = 0; i < r.conditions.size(); ++i) {
      if (i) os << ", ";
      os << to_string(r.conditions[i]);
    }
  }
  os << '.';
  return os.str();
}

std::string to_string(const FnSig& sig) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const SymbolRef& s : sig) {
    if (!first) os << ", ";
    os << s.display();
    first = false;
  }
  os << '}';
  return os.str();
}

}  // namespace crwl
