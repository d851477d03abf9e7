#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Core vocabulary: signatures, partial constructor/function terms over a
// global signature with bottom, C-substitutions, function-symbol renamings,
// conditional rewrite rules and their canonical form.

namespace crwl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A resource limit was exceeded; `estimate` describes the offending count.
struct CapError : Error {
  CapError(const std::string& what, const std::string& estimate)
      : Error(what + " (estimate: " + estimate + ")"), estimate(estimate) {}
  std::string estimate;
};

enum class Kind : uint8_t { Constructor, Function };

// A symbol is identified by (name, arity, kind, label). `label` is empty for
// visible symbols; hidden symbols of structured modules carry the canonical
// module-expression string they belong to.
struct SymbolRef {
  std::string name;
  int arity = 0;
  Kind kind = Kind::Constructor;
  std::string label;

  bool labeled() const { return !label.empty(); }
  bool is_constructor() const { return kind == Kind::Constructor; }
  bool is_function() const { return kind == Kind::Function; }

  // Printed form: name/arity, label-qualified when hidden.
  std::string display() const;

  friend bool operator==(const SymbolRef& a, const SymbolRef& b) {
    return a.name == b.name && a.arity == b.arity && a.kind == b.kind &&
           a.label == b.label;
  }
  friend bool operator<(const SymbolRef& a, const SymbolRef& b) {
    if (a.label != b.label) return a.label < b.label;
    if (a.name != b.name) return a.name < b.name;
    if (a.arity != b.arity) return a.arity < b.arity;
    return a.kind < b.kind;
  }
};

inline SymbolRef ctor(std::string name, int arity, std::string label = "") {
  return SymbolRef{std::move(name), arity, Kind::Constructor, std::move(label)};
}
inline SymbolRef func(std::string name, int arity, std::string label = "") {
  return SymbolRef{std::move(name), arity, Kind::Function, std::move(label)};
}

// A set of function symbols (deletion/closure/export arguments).
using FnSig = std::set<SymbolRef>;

// A two-sided signature. Names are unique across both sides: the same name
// may not denote two kinds or two arities.
class Signature {
 public:
  void add(const SymbolRef& s);
  void merge(const Signature& other);
  bool contains(const SymbolRef& s) const;
  std::optional<SymbolRef> lookup(const std::string& name,
                                  const std::string& label = "") const;
  std::vector<SymbolRef> constructors() const;
  std::vector<SymbolRef> functions() const;
  std::vector<SymbolRef> all() const;
  bool empty() const { return by_name_.empty(); }

 private:
  // keyed by (label, name)
  std::map<std::pair<std::string, std::string>, SymbolRef> by_name_;
};

// Variables are interned integers with a printable name table.
using VarId = int32_t;
VarId intern_var(std::string_view name);
const std::string& var_name(VarId v);

class CSubst;

// Immutable partial term: Bottom, Variable, or application. Structure is
// shared; equality is structural with a cached hash.
class Term {
 public:
  enum class Tag : uint8_t { Bottom, Var, App };

  Term() : Term(bottom()) {}
  static const Term& bottom();
  static Term var(VarId v);
  static Term var(std::string_view name) { return var(intern_var(name)); }
  static Term app(SymbolRef sym, std::vector<Term> args = {});

  Tag tag() const { return node_->tag; }
  bool is_bottom() const { return tag() == Tag::Bottom; }
  bool is_var() const { return tag() == Tag::Var; }
  bool is_app() const { return tag() == Tag::App; }
  VarId var_id() const { return node_->var; }
  const SymbolRef& symbol() const { return node_->sym; }
  std::span<const Term> args() const { return node_->args; }

  bool is_cterm() const { return node_->cterm; }  // no function symbols
  bool is_total() const { return node_->total; }  // no bottom
  int depth() const { return node_->depth; }
  size_t hash() const { return node_->hash; }
  bool has_labeled_symbol() const { return node_->labeled; }

  void vars_into(std::set<VarId>& out) const;
  std::set<VarId> vars() const;
  // Variables in first-occurrence (left-to-right, depth-first) order.
  void vars_in_order(std::vector<VarId>& out, std::set<VarId>& seen) const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  struct Node {
    Tag tag;
    VarId var = -1;
    SymbolRef sym;
    std::vector<Term> args;
    size_t hash = 0;
    int depth = 0;
    bool cterm = true;
    bool total = true;
    bool labeled = false;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct TermHash {
  size_t operator()(const Term& t) const { return t.hash(); }
};

// Total order on terms: Bottom < Var < App; variables by name; applications
// by (label, name, arity, kind), then arguments lexicographically. This is a
// linear extension of the approximation ordering.
int term_compare(const Term& a, const Term& b);
struct TermLess {
  bool operator()(const Term& a, const Term& b) const {
    return term_compare(a, b) < 0;
  }
};

// Approximation ordering on partial cterms: bottom below everything,
// variables reflexive only, constructors lifted componentwise.
bool approx_le(const Term& s, const Term& t);

// A substitution binding variables to partial cterms; identity outside the
// binding domain.
class CSubst {
 public:
  CSubst() = default;
  void bind(VarId v, Term t);
  void bind(std::string_view name, Term t) { bind(intern_var(name), t); }
  const Term& lookup(VarId v) const;  // identity default
  bool bound(VarId v) const { return bindings_.count(v) != 0; }
  bool total() const;  // every image is total
  size_t size() const { return bindings_.size(); }
  const std::map<VarId, Term>& bindings() const { return bindings_; }

 private:
  std::map<VarId, Term> bindings_;
};

Term apply_subst(const Term& t, const CSubst& theta);

// Reduction (a -> b) or joinability (a >< b) statement.
struct Statement {
  enum class Kind : uint8_t { Reduction, Joinability };
  Kind kind = Kind::Reduction;
  Term lhs, rhs;

  static Statement reduction(Term a, Term b) {
    return {Kind::Reduction, std::move(a), std::move(b)};
  }
  static Statement joinability(Term a, Term b) {
    return {Kind::Joinability, std::move(a), std::move(b)};
  }
  friend bool operator==(const Statement& a, const Statement& b) {
    return a.kind == b.kind && a.lhs == b.lhs && a.rhs == b.rhs;
  }
};
int statement_compare(const Statement& a, const Statement& b);
struct StatementLess {
  bool operator()(const Statement& a, const Statement& b) const {
    return statement_compare(a, b) < 0;
  }
};

// Conditional rewrite rule f(patterns) -> rhs <= conditions. Patterns are
// total linear cterms; the rhs is not literally bottom; condition terms are
// total. Bottom may occur strictly inside the rhs of materialized rules.
struct Rule {
  SymbolRef head;
  std::vector<Term> patterns;
  Term rhs;
  std::vector<Statement> conditions;  // joinability only

  Term lhs_term() const { return Term::app(head, patterns); }
  std::set<VarId> vars() const;
  void validate() const;  // throws Error on invariant violation
};

// Alpha-renames rule variables to V1..Vn by first occurrence and sorts the
// condition list; two rules are considered equal when their canonical forms
// coincide.
Rule canonical_rule(const Rule& r);
int rule_compare(const Rule& a, const Rule& b);
bool rule_equal(const Rule& a, const Rule& b);

// Canonicalize, sort and deduplicate a rule set.
std::vector<Rule> canonical_rules(std::vector<Rule> rules);

// Function symbol renaming: arity-preserving map on function symbols,
// identity outside its domain. Constructors are never mapped.
class Renaming {
 public:
  Renaming() = default;
  void add(const SymbolRef& from, const SymbolRef& to);
  const SymbolRef& apply(const SymbolRef& s) const;
  bool injective() const;
  bool identity() const { return map_.empty(); }
  const std::map<SymbolRef, SymbolRef>& entries() const { return map_; }
  // this ∘ inner: apply inner first.
  Renaming compose_after(const Renaming& inner) const;
  // Preimages of f under this renaming, restricted to `domain` plus the
  // renaming's own domain.
  std::vector<SymbolRef> preimages(const SymbolRef& f,
                                   const FnSig& domain) const;

 private:
  std::map<SymbolRef, SymbolRef> map_;
};

Term rename_term(const Renaming& rho, const Term& t);
Statement rename_statement(const Renaming& rho, const Statement& s);
Rule rename_rule(const Renaming& rho, const Rule& r);
FnSig rename_sig(const Renaming& rho, const FnSig& sig);

// Canonical rewrite rule crr(head(args), rhs) together with the companion
// substitution mapping the fresh variables back (bottom-substituting fresh
// variables map to bottom).
std::pair<Rule, CSubst> make_crr(const SymbolRef& head,
                                 const std::vector<Term>& args,
                                 const Term& rhs);

// Canonical text forms. Bottom prints `_|_`, lists print with [..] sugar,
// binary `_op_` symbols print infix.
std::string to_string(const Term& t);
std::string to_string(const Statement& s);
std::string to_string(const Rule& r);
std::string to_string(const FnSig& sig);

}  // namespace crwl
