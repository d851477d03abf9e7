#pragma once

#include <functional>
#include <random>

#include "crwl/universe.hpp"

namespace crwl {

// A bounded CRWL-term algebra: per function symbol a monotone cone-valued
// table over tuples of universe terms. Constructor symbols keep their fixed
// ideal interpretation and are never stored. Symbols without a table are
// read as everywhere-bottom.
class Algebra {
 public:
  struct Table {
    int arity = 0;
    std::vector<Bits> cones;  // dense, |U|^arity entries, mixed-radix indexed
  };

  Algebra() = default;
  explicit Algebra(UniversePtr u) : universe_(std::move(u)) {}

  static Algebra bottom(UniversePtr u, const FnSig& funcs);
  // Full-universe cones on `sigma`, bottom elsewhere (over `funcs`).
  static Algebra top(UniversePtr u, const FnSig& funcs, const FnSig& sigma);

  const UniversePtr& universe() const { return universe_; }
  FnSig signature() const;
  bool has(const SymbolRef& f) const { return tables_.count(f) != 0; }
  const std::map<SymbolRef, Table>& tables() const { return tables_; }

  size_t tuple_count(int arity) const;
  size_t tuple_index(const std::vector<size_t>& tuple) const;
  std::vector<size_t> tuple_at(size_t flat, int arity) const;

  const Bits& cone(const SymbolRef& f, size_t flat_tuple) const;
  const Bits& cone(const SymbolRef& f, const std::vector<size_t>& tuple) const;
  Bits cone_of_terms(const SymbolRef& f, const std::vector<Term>& args) const;

  void ensure_table(const SymbolRef& f);
  void or_into(const SymbolRef& f, size_t flat_tuple, const Bits& add);
  void set_cone(const SymbolRef& f, size_t flat_tuple, Bits value);

  // Invariant checks: every entry a cone, tables monotone in the tuple order.
  bool well_formed() const;

  bool le(const Algebra& other) const;  // pointwise inclusion
  friend bool operator==(const Algebra& a, const Algebra& b);
  friend bool operator!=(const Algebra& a, const Algebra& b) {
    return !(a == b);
  }
  // Total order for storing algebras in sets; same universe assumed.
  static int compare(const Algebra& a, const Algebra& b);

 private:
  const Bits& bottom_ref() const;
  UniversePtr universe_;
  std::map<SymbolRef, Table> tables_;
};

// Lattice operations (same universe required).
Algebra join(const Algebra& a, const Algebra& b);
Algebra meet(const Algebra& a, const Algebra& b);
Algebra restrict_to(const Algebra& a, const FnSig& sigma);
Algebra apply_rho(const Algebra& a, const Renaming& rho);
Algebra apply_rho_inv(const Algebra& a, const Renaming& rho);

// Cone-valued evaluation of a term under a substitution-as-valuation.
// Results falling outside the universe are dropped (under-approximation).
Bits eval_term(const Algebra& a, const Term& e, const CSubst& theta);
bool satisfies(const Algebra& a, const Statement& phi, const CSubst& theta);

// Function symbols appearing in a rule set (heads and invocations).
FnSig rule_functions(const std::vector<Rule>& rules);
FnSig rule_heads(const std::vector<Rule>& rules);
Signature rule_constructors(const std::vector<Rule>& rules);

// Universe-restricted constructor instances of a rule, in deterministic
// order. Instances need not satisfy program-rule invariants.
std::vector<Rule> rule_instances(const Rule& rule, const Universe& u);

// One step of the immediate-consequences transformer.
Algebra t_step(const std::vector<Rule>& rules, const Algebra& a);
// Least fixpoint of t_step from bottom over the given function signature
// (extended by the rule heads).
Algebra lfp(const std::vector<Rule>& rules, UniversePtr u, const FnSig& funcs);
inline Algebra lfp(const std::vector<Rule>& rules, UniversePtr u) {
  return lfp(rules, u, rule_functions(rules));
}

// Model characterization: t_step(rules, a) below a. `is_model_direct` checks
// rule satisfaction pointwise instead; the two agree at bounded scale.
bool is_model(const std::vector<Rule>& rules, const Algebra& a);
bool is_model_direct(const std::vector<Rule>& rules, const Algebra& a);

// Consistency: no table loses information under total instantiation of the
// variable pool, quantified inside the universe.
bool is_consistent(const Algebra& a);

// All cones of the universe (downward-closed subsets containing bottom),
// sorted; cap-guarded.
std::vector<Bits> enumerate_cones(const Universe& u);

// Streams every monotone table assignment exactly once, in deterministic
// order; optionally filtered to consistent algebras. Independent cursors may
// be consumed concurrently.
class AlgebraEnumerator {
 public:
  enum class Filter { All, ConsistentOnly };
  AlgebraEnumerator(FnSig funcs, UniversePtr u, Filter filter = Filter::All);
  bool next(Algebra& out);
  void reset();

 private:
  bool advance();
  bool constraints_ok(size_t slot) const;
  Algebra current() const;

  FnSig funcs_;
  UniversePtr u_;
  Filter filter_;
  std::vector<Bits> cones_;
  struct Slot {
    SymbolRef f;
    size_t flat;
    std::vector<std::pair<size_t, size_t>> preds;  // (slot index) of strict predecessors
  };
  std::vector<Slot> slots_;
  std::vector<size_t> choice_;
  bool fresh_ = true;
  bool done_ = false;
};

// Number of algebras the enumerator would stream; stops early and throws
// CapError once `cap` is exceeded.
size_t count_algebras(const FnSig& funcs, UniversePtr u,
                      AlgebraEnumerator::Filter filter, double cap);

// Random monotone algebra via downward-closure repair; deterministic in rng.
Algebra sample_algebra(const FnSig& funcs, UniversePtr u, std::mt19937_64& rng);

// Stable dump: one `f(t1,...,tn) |-> {u1,u2,...}` line per table entry,
// sorted; rows whose cone is exactly {bottom} are skipped unless requested.
std::string dump_algebra(const Algebra& a, bool include_bottom_rows = false);

}  // namespace crwl
