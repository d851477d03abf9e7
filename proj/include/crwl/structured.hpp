#pragma once

#include "crwl/module.hpp"

namespace crwl {

// A module with hidden labeled symbols: a finite representation of closures.
// Visible rules use unlabeled function symbols only; hidden rules use
// labeled function symbols (and possibly labeled constructors); bridge rules
// have the shape f(X1..Xn) -> L.f(X1..Xn).
struct StructuredModule {
  FnSig params, exports;  // visible interface
  std::vector<Rule> rules_v, rules_b, rules_h;
  std::set<SymbolRef> hidden_ctors;  // labeled constructor symbols in use
  std::string provenance;            // canonical expression label

  bool is_plain() const { return rules_b.empty() && rules_h.empty(); }
  Module to_plain() const;
  std::vector<Rule> full_rules() const;

  static StructuredModule embed(const Module& m, std::string provenance);
  void check_invariants() const;  // throws on violation
};

StructuredModule union_structured(const StructuredModule& a,
                                  const StructuredModule& b);
StructuredModule delete_structured(const StructuredModule& sm,
                                   const FnSig& sigma);
StructuredModule rename_structured(const StructuredModule& sm,
                                   const Renaming& rho);
// Structured closure: push the visible and bridge parts behind the label,
// emit fresh bridges for the exported symbols.
StructuredModule star(const StructuredModule& sm);
// Closure additionally hiding a set of (visible) constructor symbols.
StructuredModule star_hiding(const StructuredModule& sm,
                             const std::set<SymbolRef>& ctors);

// Representation morphism: module expression -> structured module.
StructuredModule iota(const ExprPtr& e, const FlattenEnv& env);

// Visible-behavior transformer U_P: extend the algebra over the labeled
// signature, take the hidden fixpoint, apply one visible+bridge step, and
// reduct back to the visible universe.
Algebra u_step(const StructuredModule& sm, const Algebra& a);
// Least fixpoint of u_step from bottom: the visible canonical model.
Algebra u_model(const StructuredModule& sm, UniversePtr u);

// Plain module whose rules are the canonical rewrite rules of the visible
// u-model (used to materialize constructor-hiding closures).
Module materialize_structured(const StructuredModule& sm, UniversePtr u);

std::string print_structured(const StructuredModule& sm);

}  // namespace crwl
