#pragma once

#include "crwl/algebra.hpp"

namespace crwl {

// A program module: parameter signature, export signature, rule set. The
// interface is derived from the body — exports are exactly the rule heads,
// parameters the invoked-but-undefined function symbols. Rules are stored
// alpha-canonicalized, sorted and deduplicated (set semantics).
class Module {
 public:
  Module() = default;
  static Module from_rules(std::vector<Rule> rules);
  static const Module& null_module();

  const FnSig& params() const { return params_; }
  const FnSig& exports() const { return exports_; }
  const std::vector<Rule>& rules() const { return rules_; }
  FnSig functions() const;        // params ∪ exports
  Signature symbols() const;      // every symbol occurring in the body
  Signature constructor_signature() const;

  friend bool operator==(const Module& a, const Module& b);
  friend bool operator!=(const Module& a, const Module& b) { return !(a == b); }

 private:
  FnSig params_, exports_;
  std::vector<Rule> rules_;
};

Module union_modules(const Module& a, const Module& b);
Module delete_signature(const Module& m, const FnSig& sigma);
Module rename_module(const Module& m, const Renaming& rho);
// Extensional closure: canonical rewrite rules for every derivable
// approximation of sigma-functions over the universe. The bounded graph is
// stabilized under canonical-rule regeneration so that materialization is
// idempotent at fixed bounds.
Module close_materialized(const Module& m, const FnSig& sigma, UniversePtr u);
// The canonical rewrite rules of a graph restricted to sigma, and the
// regeneration fixpoint itself.
std::vector<Rule> graph_rules(const Algebra& graph, const FnSig& sigma,
                              const Universe& u);
Algebra stabilize_graph(Algebra graph, const FnSig& sigma, UniversePtr u);
// Inheritance with overriding: m ∪ (n \ exp(m)).
Module isa_modules(const Module& m, const Module& n);
// Deletion presented as abstraction; warns (instead of failing) when the
// side conditions of the construct do not hold.
Module abstract_module(const Module& m, const FnSig& sigma,
                       std::vector<std::string>* warnings = nullptr);

std::string print_module(const Module& m);
std::string print_module(const std::string& name, const Module& m);

// ------------------------------------------------------------ expressions

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Module-expression tree: the four basic operations plus the derived
// constructs, which flattening rewrites to basic nodes.
struct Expr {
  enum class K {
    Ref,
    Union,
    Close,
    CloseHiding,
    Delete,
    Rename,
    Export,
    Import,
    Instantiate,
    Abstract,
    Isa
  };
  K k = K::Ref;
  std::string name;            // Ref
  ExprPtr a, b;
  std::optional<FnSig> sig;    // Close (optional), Delete/Export/Abstract
  std::set<SymbolRef> hide;    // CloseHiding constructors
  Renaming rho;                // Rename / Instantiate

  static ExprPtr ref(std::string name);
  static ExprPtr union_(ExprPtr a, ExprPtr b);
  static ExprPtr close(ExprPtr a, std::optional<FnSig> sig = std::nullopt);
  static ExprPtr close_hiding(ExprPtr a, std::set<SymbolRef> ctors);
  static ExprPtr del(ExprPtr a, FnSig sig);
  static ExprPtr rename(Renaming rho, ExprPtr a);
  static ExprPtr export_(FnSig sig, ExprPtr a);
  static ExprPtr import_(ExprPtr a, ExprPtr b);
  static ExprPtr import_sel(ExprPtr a, FnSig sig, ExprPtr b);
  static ExprPtr import_ren(ExprPtr a, Renaming rho, FnSig sig, ExprPtr b);
  static ExprPtr instantiate(ExprPtr a, ExprPtr b, Renaming rho);
  static ExprPtr abstract_(ExprPtr a, FnSig sig);
  static ExprPtr isa(ExprPtr a, ExprPtr b);
};

// Rewrites Export/Import/Instantiate/Abstract to basic nodes; Isa needs the
// flattened left operand's exports and is resolved during flattening.
ExprPtr desugar(const ExprPtr& e);
std::string to_string(const ExprPtr& e);
// Canonical label of a (sub)expression: the printed desugared form. Used as
// the Omega label of structured closures.
std::string canonical_label(const ExprPtr& e);

// Name environment for flattening: literal modules and named expressions.
struct FlattenEnv {
  std::map<std::string, Module> modules;
  std::map<std::string, ExprPtr> bindings;

  void define(const std::string& name, Module m);
  void define(const std::string& name, ExprPtr e);
  bool known(const std::string& name) const {
    return modules.count(name) || bindings.count(name);
  }
};

// Bottom-up evaluation to a plain module, materializing every closure over
// the given universe. Collects construct warnings when a sink is supplied.
Module flatten_materialized(const ExprPtr& e, const FlattenEnv& env,
                            UniversePtr u,
                            std::vector<std::string>* warnings = nullptr);

}  // namespace crwl
