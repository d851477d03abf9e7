#pragma once

#include "crwl/module.hpp"

namespace crwl {

// The five program equivalences: least-model, transformer, term-model,
// consistent term-model, and deletion equivalence.
enum class Relation { LM, T, M, CM, D };
const char* relation_name(Relation r);
std::optional<Relation> relation_from_string(const std::string& s);

struct Discrepancy {
  SymbolRef f;
  std::vector<Term> args;
  Term value;  // member of one side's cone only
};

enum class Outcome { EquivalentAtBounds, Counterexample, InconclusiveSampled };

struct EquivVerdict {
  Relation relation{};
  Outcome outcome{};
  std::optional<Algebra> witness_algebra;
  std::optional<FnSig> witness_sigma;  // D: the deleted signature
  std::optional<Discrepancy> discrepancy;
  size_t examined = 0;
  std::string note;
};

struct EquivOptions {
  bool exhaustive = true;
  size_t samples = 200;
  uint64_t seed = 1;
};

// Observable behavior: the bounded canonical model.
Algebra observable(const std::vector<Rule>& rules, UniversePtr u,
                   const FnSig& funcs);

EquivVerdict equiv(const std::vector<Rule>& p, const std::vector<Rule>& q,
                   Relation rel, UniversePtr u, const EquivOptions& opts = {});

// Re-checks a counterexample verdict against the defining condition of its
// relation; true when the witness stands up.
bool revalidate(const EquivVerdict& v, const std::vector<Rule>& p,
                const std::vector<Rule>& q, UniversePtr u);

// Per-function family of consistent term models (enumeration indices into
// the deterministic algebra stream over `engine`).
struct DeletionSemantics {
  std::map<SymbolRef, std::vector<size_t>> models;
  size_t consistent_count = 0;
  friend bool operator==(const DeletionSemantics& a,
                         const DeletionSemantics& b) {
    return a.consistent_count == b.consistent_count && a.models == b.models;
  }
};
DeletionSemantics deletion_semantics(const std::vector<Rule>& rules,
                                     UniversePtr u, const FnSig& engine,
                                     const FnSig& domain);

struct HomCheck {
  bool ok = true;
  std::string detail;
};
// Homomorphism checks over every enumerated algebra:
//   (a) union splits pointwise,
//   (b) the closure transformer is constant and equals restrict(lfp, sigma),
//   (c) deletion is a meet with the top transformer of the kept signature,
//   (d) renaming conjugates through the rho transformers.
struct HomReport {
  HomCheck a, b, c, d;
  size_t algebras = 0;
  bool all_ok() const { return a.ok && b.ok && c.ok && d.ok; }
};
HomReport check_homomorphism(const Module& p, const Module& q,
                             const FnSig& sigma, const Renaming& rho,
                             UniversePtr u);

// The minimal-program construction: a rule set R_t with t derivable from r
// in the canonical model of R_t, and R_t's transformer below the given
// consistent algebra (and constant).
std::vector<Rule> build_witness_program(const Algebra& a, const Term& r,
                                        const Term& t);

// A context X ∪ R separating the observables of two programs, assembled
// from witness programs at a consistent-model counterexample.
struct SeparationContext {
  std::vector<Rule> rules;
  SymbolRef f;
  std::vector<Term> args;
  Term value;
  bool q_side;  // discrepancy produced by q's transformer
};
std::optional<SeparationContext> distinguish(const std::vector<Rule>& p,
                                             const std::vector<Rule>& q,
                                             UniversePtr u);

}  // namespace crwl
