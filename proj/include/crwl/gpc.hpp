#pragma once

#include <unordered_map>

#include "crwl/universe.hpp"

namespace crwl {

// Bounds for the goal-oriented proof calculus: a proof-tree depth budget and
// a universe that bounds substitution images (and clips intermediate
// approximations, matching the fixpoint engine's overflow policy).
struct ProofBounds {
  int max_proof_depth = 24;
  UniversePtr universe;
};

struct Derivation {
  enum class RuleTag { Bo, RR, DS, OR, Jo };
  RuleTag tag = RuleTag::Bo;
  Statement stmt;
  int rule_index = -1;  // OR: index into the prover's rule set
  CSubst theta;         // OR: instantiating substitution
  Term witness;         // Jo: shared total value
  std::vector<Derivation> children;
};

const char* rule_tag_name(Derivation::RuleTag t);
std::string format_derivation(const Derivation& d);

// Re-validates a derivation node by node against the calculus, independently
// of the search machinery.
bool validate_derivation(const Derivation& d, const std::vector<Rule>& rules,
                         const Universe& u);

struct ProveResult {
  bool proven = false;
  // When not proven: true when the depth budget was the binding constraint;
  // false means the search saturated and no proof exists at these universe
  // bounds.
  bool depth_limited = false;
  int depth_used = 0;
  std::optional<Derivation> derivation;
};

// Top-down GPC search with iterative deepening, memoized reduct sets, and
// lazy OR-substitution choice: pattern variables are bound by matching
// argument reducts, remaining variables enumerate the universe. A prover
// instance is single-threaded; inputs are immutable.
class Prover {
 public:
  Prover(std::vector<Rule> rules, ProofBounds bounds);

  const std::vector<Rule>& rules() const { return rules_; }

  ProveResult prove(const Statement& goal);

  // The set of partial cterms `t` (within the universe) such that e -> t is
  // derivable, saturated or cut at the depth budget. `complete` reports
  // whether the set is final (no deeper proof can add members at these
  // universe bounds).
  std::map<Term, int, TermLess> reducts(const Term& e, bool* complete = nullptr);

  // Batch interface: seed goals with warm(), saturate once, then read the
  // per-term reduct sets at the returned depth.
  void warm(const Term& e) { touch(e); }
  int saturate(bool* complete = nullptr);
  std::vector<Term> reducts_at(const Term& e, int depth);

 private:
  struct Step {
    Derivation::RuleTag tag = Derivation::RuleTag::Bo;
    int rule = -1;
    std::shared_ptr<const CSubst> theta;
  };
  struct Entry {
    std::map<Term, Step, TermLess> reds;
    bool cut = false;  // truncated by the depth budget somewhere below
  };
  using EntryPtr = std::shared_ptr<const Entry>;

  const Entry& compute(const Term& e, int depth);
  bool joinable(const Term& a, const Term& b, int depth, bool* cut);
  Derivation build(const Statement& stmt, int depth);
  void touch(const Term& e);
  // Sweeps layer d over every touched term; true when the layer is a
  // fixpoint (no new terms, every entry equal to its depth d-1 entry).
  bool sweep_layer(int d);

  std::vector<Rule> rules_;
  ProofBounds bounds_;
  std::map<SymbolRef, std::vector<int>> rules_by_head_;

  struct Key {
    Term term;
    int depth;
    bool operator==(const Key& o) const {
      return depth == o.depth && term == o.term;
    }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      return k.term.hash() * 1315423911u + (size_t)k.depth;
    }
  };
  std::unordered_map<Key, EntryPtr, KeyHash> memo_;
  std::vector<Term> touched_;
  std::set<Term, TermLess> touched_set_;
};

}  // namespace crwl
