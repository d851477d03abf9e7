#pragma once

#include <boost/dynamic_bitset.hpp>
#include <memory>
#include <optional>
#include <vector>

#include "crwl/term.hpp"

namespace crwl {

// Resource caps shared by the enumeration-heavy engines.
struct Limits {
  size_t max_universe_terms = 200000;
  unsigned long long max_instances = 50000000ULL;
  double max_algebras = 1000000.0;
  size_t max_cones = 4000000;
};

// A set of universe-term indices. Cones are downward-closed bitsets
// containing the bottom index.
using Bits = boost::dynamic_bitset<>;

// Finite slice of CTerm_bot: all partial constructor terms over a
// constructor signature with depth <= d over a pool of variables X1..Xv.
// Membership is a structural check; the sorted term list, the approximation
// relation and the totality mask are materialized on first use (cap-guarded).
class Universe {
 public:
  Universe(Signature constructors, int depth, int vars, Limits limits = {});

  const Signature& constructors() const { return constructors_; }
  int depth() const { return depth_; }
  int var_pool() const { return vars_; }
  const Limits& limits() const { return limits_; }

  bool contains(const Term& t) const;

  // Materialized views.
  size_t size() const;
  const std::vector<Term>& terms() const;
  const Term& term(size_t i) const;
  std::optional<size_t> index(const Term& t) const;
  size_t bottom_index() const { return 0; }

  const Bits& down(size_t i) const;  // { j | term(j) approximates term(i) }
  const Bits& up(size_t i) const;    // { j | term(i) approximates term(j) }
  const Bits& totals() const;        // indices of total terms

  Bits empty_cone() const;   // all-zero mask
  Bits bottom_cone() const;  // { bottom }
  Bits full_cone() const;
  Bits ideal_of(const Term& t) const;  // error when t lies outside
  bool is_cone(const Bits& b) const;
  Bits downclose(Bits b) const;
  std::vector<Term> cone_terms(const Bits& b) const;
  std::string cone_to_string(const Bits& b) const;  // sorted {t1,t2,...}

 private:
  void materialize() const;

  Signature constructors_;
  int depth_;
  int vars_;
  Limits limits_;
  std::vector<VarId> pool_;

  mutable bool materialized_ = false;
  mutable std::vector<Term> terms_;
  mutable std::map<Term, size_t, TermLess> index_;
  mutable std::vector<Bits> down_, up_;
  mutable Bits totals_;
};

using UniversePtr = std::shared_ptr<const Universe>;

// Eager factory: enumerates immediately, throwing CapError when the bound
// would be exceeded. Deterministic sorted order, monotone in (depth, vars).
UniversePtr enumerate_universe(const Signature& constructors, int depth,
                               int vars, Limits limits = {});

// Lazy factory for goal-directed proving at scales where a dense term list
// is infeasible; only membership checks are available until a caller forces
// materialization.
UniversePtr term_bounds(const Signature& constructors, int depth, int vars,
                        Limits limits = {});

}  // namespace crwl
