#include "crwl/universe.hpp"

#include <algorithm>
#include <sstream>

namespace crwl {

Universe::Universe(Signature constructors, int depth, int vars, Limits limits)
    : constructors_(std::move(constructors)),
      depth_(depth),
      vars_(vars),
      limits_(limits) {
  if (depth_ < 0 || vars_ < 0) throw Error("universe bounds must be >= 0");
  for (const SymbolRef& s : constructors_.functions())
    throw Error("universe signature must contain constructors only: " +
                s.display());
  for (int i = 1; i <= vars_; ++i)
    pool_.push_back(intern_var("X" + std::to_string(i)));
}

bool Universe::contains(const Term& t) const {
  if (!t.is_cterm()) return false;
  if (t.depth() > depth_) return false;
  switch (t.tag()) {
    case Term::Tag::Bottom:
      return true;
    case Term::Tag::Var:
      return std::find(pool_.begin(), pool_.end(), t.var_id()) != pool_.end();
    case Term::Tag::App: {
      if (!constructors_.contains(t.symbol())) return false;
      for (const Term& a : t.args())
        if (!contains(a)) return false;
      return true;
    }
  }
  return false;
}

void Universe::materialize() const {
  if (materialized_) return;

  std::vector<Term> acc;
  acc.push_back(Term::bottom());
  for (VarId v : pool_) acc.push_back(Term::var(v));
  std::vector<SymbolRef> ctors = constructors_.constructors();
  for (const SymbolRef& c : ctors)
    if (c.arity == 0) acc.push_back(Term::app(c));

  size_t level_start = 0;  // terms of the previous depth start here
  for (int d = 1; d <= depth_; ++d) {
    size_t level_end = acc.size();
    for (const SymbolRef& c : ctors) {
      if (c.arity == 0) continue;
      // tuples over acc[0..level_end) with at least one component of depth d-1
      std::vector<size_t> idx((size_t)c.arity, 0);
      while (true) {
        bool fresh = false;
        for (size_t k : idx)
          if (k >= level_start) fresh = true;
        if (fresh) {
          std::vector<Term> args;
          args.reserve((size_t)c.arity);
          for (size_t k : idx) args.push_back(acc[k]);
          acc.push_back(Term::app(c, std::move(args)));
          if (acc.size() > limits_.max_universe_terms)
            throw CapError("universe term count exceeds cap",
                           "> " + std::to_string(limits_.max_universe_terms));
        }
        int pos = c.arity - 1;
        while (pos >= 0 && ++idx[(size_t)pos] == level_end) {
          idx[(size_t)pos] = 0;
          --pos;
        }
        if (pos < 0) break;
      }
    }
    level_start = level_end;
  }

  std::sort(acc.begin(), acc.end(), TermLess{});
  terms_ = std::move(acc);
  for (size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], i);

  size_t n = terms_.size();
  down_.assign(n, Bits(n));
  up_.assign(n, Bits(n));
  totals_ = Bits(n);
  for (size_t i = 0; i < n; ++i) {
    if (terms_[i].is_total()) totals_.set(i);
    for (size_t j = 0; j < n; ++j)
      if (approx_le(terms_[j], terms_[i])) {
        down_[i].set(j);
        up_[j].set(i);
      }
  }
  materialized_ = true;
}

size_t Universe::size() const {
  materialize();
  return terms_.size();
}

const std::vector<Term>& Universe::terms() const {
  materialize();
  return terms_;
}

const Term& Universe::term(size_t i) const {
  materialize();
  return terms_.at(i);
}

std::optional<size_t> Universe::index(const Term& t) const {
  materialize();
  auto it = index_.find(t);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Bits& Universe::down(size_t i) const {
  materialize();
  return down_.at(i);
}

const Bits& Universe::up(size_t i) const {
  materialize();
  return up_.at(i);
}

const Bits& Universe::totals() const {
  materialize();
  return totals_;
}

Bits Universe::empty_cone() const { return Bits(size()); }

Bits Universe::bottom_cone() const {
  Bits b(size());
  b.set(bottom_index());
  return b;
}

Bits Universe::full_cone() const {
  Bits b(size());
  b.set();
  return b;
}

Bits Universe::ideal_of(const Term& t) const {
  auto i = index(t);
  if (!i) throw Error("term outside the universe: " + to_string(t));
  return down(*i);
}

bool Universe::is_cone(const Bits& b) const {
  if (b.size() != size() || !b.test(bottom_index())) return false;
  for (size_t i = b.find_first(); i != Bits::npos; i = b.find_next(i))
    if (!down(i).is_subset_of(b)) return false;
  return true;
}

Bits Universe::downclose(Bits b) const {
  Bits out(size());
  out.set(bottom_index());
  for (size_t i = b.find_first(); i != Bits::npos; i = b.find_next(i))
    out |= down(i);
  return out;
}

std::vector<Term> Universe::cone_terms(const Bits& b) const {
  std::vector<Term> out;
  for (size_t i = b.find_first(); i != Bits::npos; i = b.find_next(i))
    out.push_back(term(i));
  return out;
}

std::string Universe::cone_to_string(const Bits& b) const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (size_t i = b.find_first(); i != Bits::npos; i = b.find_next(i)) {
    if (!first) os << ',';
    os << to_string(term(i));
    first = false;
  }
  os << '}';
  return os.str();
}

UniversePtr enumerate_universe(const Signature& constructors, int depth,
                               int vars, Limits limits) {
  auto u = std::make_shared<Universe>(constructors, depth, vars, limits);
  u->size();  // force enumeration now
  return u;
}

UniversePtr term_bounds(const Signature& constructors, int depth, int vars,
                        Limits limits) {
  return std::make_shared<Universe>(constructors, depth, vars, limits);
}

}  // namespace crwl
