#include "crwl/gpc.hpp"

#include <algorithm>
#include <sstream>

namespace crwl {

const char* rule_tag_name(Derivation::RuleTag t) {
  switch (t) {
    case Derivation::RuleTag::Bo:
      return "Bo";
    case Derivation::RuleTag::RR:
      return "RR";
    case Derivation::RuleTag::DS:
      return "DS";
    case Derivation::RuleTag::OR:
      return "OR";
    case Derivation::RuleTag::Jo:
      return "Jo";
  }
  return "?";
}

Prover::Prover(std::vector<Rule> rules, ProofBounds bounds)
    : rules_(std::move(rules)), bounds_(std::move(bounds)) {
  if (bounds_.max_proof_depth < 1)
    throw Error("max_proof_depth must be >= 1");
  if (!bounds_.universe) throw Error("proof bounds require a universe");
  for (size_t i = 0; i < rules_.size(); ++i)
    rules_by_head_[rules_[i].head].push_back((int)i);
}

namespace {

// Exact match of a linear total pattern against a candidate reduct:
// pattern-variable bindings make the pattern instance equal the candidate.
bool match_pattern(const Term& pat, const Term& cand,
                   std::vector<std::pair<VarId, Term>>& binds) {
  switch (pat.tag()) {
    case Term::Tag::Var:
      binds.emplace_back(pat.var_id(), cand);
      return true;
    case Term::Tag::Bottom:
      return cand.is_bottom();
    case Term::Tag::App: {
      if (!cand.is_app() || !(cand.symbol() == pat.symbol())) return false;
      for (size_t i = 0; i < pat.args().size(); ++i)
        if (!match_pattern(pat.args()[i], cand.args()[i], binds)) return false;
      return true;
    }
  }
  return false;
}

}  // namespace

const Prover::Entry& Prover::compute(const Term& e, int depth) {
  static const Entry kCutEntry{{}, true};
  if (depth <= 0) return kCutEntry;
  Key key{e, depth};
  auto it = memo_.find(key);
  if (it != memo_.end()) return *it->second;

  auto entry = std::make_shared<Entry>();
  entry->reds.emplace(Term::bottom(),
                      Step{Derivation::RuleTag::Bo, -1, nullptr});

  switch (e.tag()) {
    case Term::Tag::Bottom:
      break;
    case Term::Tag::Var:
      entry->reds.emplace(e, Step{Derivation::RuleTag::RR, -1, nullptr});
      break;
    case Term::Tag::App: {
      const SymbolRef& s = e.symbol();
      if (s.is_constructor()) {
        if (s.arity == 0) {
          entry->reds.emplace(e, Step{Derivation::RuleTag::RR, -1, nullptr});
          break;
        }
        std::vector<const Entry*> child;
        bool empty_child = false;
        for (const Term& a : e.args()) {
          child.push_back(&compute(a, depth - 1));
          entry->cut = entry->cut || child.back()->cut;
          empty_child = empty_child || child.back()->reds.empty();
        }
        if (empty_child) break;  // depth-exhausted argument: no DS tuples
        // product of child reducts
        std::vector<std::map<Term, Step, TermLess>::const_iterator> pick;
        for (const Entry* c : child) pick.push_back(c->reds.begin());
        while (true) {
          std::vector<Term> args;
          args.reserve(pick.size());
          for (auto& p : pick) args.push_back(p->first);
          Term t = Term::app(s, std::move(args));
          if (bounds_.universe->contains(t))
            entry->reds.emplace(t, Step{Derivation::RuleTag::DS, -1, nullptr});
          size_t i = pick.size();
          bool carried = true;
          while (i > 0) {
            --i;
            if (++pick[i] != child[i]->reds.end()) {
              carried = false;
              break;
            }
            pick[i] = child[i]->reds.begin();
          }
          if (carried) break;
          for (size_t j = i + 1; j < pick.size(); ++j)
            pick[j] = child[j]->reds.begin();
        }
        break;
      }
      // function application: rule OR
      auto rit = rules_by_head_.find(s);
      if (rit == rules_by_head_.end()) break;
      std::vector<const Entry*> child;
      for (const Term& a : e.args()) {
        child.push_back(&compute(a, depth - 1));
        entry->cut = entry->cut || child.back()->cut;
      }
      for (int ridx : rit->second) {
        const Rule& r = rules_[ridx];
        // per-pattern candidate bindings from argument reducts
        std::vector<std::vector<std::vector<std::pair<VarId, Term>>>> cands(
            r.patterns.size());
        bool dead = false;
        for (size_t i = 0; i < r.patterns.size() && !dead; ++i) {
          for (const auto& [t, step] : child[i]->reds) {
            std::vector<std::pair<VarId, Term>> binds;
            if (match_pattern(r.patterns[i], t, binds))
              cands[i].push_back(std::move(binds));
          }
          dead = cands[i].empty();
        }
        if (dead) continue;
        // variables not bound by patterns enumerate the universe
        std::set<VarId> pvars;
        for (const Term& p : r.patterns) p.vars_into(pvars);
        std::vector<VarId> free_vars;
        for (VarId v : r.vars())
          if (!pvars.count(v)) free_vars.push_back(v);
        std::sort(free_vars.begin(), free_vars.end(),
                  [](VarId a, VarId b) { return var_name(a) < var_name(b); });
        size_t nfree = free_vars.size();
        size_t nuni = nfree ? bounds_.universe->size() : 0;

        std::vector<size_t> pat_pick(cands.size(), 0);
        std::vector<size_t> free_pick(nfree, 0);
        while (true) {
          auto theta = std::make_shared<CSubst>();
          for (size_t i = 0; i < cands.size(); ++i)
            for (const auto& [v, t] : cands[i][pat_pick[i]])
              theta->bind(v, t);
          for (size_t i = 0; i < nfree; ++i)
            theta->bind(free_vars[i], bounds_.universe->term(free_pick[i]));

          bool ok = true;
          for (const Statement& c : r.conditions) {
            bool ccut = false;
            if (!joinable(apply_subst(c.lhs, *theta),
                          apply_subst(c.rhs, *theta), depth - 1, &ccut)) {
              ok = false;
              entry->cut = entry->cut || ccut;
              break;
            }
          }
          if (ok) {
            const Entry& rhs = compute(apply_subst(r.rhs, *theta), depth - 1);
            entry->cut = entry->cut || rhs.cut;
            for (const auto& [t, step] : rhs.reds) {
              if (t.is_bottom()) continue;  // OR requires t not bottom
              entry->reds.emplace(t, Step{Derivation::RuleTag::OR, ridx, theta});
            }
          }
          // advance odometer: free vars fastest, then pattern picks
          size_t i = nfree;
          bool carried = true;
          while (i > 0) {
            --i;
            if (++free_pick[i] < nuni) {
              carried = false;
              break;
            }
            free_pick[i] = 0;
          }
          if (!carried) continue;
          i = cands.size();
          while (i > 0) {
            --i;
            if (++pat_pick[i] < cands[i].size()) {
              carried = false;
              break;
            }
            pat_pick[i] = 0;
          }
          if (carried) break;
        }
      }
      break;
    }
  }

  auto [mit, inserted] = memo_.emplace(key, entry);
  if (inserted) touch(e);
  return *mit->second;
}

void Prover::touch(const Term& e) {
  if (touched_set_.insert(e).second) touched_.push_back(e);
}

bool Prover::joinable(const Term& a, const Term& b, int depth, bool* cut) {
  if (depth <= 0) {
    *cut = true;
    return false;
  }
  const Entry& ea = compute(a, depth - 1);
  const Entry& eb = compute(b, depth - 1);
  *cut = *cut || ea.cut || eb.cut;
  for (const auto& [t, step] : ea.reds)
    if (t.is_total() && eb.reds.count(t)) return true;
  return false;
}

bool Prover::sweep_layer(int d) {
  size_t before = touched_.size();
  for (size_t i = 0; i < touched_.size(); ++i) {
    Term t = touched_[i];  // compute() may grow touched_
    compute(t, d);
  }
  if (touched_.size() != before) return false;
  if (d < 2) return false;
  for (const Term& t : touched_) {
    auto now = memo_.find(Key{t, d});
    auto prev = memo_.find(Key{t, d - 1});
    if (now == memo_.end() || prev == memo_.end()) return false;
    const auto& ra = now->second->reds;
    const auto& rb = prev->second->reds;
    if (ra.size() != rb.size()) return false;
    auto ia = ra.begin();
    auto ib = rb.begin();
    for (; ia != ra.end(); ++ia, ++ib)
      if (!(ia->first == ib->first)) return false;
  }
  return true;
}

ProveResult Prover::prove(const Statement& goal) {
  if (goal.kind == Statement::Kind::Reduction && !goal.rhs.is_cterm())
    throw Error(
        "GPC reduction goals require a constructor-term right-hand side; use "
        "the fixpoint engine for general terms");

  touch(goal.lhs);
  if (goal.kind == Statement::Kind::Joinability) touch(goal.rhs);

  ProveResult res;
  bool prev_fixed = false;
  for (int d = 1; d <= bounds_.max_proof_depth; ++d) {
    // conditions read two layers down, so a fixpoint needs two equal steps
    bool fixed = sweep_layer(d);
    bool saturated = fixed && prev_fixed;
    prev_fixed = fixed;
    bool found = false;
    bool cut = false;
    if (goal.kind == Statement::Kind::Reduction) {
      const Entry& en = compute(goal.lhs, d);
      cut = en.cut;
      found = en.reds.count(goal.rhs) != 0;
    } else {
      found = joinable(goal.lhs, goal.rhs, d, &cut);
    }
    if (found) {
      res.proven = true;
      res.depth_used = d;
      res.derivation = build(goal, d);
      return res;
    }
    if (!cut || saturated) {  // no deeper proof can exist at these bounds
      res.depth_used = d;
      return res;
    }
  }
  res.depth_used = bounds_.max_proof_depth;
  res.depth_limited = true;
  return res;
}

std::map<Term, int, TermLess> Prover::reducts(const Term& e, bool* complete) {
  touch(e);
  std::map<Term, int, TermLess> out;
  int final_depth = bounds_.max_proof_depth;
  bool saturated = false;
  bool prev_fixed = false;
  for (int d = 1; d <= bounds_.max_proof_depth; ++d) {
    bool fixed = sweep_layer(d);
    const Entry& en = compute(e, d);
    final_depth = d;
    if (!en.cut || (fixed && prev_fixed)) {
      saturated = true;
      break;
    }
    prev_fixed = fixed;
  }
  const Entry& en = compute(e, final_depth);
  for (const auto& [t, step] : en.reds) out[t] = final_depth;
  if (complete) *complete = saturated;
  return out;
}

int Prover::saturate(bool* complete) {
  bool prev_fixed = false;
  for (int d = 1; d <= bounds_.max_proof_depth; ++d) {
    bool fixed = sweep_layer(d);
    if (fixed && prev_fixed) {
      if (complete) *complete = true;
      return d;
    }
    prev_fixed = fixed;
  }
  if (complete) *complete = false;
  return bounds_.max_proof_depth;
}

std::vector<Term> Prover::reducts_at(const Term& e, int depth) {
  const Entry& en = compute(e, depth);
  std::vector<Term> out;
  out.reserve(en.reds.size());
  for (const auto& [t, step] : en.reds) out.push_back(t);
  return out;
}

Derivation Prover::build(const Statement& stmt, int depth) {
  Derivation d;
  d.stmt = stmt;
  if (stmt.kind == Statement::Kind::Joinability) {
    d.tag = Derivation::RuleTag::Jo;
    const Entry& ea = compute(stmt.lhs, depth - 1);
    const Entry& eb = compute(stmt.rhs, depth - 1);
    for (const auto& [t, step] : ea.reds) {
      if (t.is_total() && eb.reds.count(t)) {
        d.witness = t;
        d.children.push_back(build(Statement::reduction(stmt.lhs, t), depth - 1));
        d.children.push_back(build(Statement::reduction(stmt.rhs, t), depth - 1));
        return d;
      }
    }
    throw Error("internal: joinability witness vanished during rebuild");
  }

  const Term& e = stmt.lhs;
  const Term& t = stmt.rhs;
  if (t.is_bottom()) {
    d.tag = Derivation::RuleTag::Bo;
    return d;
  }
  const Entry& en = compute(e, depth);
  auto it = en.reds.find(t);
  if (it == en.reds.end())
    throw Error("internal: reduct vanished during rebuild");
  const Step& step = it->second;
  d.tag = step.tag;
  switch (step.tag) {
    case Derivation::RuleTag::Bo:
    case Derivation::RuleTag::RR:
      break;
    case Derivation::RuleTag::DS:
      for (size_t i = 0; i < e.args().size(); ++i)
        d.children.push_back(
            build(Statement::reduction(e.args()[i], t.args()[i]), depth - 1));
      break;
    case Derivation::RuleTag::OR: {
      const Rule& r = rules_[(size_t)step.rule];
      d.rule_index = step.rule;
      d.theta = *step.theta;
      for (size_t i = 0; i < e.args().size(); ++i)
        d.children.push_back(build(
            Statement::reduction(e.args()[i],
                                 apply_subst(r.patterns[i], *step.theta)),
            depth - 1));
      for (const Statement& c : r.conditions)
        d.children.push_back(
            build(Statement::joinability(apply_subst(c.lhs, *step.theta),
                                         apply_subst(c.rhs, *step.theta)),
                  depth - 1));
      d.children.push_back(
          build(Statement::reduction(apply_subst(r.rhs, *step.theta), t),
                depth - 1));
      break;
    }
    case Derivation::RuleTag::Jo:
      throw Error("internal: Jo step on a reduction statement");
  }
  return d;
}

bool validate_derivation(const Derivation& d, const std::vector<Rule>& rules,
                         const Universe& u) {
  const Statement& s = d.stmt;
  switch (d.tag) {
    case Derivation::RuleTag::Bo:
      if (s.kind != Statement::Kind::Reduction || !s.rhs.is_bottom())
        return false;
      return d.children.empty();
    case Derivation::RuleTag::RR: {
      if (s.kind != Statement::Kind::Reduction || !(s.lhs == s.rhs))
        return false;
      bool atomic = s.lhs.is_var() ||
                    (s.lhs.is_app() && s.lhs.symbol().is_constructor() &&
                     s.lhs.symbol().arity == 0);
      return atomic && d.children.empty();
    }
    case Derivation::RuleTag::DS: {
      if (s.kind != Statement::Kind::Reduction) return false;
      if (!s.lhs.is_app() || !s.rhs.is_app()) return false;
      if (!(s.lhs.symbol() == s.rhs.symbol()) ||
          !s.lhs.symbol().is_constructor())
        return false;
      size_t n = s.lhs.args().size();
      if (d.children.size() != n) return false;
      for (size_t i = 0; i < n; ++i) {
        const Statement& c = d.children[i].stmt;
        if (c.kind != Statement::Kind::Reduction ||
            !(c.lhs == s.lhs.args()[i]) || !(c.rhs == s.rhs.args()[i]))
          return false;
        if (!validate_derivation(d.children[i], rules, u)) return false;
      }
      return true;
    }
    case Derivation::RuleTag::OR: {
      if (s.kind != Statement::Kind::Reduction) return false;
      if (s.rhs.is_bottom()) return false;  // t not identically bottom
      if (!s.lhs.is_app() || !s.lhs.symbol().is_function()) return false;
      if (d.rule_index < 0 || (size_t)d.rule_index >= rules.size())
        return false;
      const Rule& r = rules[(size_t)d.rule_index];
      if (!(r.head == s.lhs.symbol())) return false;
      for (const auto& [v, img] : d.theta.bindings())
        if (!img.is_cterm() || !u.contains(img)) return false;
      size_t n = s.lhs.args().size();
      if (d.children.size() != n + r.conditions.size() + 1) return false;
      for (size_t i = 0; i < n; ++i) {
        const Statement& c = d.children[i].stmt;
        if (c.kind != Statement::Kind::Reduction ||
            !(c.lhs == s.lhs.args()[i]) ||
            !(c.rhs == apply_subst(r.patterns[i], d.theta)))
          return false;
      }
      for (size_t j = 0; j < r.conditions.size(); ++j) {
        const Statement& c = d.children[n + j].stmt;
        if (c.kind != Statement::Kind::Joinability ||
            !(c.lhs == apply_subst(r.conditions[j].lhs, d.theta)) ||
            !(c.rhs == apply_subst(r.conditions[j].rhs, d.theta)))
          return false;
      }
      const Statement& last = d.children.back().stmt;
      if (last.kind != Statement::Kind::Reduction ||
          !(last.lhs == apply_subst(r.rhs, d.theta)) || !(last.rhs == s.rhs))
        return false;
      for (const Derivation& c : d.children)
        if (!validate_derivation(c, rules, u)) return false;
      return true;
    }
    case Derivation::RuleTag::Jo: {
      if (s.kind != Statement::Kind::Joinability) return false;
      if (!d.witness.is_cterm() || !d.witness.is_total()) return false;
      if (d.children.size() != 2) return false;
      const Statement& l = d.children[0].stmt;
      const Statement& r = d.children[1].stmt;
      if (l.kind != Statement::Kind::Reduction || !(l.lhs == s.lhs) ||
          !(l.rhs == d.witness))
        return false;
      if (r.kind != Statement::Kind::Reduction || !(r.lhs == s.rhs) ||
          !(r.rhs == d.witness))
        return false;
      return validate_derivation(d.children[0], rules, u) &&
             validate_derivation(d.children[1], rules, u);
    }
  }
  return false;
}

static void format_rec(std::ostringstream& os, const Derivation& d,
                       int indent) {
  for (int i = 0; i < indent; ++i) os << "  ";
  os << '(' << rule_tag_name(d.tag) << ") " << to_string(d.stmt);
  if (d.tag == Derivation::RuleTag::Jo)
    os << "  [witness " << to_string(d.witness) << ']';
  os << '\n';
  for (const Derivation& c : d.children) format_rec(os, c, indent + 1);
}

std::string format_derivation(const Derivation& d) {
  std::ostringstream os;
  format_rec(os, d, 0);
  return os.str();
}

}  // namespace crwl
