#include "polyteam/oracle.hpp"

#include <functional>

namespace polyteam::oracle {

PolyteamEnumerator::PolyteamEnumerator(std::map<Sort, std::vector<std::string>> domains,
                                       std::size_t value_count, std::size_t max_rows) {
  for (auto &[sort, vars] : domains) {
    std::uint64_t universe = 1;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      universe *= value_count;
      if (universe > 4096) throw Error("polyteam enumeration bounds are too large");
    }
    std::vector<Tuple> rows;
    for (std::uint64_t c = 0; c < universe; ++c) {
      Tuple t(vars.size());
      std::uint64_t code = c;
      for (std::size_t i = vars.size(); i-- > 0;) {
        t[i] = static_cast<ValueId>(code % value_count);
        code /= value_count;
      }
      rows.push_back(std::move(t));
    }
    std::vector<Team> teams;
    std::vector<std::size_t> pick;
    std::function<void(std::size_t)> choose = [&](std::size_t from) {
      std::vector<Tuple> sel;
      for (std::size_t p : pick) sel.push_back(rows[p]);
      teams.push_back(Team::from_rows(sort, vars, sel));
      if (pick.size() == max_rows) return;
      for (std::size_t r = from; r < rows.size(); ++r) {
        pick.push_back(r);
        choose(r + 1);
        pick.pop_back();
      }
    };
    choose(0);
    total_ *= teams.size();
    choices_.push_back(std::move(teams));
  }
  index_.assign(choices_.size(), 0);
}

bool PolyteamEnumerator::next(Polyteam &out) {
  if (done_) return false;
  out = Polyteam{};
  for (std::size_t s = 0; s < choices_.size(); ++s) out.set(choices_[s][index_[s]]);
  std::size_t s = 0;
  while (s < index_.size() && ++index_[s] == choices_[s].size()) index_[s++] = 0;
  if (s == index_.size()) done_ = true;
  return true;
}

StructureEnumerator::StructureEnumerator(std::size_t domain_size,
                                         std::map<std::string, std::size_t> arities)
    : n_(domain_size) {
  if (domain_size == 0) throw Error("structures need a nonempty domain");
  for (auto &[name, arity] : arities) {
    std::uint64_t universe = 1;
    for (std::size_t i = 0; i < arity; ++i) universe *= domain_size;
    if (universe > 20) throw Error("relation " + name + " has too many candidate tuples");
    std::vector<Tuple> all;
    for (std::uint64_t c = 0; c < universe; ++c) {
      Tuple t(arity);
      std::uint64_t code = c;
      for (std::size_t i = arity; i-- > 0;) {
        t[i] = static_cast<ValueId>(code % domain_size);
        code /= domain_size;
      }
      all.push_back(std::move(t));
    }
    total_ *= std::uint64_t{1} << universe;
    rels_.emplace_back(name, arity);
    universe_.push_back(std::move(all));
  }
  mask_.assign(rels_.size(), 0);
}

bool StructureEnumerator::next(Structure &out) {
  if (done_) return false;
  out = Structure::with_domain_size(n_);
  for (std::size_t r = 0; r < rels_.size(); ++r) {
    out.add_relation(rels_[r].first, rels_[r].second);
    for (std::size_t b = 0; b < universe_[r].size(); ++b) {
      if (mask_[r] & (std::uint64_t{1} << b)) out.add_tuple(rels_[r].first, universe_[r][b]);
    }
  }
  std::size_t r = 0;
  while (r < mask_.size() && ++mask_[r] == (std::uint64_t{1} << universe_[r].size())) {
    mask_[r++] = 0;
  }
  if (r == mask_.size()) done_ = true;
  return true;
}

namespace {

std::map<Sort, std::vector<std::string>> atom_variables(const std::vector<PolyDep> &sigma,
                                                       const PolyDep &goal) {
  std::map<Sort, std::set<std::string>> acc;
  auto add = [&](const PolyDep &d) {
    for (const VarTuple *t : {&d.x, &d.y, &d.u, &d.v}) {
      auto &names = acc[t->sort];
      for (const auto &v : t->vars) names.insert(v.name);
    }
  };
  add(goal);
  for (const auto &d : sigma) add(d);
  std::map<Sort, std::vector<std::string>> out;
  for (auto &[s, names] : acc) out.emplace(s, std::vector<std::string>(names.begin(), names.end()));
  return out;
}

bool refutes(const RefPolyteam &x, const std::vector<PolyDep> &sigma, const PolyDep &goal) {
  if (naive_polydep(x, goal)) return false;
  for (const auto &d : sigma) {
    if (!naive_polydep(x, d)) return false;
  }
  return true;
}

/// Calls fn for each labelling of n positions with values below k, up to
/// renaming of values (restricted growth strings).
bool for_each_labelling(std::size_t n, std::size_t k,
                        const std::function<bool(const std::vector<ValueId> &)> &fn) {
  std::vector<ValueId> lab(n, 0);
  std::function<bool(std::size_t, ValueId)> go = [&](std::size_t pos, ValueId used) {
    if (pos == n) return fn(lab);
    for (ValueId v = 0; v <= used && v < k; ++v) {
      lab[pos] = v;
      if (go(pos + 1, std::max<ValueId>(used, v + 1))) return true;
    }
    return false;
  };
  return go(0, 0);
}

} // namespace

std::optional<Polyteam> semantic_counterexample(const std::vector<PolyDep> &sigma,
                                                const PolyDep &goal,
                                                const ImplicationBounds &bounds) {
  auto domains = atom_variables(sigma, goal);
  if (bounds.exhaustive) {
    PolyteamEnumerator en(domains, bounds.domain_size, bounds.max_rows);
    Polyteam x;
    while (en.next(x)) {
      if (refutes(to_reference(x), sigma, goal)) return x;
    }
    return std::nullopt;
  }

  // Dependence atoms are downward closed, so a counterexample shrinks to the
  // two assignments that violate the goal, with every other team empty.
  const Sort &si = goal.x.sort, &sj = goal.u.sort;
  const bool same = si == sj;
  if ((same ? 2 : 1) > bounds.max_rows) return std::nullopt;
  const auto &vi = domains.at(si), &vj = domains.at(sj);
  const std::size_t n = vi.size() + vj.size();
  std::optional<Polyteam> found;
  for_each_labelling(n, bounds.domain_size, [&](const std::vector<ValueId> &lab) {
    Assignment s, s2;
    for (std::size_t p = 0; p < vi.size(); ++p) s[vi[p]] = lab[p];
    for (std::size_t p = 0; p < vj.size(); ++p) s2[vj[p]] = lab[vi.size() + p];
    RefPolyteam x;
    for (const auto &[sort, vars] : domains) x[sort];
    x[si].insert(s);
    x[sj].insert(s2);
    if (!refutes(x, sigma, goal)) return false;
    Polyteam out;
    for (const auto &[sort, vars] : domains) {
      std::vector<Assignment> rows(x[sort].begin(), x[sort].end());
      out.set(Team::from_assignments(sort, vars, rows));
    }
    found = std::move(out);
    return true;
  });
  return found;
}

std::map<Sort, std::vector<std::string>> joint_domains(const FormulaPtr &phi,
                                                       const FormulaPtr &psi) {
  std::map<Sort, std::set<std::string>> acc;
  for (const FormulaPtr &f : {phi, psi}) {
    for (const Sort &s : mentioned_sorts(*f)) acc[s];
    for (const auto &[s, names] : free_variables(*f)) acc[s].insert(names.begin(), names.end());
  }
  std::map<Sort, std::vector<std::string>> out;
  for (auto &[s, names] : acc) out.emplace(s, std::vector<std::string>(names.begin(), names.end()));
  return out;
}

EquivalenceResult equivalent(const FormulaPtr &phi, const FormulaPtr &psi,
                             const EquivalenceBounds &bounds) {
  auto arities = relation_symbols(*phi);
  for (const auto &[name, ar] : relation_symbols(*psi)) {
    auto [it, fresh] = arities.emplace(name, ar);
    if (!fresh && it->second != ar) throw Error("relation " + name + " used with two arities");
  }
  auto domains = joint_domains(phi, psi);

  auto run = [&](Engine e, const Structure &a, const Polyteam &x,
                 const FormulaPtr &f) -> std::optional<bool> {
    if (e == Engine::reference) {
      try {
        return reference_eval(a, x, f, bounds.registry);
      } catch (const BudgetExceeded &) {
        return std::nullopt;
      }
    }
    EvalOutcome o = eval(a, x, f, bounds.config, bounds.registry);
    if (o.exhausted()) return std::nullopt;
    return o.holds();
  };

  EquivalenceResult res;
  StructureEnumerator structures(bounds.domain_size, arities);
  Structure a;
  while (structures.next(a)) {
    PolyteamEnumerator teams(domains, bounds.domain_size, bounds.max_rows);
    Polyteam x;
    while (teams.next(x)) {
      if (bounds.nonempty_only) {
        bool any_empty = false;
        for (const auto &[s, t] : x.teams()) any_empty = any_empty || t.empty();
        if (any_empty) continue;
      }
      ++res.checked;
      auto l = run(bounds.left, a, x, phi);
      auto r = l ? run(bounds.right, a, x, psi) : std::nullopt;
      if (!l || !r) {
        ++res.inconclusive;
        continue;
      }
      if (*l != *r) {
        res.equivalent = false;
        res.witness = Witness{a, x, *l, *r};
        return res;
      }
    }
  }
  return res;
}

} // namespace polyteam::oracle
