#include "polyteam/implication.hpp"

#include "polyteam/atoms.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace polyteam {

void validate_polydep(const PolyDep &atom) {
  auto problems = check_atom_well_sorted(AtomInstance{atom});
  if (!problems.empty()) {
    throw Error("malformed dependence atom " + to_string(atom) + ": " + problems.front());
  }
}

PolyDep consequent_projection(const PolyDep &atom, std::size_t t) {
  if (t >= atom.y.size()) throw Error("consequent position out of range");
  return PolyDep{atom.x, VarTuple{atom.y.sort, {atom.y.vars[t]}}, atom.u,
                 VarTuple{atom.v.sort, {atom.v.vars[t]}}};
}

namespace {

class UnionFind {
public:
  int id(const Variable &v) {
    auto [it, fresh] = index_.emplace(v, static_cast<int>(parent_.size()));
    if (fresh) parent_.push_back(it->second);
    return it->second;
  }
  int find(const Variable &v) { return root(id(v)); }
  bool same(const Variable &a, const Variable &b) { return find(a) == find(b); }
  bool merge(const Variable &a, const Variable &b) {
    int ra = find(a), rb = find(b);
    if (ra == rb) return false;
    parent_[std::max(ra, rb)] = std::min(ra, rb);
    return true;
  }

private:
  int root(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  std::map<Variable, int> index_;
  std::vector<int> parent_;
};

PolyDep symmetric_of(const PolyDep &d) { return PolyDep{d.u, d.v, d.x, d.y}; }

/// Variables per sort in order of first appearance over σ then Σ.
std::map<Sort, std::vector<std::string>> variables_by_sort(const std::vector<PolyDep> &sigma,
                                                          const PolyDep &goal) {
  std::map<Sort, std::vector<std::string>> out;
  auto visit = [&](const PolyDep &d) {
    for (const VarTuple *t : {&d.x, &d.y, &d.u, &d.v}) {
      auto &names = out[t->sort];
      for (const auto &v : t->vars) {
        if (std::find(names.begin(), names.end(), v.name) == names.end()) {
          names.push_back(v.name);
        }
      }
    }
  };
  visit(goal);
  for (const auto &d : sigma) visit(d);
  return out;
}

bool all_related(UnionFind &uf, const VarTuple &a, const VarTuple &b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!uf.same(a.vars[k], b.vars[k])) return false;
  }
  return true;
}

void decide_same_sort(ImplicationVerdict &out) {
  const PolyDep &goal = out.goal;
  const Sort &s = goal.x.sort;
  std::set<Variable> closure(goal.x.vars.begin(), goal.x.vars.end());
  auto covered = [&](const VarTuple &t) {
    return std::all_of(t.vars.begin(), t.vars.end(),
                       [&](const Variable &v) { return closure.count(v) != 0; });
  };
  std::vector<bool> fired(out.sigma.size(), false);
  bool changed = true;
  while (changed && !covered(goal.y)) {
    changed = false;
    for (std::size_t i = 0; i < out.sigma.size() && !covered(goal.y); ++i) {
      const PolyDep &d = out.sigma[i];
      if (fired[i] || d.x.sort != s || d.u.sort != s || !covered(d.x)) continue;
      fired[i] = true;
      TraceStep step{i, false, d, {}};
      for (const auto &v : d.y.vars) {
        if (closure.insert(v).second) step.merged.emplace_back(v, v);
      }
      out.trace.push_back(std::move(step));
      changed = true;
    }
  }
  if (covered(goal.y)) {
    out.implied = true;
    return;
  }
  out.trace.clear();

  Counterexample cex;
  ValueId c0 = cex.structure.intern("c0"), c1 = cex.structure.intern("c1");
  for (const auto &[sort, names] : variables_by_sort(out.sigma, goal)) {
    if (sort != s) {
      cex.polyteam.set(Team(sort, names));
      continue;
    }
    Tuple first(names.size(), c0), second;
    for (const auto &n : names) {
      bool in = closure.count(Variable{s, n}) != 0;
      second.push_back(in ? c0 : c1);
      cex.classes[Variable{s, n}] = in ? "c0" : "c1";
    }
    cex.polyteam.set(Team::from_rows(s, names, {first, second}));
  }
  out.counterexample = std::move(cex);
}

void decide_cross_sort(ImplicationVerdict &out) {
  const PolyDep &goal = out.goal;
  const Sort &si = goal.x.sort, &sj = goal.u.sort;
  std::vector<std::pair<std::size_t, PolyDep>> oriented;
  std::vector<bool> symmetric;
  for (std::size_t n = 0; n < out.sigma.size(); ++n) {
    const PolyDep &d = out.sigma[n];
    if (d.x.sort == si && d.u.sort == sj) {
      oriented.emplace_back(n, d);
      symmetric.push_back(false);
    } else if (d.x.sort == sj && d.u.sort == si) {
      oriented.emplace_back(n, symmetric_of(d));
      symmetric.push_back(true);
    }
  }

  UnionFind uf;
  for (std::size_t k = 0; k < goal.x.size(); ++k) uf.merge(goal.x.vars[k], goal.u.vars[k]);
  auto goal_holds = [&] { return all_related(uf, goal.y, goal.v); };

  std::vector<bool> fired(oriented.size(), false);
  bool changed = true;
  while (changed && !goal_holds()) {
    changed = false;
    for (std::size_t n = 0; n < oriented.size() && !goal_holds(); ++n) {
      const PolyDep &d = oriented[n].second;
      if (fired[n] || !all_related(uf, d.x, d.u)) continue;
      fired[n] = true;
      TraceStep step{oriented[n].first, symmetric[n], d, {}};
      for (std::size_t k = 0; k < d.y.size(); ++k) {
        uf.merge(d.y.vars[k], d.v.vars[k]);
        step.merged.emplace_back(d.y.vars[k], d.v.vars[k]);
      }
      out.trace.push_back(std::move(step));
      changed = true;
    }
  }
  if (goal_holds()) {
    out.implied = true;
    return;
  }
  out.trace.clear();

  // Class values numbered by first appearance.
  Counterexample cex;
  std::map<int, ValueId> class_value;
  auto number = [&](const VarTuple &t) {
    if (t.sort != si && t.sort != sj) return;
    for (const auto &v : t.vars) {
      int r = uf.find(v);
      if (!class_value.count(r)) {
        class_value[r] = cex.structure.intern("c" + std::to_string(class_value.size()));
      }
    }
  };
  for (const VarTuple *t : {&goal.x, &goal.y, &goal.u, &goal.v}) number(*t);
  for (const auto &d : out.sigma) {
    for (const VarTuple *t : {&d.x, &d.y, &d.u, &d.v}) number(*t);
  }
  for (const auto &[sort, names] : variables_by_sort(out.sigma, goal)) {
    if (sort != si && sort != sj) {
      cex.polyteam.set(Team(sort, names));
      continue;
    }
    Tuple row;
    for (const auto &n : names) {
      Variable v{sort, n};
      ValueId val = class_value.at(uf.find(v));
      row.push_back(val);
      cex.classes[v] = cex.structure.value_name(val);
    }
    cex.polyteam.set(Team::from_rows(sort, names, {row}));
  }
  out.counterexample = std::move(cex);
}

} // namespace

ImplicationVerdict decide(const std::vector<PolyDep> &sigma, const PolyDep &goal) {
  validate_polydep(goal);
  for (const auto &d : sigma) validate_polydep(d);
  ImplicationVerdict out;
  out.sigma = sigma;
  out.goal = goal;
  out.same_sort = goal.x.sort == goal.u.sort;
  if (out.same_sort) {
    decide_same_sort(out);
  } else {
    decide_cross_sort(out);
  }
  return out;
}

bool verify_counterexample(const ImplicationVerdict &verdict) {
  if (!verdict.counterexample) return false;
  const Polyteam &x = verdict.counterexample->polyteam;
  try {
    for (const auto &d : verdict.sigma) {
      if (!check_polydep(x, d)) return false;
    }
    return !check_polydep(x, verdict.goal);
  } catch (const Error &) {
    return false;
  }
}

std::string to_string(Rule r) {
  switch (r) {
  case Rule::hypothesis: return "Hypothesis";
  case Rule::reflexivity: return "Reflexivity";
  case Rule::augmentation: return "Augmentation";
  case Rule::transitivity: return "Transitivity";
  case Rule::union_rule: return "Union";
  case Rule::symmetry: return "Symmetry";
  case Rule::weak_transitivity: return "Weak Transitivity";
  }
  return "?";
}

namespace {

void need(bool ok, Rule r, const std::string &why) {
  if (!ok) throw RuleApplicationError(to_string(r) + ": " + why);
}

VarTuple slice(const VarTuple &t, std::size_t from, std::size_t len) {
  VarTuple out{t.sort, {}};
  out.vars.assign(t.vars.begin() + static_cast<std::ptrdiff_t>(from),
                  t.vars.begin() + static_cast<std::ptrdiff_t>(from + len));
  return out;
}

} // namespace

PolyDep derive_rule(Rule rule, std::span<const PolyDep> premises, const RuleParams &params) {
  auto arity = [&](std::size_t n) {
    need(premises.size() == n, rule,
         "expects " + std::to_string(n) + " premise(s), got " + std::to_string(premises.size()));
  };
  switch (rule) {
  case Rule::hypothesis:
    throw RuleApplicationError("Hypothesis is not an inference rule");
  case Rule::reflexivity: {
    arity(0);
    const VarTuple &x = params.first, &y = params.second;
    need(x.size() == y.size(), rule, "tuples differ in length");
    need(params.k < x.size(), rule, "projection index out of range");
    return PolyDep{x, slice(x, params.k, 1), y, slice(y, params.k, 1)};
  }
  case Rule::augmentation: {
    arity(1);
    const PolyDep &p = premises[0];
    const VarTuple &z = params.first, &w = params.second;
    need(z.size() == w.size(), rule, "added tuples differ in length");
    need(z.sort == p.x.sort && w.sort == p.u.sort, rule, "added tuples have the wrong sorts");
    return PolyDep{concat(p.x, z), concat(p.y, z), concat(p.u, w), concat(p.v, w)};
  }
  case Rule::transitivity: {
    arity(2);
    const PolyDep &p = premises[0], &q = premises[1];
    need(q.x == p.y && q.u == p.v, rule, "second antecedent must be the first consequent");
    return PolyDep{p.x, q.y, p.u, q.v};
  }
  case Rule::union_rule: {
    arity(2);
    const PolyDep &p = premises[0], &q = premises[1];
    need(p.x == q.x && p.u == q.u, rule, "antecedents differ");
    return PolyDep{p.x, concat(p.y, q.y), p.u, concat(p.v, q.v)};
  }
  case Rule::symmetry:
    arity(1);
    return symmetric_of(premises[0]);
  case Rule::weak_transitivity: {
    arity(1);
    const PolyDep &p = premises[0];
    need(p.y.size() == p.v.size() && p.y.size() % 3 == 0, rule,
         "consequents must split into three equal parts");
    const std::size_t m = p.y.size() / 3;
    need(slice(p.y, m, m) == slice(p.y, 2 * m, m), rule, "left consequent is not y z z");
    need(slice(p.v, 0, m) == slice(p.v, m, m), rule, "right consequent is not v v w");
    return PolyDep{p.x, slice(p.y, 0, m), p.u, slice(p.v, 2 * m, m)};
  }
  }
  throw RuleApplicationError("unknown rule");
}

namespace {

class Builder {
public:
  explicit Builder(const std::vector<PolyDep> &sigma) : sigma_(sigma) {}

  std::size_t hypothesis(std::size_t idx) {
    DerivationStep s;
    s.rule = Rule::hypothesis;
    s.hypothesis = idx;
    s.conclusion = sigma_.at(idx);
    steps.push_back(std::move(s));
    return steps.size() - 1;
  }

  std::size_t apply(Rule r, std::vector<std::size_t> premises, RuleParams params = {}) {
    std::vector<PolyDep> ps;
    for (std::size_t p : premises) ps.push_back(steps.at(p).conclusion);
    DerivationStep s;
    s.rule = r;
    s.conclusion = derive_rule(r, ps, params);
    s.premises = std::move(premises);
    s.params = std::move(params);
    steps.push_back(std::move(s));
    return steps.size() - 1;
  }

  const PolyDep &at(std::size_t i) const { return steps.at(i).conclusion; }

  Derivation prefix(std::size_t last) const {
    return Derivation(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(last + 1));
  }

  Derivation steps;

private:
  const std::vector<PolyDep> &sigma_;
};

/// Fired atom as a step: the hypothesis, turned around when needed.
std::size_t fired_atom(Builder &b, const TraceStep &t) {
  std::size_t h = b.hypothesis(t.atom_index);
  return t.symmetric ? b.apply(Rule::symmetry, {h}) : h;
}

std::vector<Derivation> replay_cross(const ImplicationVerdict &v) {
  const PolyDep &goal = v.goal;
  Builder b(v.sigma);
  std::map<std::pair<Variable, Variable>, std::size_t> facts;
  std::map<Variable, std::set<Variable>> adj;
  auto add_edge = [&](const Variable &p, const Variable &q, std::size_t step) {
    facts.emplace(std::make_pair(p, q), step);
    adj[p].insert(q);
    adj[q].insert(p);
  };

  // =(x; p | u; q) for p ~ q, built along an alternating path of edges.
  auto fact = [&](const Variable &p, const Variable &q) -> std::size_t {
    if (auto it = facts.find({p, q}); it != facts.end()) return it->second;
    std::map<Variable, Variable> prev;
    std::deque<Variable> queue{p};
    prev.emplace(p, p);
    while (!queue.empty() && !prev.count(q)) {
      Variable cur = queue.front();
      queue.pop_front();
      for (const auto &nb : adj[cur]) {
        if (prev.emplace(nb, cur).second) queue.push_back(nb);
      }
    }
    if (!prev.count(q)) throw Error("internal: trace does not relate the goal variables");
    std::vector<Variable> path{q};
    while (path.back() != p) path.push_back(prev.at(path.back()));
    std::reverse(path.begin(), path.end()); // p, q0, p1, q1, ..., q
    std::size_t cur = facts.at({path[0], path[1]});
    for (std::size_t m = 2; m + 1 < path.size(); m += 2) {
      const Variable &c = path[m], &bq = path[m - 1], &d = path[m + 1];
      std::size_t u1 = b.apply(Rule::union_rule, {cur, facts.at({c, bq})});
      std::size_t u2 = b.apply(Rule::union_rule, {u1, facts.at({c, d})});
      cur = b.apply(Rule::weak_transitivity, {u2});
      facts.emplace(std::make_pair(p, d), cur);
    }
    return cur;
  };

  for (std::size_t k = 0; k < goal.x.size(); ++k) {
    std::size_t s = b.apply(Rule::reflexivity, {}, RuleParams{goal.x, goal.u, k});
    add_edge(goal.x.vars[k], goal.u.vars[k], s);
  }
  for (const TraceStep &t : v.trace) {
    const PolyDep &d = t.oriented;
    std::size_t atom = fired_atom(b, t);
    std::size_t lifted;
    if (d.x.empty()) {
      lifted = b.apply(Rule::augmentation, {atom}, RuleParams{goal.x, goal.u, 0});
    } else {
      std::size_t acc = fact(d.x.vars[0], d.u.vars[0]);
      for (std::size_t k = 1; k < d.x.size(); ++k) {
        acc = b.apply(Rule::union_rule, {acc, fact(d.x.vars[k], d.u.vars[k])});
      }
      lifted = b.apply(Rule::transitivity, {acc, atom});
    }
    const PolyDep &l = b.at(lifted);
    VarTuple ly = l.y, lv = l.v;
    for (std::size_t k = 0; k < d.y.size(); ++k) {
      if (facts.count({d.y.vars[k], d.v.vars[k]})) continue;
      std::size_t r = b.apply(Rule::reflexivity, {}, RuleParams{ly, lv, k});
      std::size_t f = b.apply(Rule::transitivity, {lifted, r});
      add_edge(d.y.vars[k], d.v.vars[k], f);
    }
  }

  std::vector<Derivation> out;
  for (std::size_t t = 0; t < goal.y.size(); ++t) {
    out.push_back(b.prefix(fact(goal.y.vars[t], goal.v.vars[t])));
  }
  return out;
}

std::vector<Derivation> replay_same_sort(const ImplicationVerdict &v) {
  const PolyDep &goal = v.goal;
  Builder b(v.sigma);
  std::optional<std::size_t> closure; // =(x; c | x; c)
  VarTuple c{goal.x.sort, {}};

  auto project = [&](const Variable &p) {
    auto it = std::find(c.vars.begin(), c.vars.end(), p);
    if (!closure || it == c.vars.end()) throw Error("internal: variable outside the closure");
    auto k = static_cast<std::size_t>(it - c.vars.begin());
    std::size_t r = b.apply(Rule::reflexivity, {}, RuleParams{c, c, k});
    return b.apply(Rule::transitivity, {*closure, r});
  };
  auto grow = [&](std::size_t step) {
    closure = closure ? b.apply(Rule::union_rule, {*closure, step}) : step;
    c = b.at(*closure).y;
  };

  for (std::size_t k = 0; k < goal.x.size(); ++k) {
    grow(b.apply(Rule::reflexivity, {}, RuleParams{goal.x, goal.x, k}));
  }
  for (const TraceStep &t : v.trace) {
    const PolyDep &d = t.oriented;
    std::size_t atom = b.hypothesis(t.atom_index);
    if (d.x.empty()) {
      grow(b.apply(Rule::augmentation, {atom}, RuleParams{goal.x, goal.x, 0}));
      continue;
    }
    std::size_t acc = project(d.x.vars[0]);
    for (std::size_t k = 1; k < d.x.size(); ++k) {
      acc = b.apply(Rule::union_rule, {acc, project(d.x.vars[k])});
    }
    grow(b.apply(Rule::transitivity, {acc, atom}));
  }

  std::vector<Derivation> out;
  for (const auto &y : goal.y.vars) out.push_back(b.prefix(project(y)));
  return out;
}

} // namespace

std::vector<Derivation> replay(const ImplicationVerdict &verdict) {
  if (!verdict.implied) throw Error("cannot replay a refuted implication");
  return verdict.same_sort ? replay_same_sort(verdict) : replay_cross(verdict);
}

bool check_derivation(const std::vector<PolyDep> &sigma, const Derivation &d,
                      const PolyDep &goal) {
  if (d.empty()) return false;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const DerivationStep &s = d[i];
    if (s.rule == Rule::hypothesis) {
      if (s.hypothesis >= sigma.size() || !(sigma[s.hypothesis] == s.conclusion)) return false;
      continue;
    }
    std::vector<PolyDep> ps;
    for (std::size_t p : s.premises) {
      if (p >= i) return false;
      ps.push_back(d[p].conclusion);
    }
    try {
      if (!(derive_rule(s.rule, ps, s.params) == s.conclusion)) return false;
    } catch (const RuleApplicationError &) {
      return false;
    }
  }
  return d.back().conclusion == goal;
}

} // namespace polyteam
