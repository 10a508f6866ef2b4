#pragma once

// Random instance generators and small independent oracles shared by the unit
// tests and the acceptance runner.

#include "polyteam/atoms.hpp"
#include "polyteam/core.hpp"
#include "polyteam/syntax.hpp"

#include <random>

namespace polyteam::testing {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng &rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool coin(Rng &rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

struct FormulaShape {
  /// Variables available per sort; the first one or two act as free ones.
  std::map<Sort, std::vector<std::string>> vars;
  int depth = 3;
  bool literals = true;
  bool relations = true; // R/1 and Q/2
  bool pdep = false, pinc = false, pexc = false, pind = false;
  /// Atoms stay inside one sort.
  bool uni_atoms = false;
  bool global_or = true;
  bool local_or = true;
  /// Local disjunctions over two sorts at once.
  bool wide_local_or = false;
  bool quantifiers = true;
  /// Restrict everything to the first sort.
  bool single_sort = false;
};

class FormulaGenerator {
public:
  FormulaGenerator(FormulaShape shape, Rng &rng) : shape_(std::move(shape)), rng_(rng) {
    for (const auto &[s, v] : shape_.vars) sorts_.push_back(s);
    if (shape_.single_sort) sorts_.resize(1);
  }

  FormulaPtr generate() { return node(shape_.depth); }

  const std::vector<Sort> &sorts() const { return sorts_; }

private:
  Sort any_sort() { return sorts_[pick(rng_, sorts_.size())]; }

  Variable any_var(const Sort &s) {
    const auto &names = shape_.vars.at(s);
    return Variable{s, names[pick(rng_, names.size())]};
  }

  VarTuple tuple(const Sort &s, std::size_t len) {
    VarTuple t{s, {}};
    for (std::size_t i = 0; i < len; ++i) t.vars.push_back(any_var(s));
    return t;
  }

  Sort other_sort(const Sort &s) {
    if (shape_.uni_atoms || sorts_.size() == 1) return s;
    return any_sort();
  }

  FormulaPtr leaf() {
    std::vector<int> kinds;
    if (shape_.literals) kinds.insert(kinds.end(), {0, 1});
    if (shape_.relations) kinds.insert(kinds.end(), {2, 3});
    if (shape_.pdep) kinds.insert(kinds.end(), {4, 4});
    if (shape_.pinc) kinds.insert(kinds.end(), {5, 5});
    if (shape_.pexc) kinds.insert(kinds.end(), {6, 6});
    if (shape_.pind) kinds.push_back(7);
    if (kinds.empty()) return make_top();
    Sort s = any_sort();
    int kind = kinds[pick(rng_, kinds.size())];
    switch (kind) {
    case 0:
      return make_eq(any_var(s), any_var(s));
    case 1:
      return make_neq(any_var(s), any_var(s));
    case 2:
    case 3: {
      bool binary = coin(rng_);
      VarTuple args = tuple(s, binary ? 2 : 1);
      std::string name = binary ? "Q" : "R";
      return coin(rng_) ? make_rel(name, args) : make_neg_rel(name, args);
    }
    case 4: {
      Sort t = other_sort(s);
      std::size_t n = pick(rng_, 2), m = 1 + pick(rng_, 2);
      VarTuple x = tuple(s, n), y = tuple(s, m);
      if (t == s) return make_atom(PolyDep{x, y, x, y});
      return make_atom(PolyDep{x, y, tuple(t, n), tuple(t, m)});
    }
    case 5:
    case 6: {
      Sort t = other_sort(s);
      std::size_t n = 1 + pick(rng_, 2);
      VarTuple l = tuple(s, n), r = tuple(t, n);
      if (kind == 5) return make_atom(PolyInc{l, r});
      return make_atom(PolyExc{l, r});
    }
    default: {
      Sort j = other_sort(s), k = other_sort(s);
      std::size_t n = pick(rng_, 2), m = pick(rng_, 2), p = pick(rng_, 2);
      PolyInd a{tuple(s, n), tuple(j, n), tuple(k, n), tuple(s, m), tuple(k, m), tuple(j, p),
                tuple(k, p)};
      return make_atom(std::move(a));
    }
    }
  }

  FormulaPtr node(int depth) {
    if (depth <= 0 || coin(rng_, 0.25)) return leaf();
    std::vector<int> kinds{0, 0};
    if (shape_.global_or) kinds.push_back(1);
    if (shape_.local_or) kinds.push_back(2);
    if (shape_.quantifiers) kinds.insert(kinds.end(), {3, 4});
    switch (kinds[pick(rng_, kinds.size())]) {
    case 0:
      return make_and(node(depth - 1), node(depth - 1));
    case 1:
      return make_or(node(depth - 1), node(depth - 1));
    case 2: {
      std::set<Sort> idx{any_sort()};
      if (shape_.wide_local_or && sorts_.size() > 1 && coin(rng_)) idx.insert(any_sort());
      return make_or_local(idx, node(depth - 1), node(depth - 1));
    }
    case 3:
      return make_exists(any_var(any_sort()), node(depth - 1));
    default:
      return make_forall(any_var(any_sort()), node(depth - 1));
    }
  }

  FormulaShape shape_;
  Rng &rng_;
  std::vector<Sort> sorts_;
};

/// Random structure over {0..n-1} with R/1 and Q/2.
inline Structure random_structure(Rng &rng, std::size_t n) {
  Structure a = Structure::with_domain_size(n);
  a.add_relation("R", 1);
  a.add_relation("Q", 2);
  for (ValueId v = 0; v < n; ++v) {
    if (coin(rng)) a.add_tuple("R", {v});
    for (ValueId w = 0; w < n; ++w) {
      if (coin(rng)) a.add_tuple("Q", {v, w});
    }
  }
  return a;
}

inline Team random_team(Rng &rng, const Sort &s, const std::vector<std::string> &vars,
                        std::size_t values, std::size_t max_rows) {
  std::size_t rows = pick(rng, max_rows + 1);
  std::vector<Tuple> out;
  for (std::size_t r = 0; r < rows; ++r) {
    Tuple t;
    for (std::size_t i = 0; i < vars.size(); ++i) t.push_back(static_cast<ValueId>(pick(rng, values)));
    out.push_back(std::move(t));
  }
  return Team::from_rows(s, vars, out);
}

inline Polyteam random_polyteam(Rng &rng, const std::map<Sort, std::vector<std::string>> &doms,
                                std::size_t values, std::size_t max_rows) {
  Polyteam x;
  for (const auto &[s, vars] : doms) x.set(random_team(rng, s, vars, values, max_rows));
  return x;
}

/// Keeps each row with probability 1/2.
inline Team random_subteam(Rng &rng, const Team &t) {
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (coin(rng)) keep.push_back(r);
  }
  return t.select(keep);
}

/// Ordinary first-order truth of a single-sorted formula under one
/// assignment. Atoms are not allowed.
inline bool tarski(const Structure &a, Assignment s, const Formula &f) {
  switch (f.kind) {
  case NodeKind::top:
    return true;
  case NodeKind::eq:
    return s.at(f.x.name) == s.at(f.y.name);
  case NodeKind::neq:
    return s.at(f.x.name) != s.at(f.y.name);
  case NodeKind::rel:
  case NodeKind::neg_rel: {
    Tuple t;
    for (const auto &v : f.args.vars) t.push_back(s.at(v.name));
    const Relation *r = a.relation(f.relation);
    bool in = r && r->tuples.count(t);
    return in == (f.kind == NodeKind::rel);
  }
  case NodeKind::conj:
    return tarski(a, s, *f.left) && tarski(a, s, *f.right);
  case NodeKind::or_global:
  case NodeKind::or_local:
    return tarski(a, s, *f.left) || tarski(a, s, *f.right);
  case NodeKind::exists:
  case NodeKind::forall: {
    bool want_all = f.kind == NodeKind::forall;
    for (ValueId v : a.domain()) {
      s[f.x.name] = v;
      if (tarski(a, s, *f.left) != want_all) return !want_all;
    }
    return want_all;
  }
  case NodeKind::atom:
    break;
  }
  throw Error("tarski: atoms are not first-order");
}

/// Textbook attribute closure over bitmasks.
struct Fd {
  unsigned lhs = 0, rhs = 0;
};

inline unsigned attribute_closure(unsigned seed, const std::vector<Fd> &fds) {
  unsigned c = seed;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto &fd : fds) {
      if ((fd.lhs & c) == fd.lhs && (fd.rhs & ~c)) {
        c |= fd.rhs;
        grew = true;
      }
    }
  }
  return c;
}

/// Random atom set for the implication engine: two sorts S and T with up to
/// `vars` variables each.
struct ImplicationInstance {
  std::vector<PolyDep> sigma;
  PolyDep goal;
};

inline VarTuple random_tuple(Rng &rng, const Sort &s, std::size_t len, std::size_t vars) {
  static const char *names[] = {"a", "b", "c", "d", "e", "f"};
  VarTuple t{s, {}};
  for (std::size_t i = 0; i < len; ++i) t.vars.push_back(Variable{s, names[pick(rng, vars)]});
  return t;
}

inline PolyDep random_polydep(Rng &rng, const Sort &i, const Sort &j, std::size_t vars) {
  std::size_t n = pick(rng, 3), m = 1 + pick(rng, 2);
  VarTuple x = random_tuple(rng, i, n, vars), y = random_tuple(rng, i, m, vars);
  if (i == j) return PolyDep{x, y, x, y};
  return PolyDep{x, y, random_tuple(rng, j, n, vars), random_tuple(rng, j, m, vars)};
}

inline ImplicationInstance random_implication(Rng &rng) {
  const Sort s{"S"}, t{"T"};
  std::size_t vars = 1 + pick(rng, 4);
  auto sort_pair = [&]() -> std::pair<Sort, Sort> {
    switch (pick(rng, 4)) {
    case 0: return {s, s};
    case 1: return {t, t};
    case 2: return {s, t};
    default: return {t, s};
    }
  };
  ImplicationInstance inst;
  std::size_t atoms = pick(rng, 5); // plus the goal: at most 5 atoms
  for (std::size_t k = 0; k < atoms; ++k) {
    auto [i, j] = sort_pair();
    inst.sigma.push_back(random_polydep(rng, i, j, vars));
  }
  auto [i, j] = sort_pair();
  inst.goal = random_polydep(rng, i, j, vars);
  return inst;
}

} // namespace polyteam::testing
