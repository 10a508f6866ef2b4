#include "polyteam/evaluator.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>

namespace polyteam {

void EvalConfig::validate() const {
  if (max_expanded_team_rows == 0 || max_split_assignments == 0 ||
      timeout.count() <= 0) {
    throw Error("evaluation caps must be positive");
  }
}

std::string to_string(Verdict v) {
  switch (v) {
  case Verdict::satisfied: return "true";
  case Verdict::violated: return "false";
  case Verdict::resource_exhausted: return "resource_exhausted";
  }
  return "false";
}

namespace {

struct ResourceExhausted {
  std::string reason;
};

using Teams = std::vector<Team>;

struct Node {
  NodeKind kind = NodeKind::top;
  const Formula *f = nullptr;
  int left = -1;
  int right = -1;
  int sort = -1; // literal sort, or quantifier sort
  std::vector<Variable> block; // bound variables of a quantifier
  std::vector<int> mentioned;
  std::vector<std::vector<std::string>> fv; // indexed by sort id
  std::vector<char> dec, down, up;          // indexed by sort id
  std::vector<int> split;                   // sorts a disjunction splits
  // Existential blocks whose body is a conjunction of upward closed and
  // downward closed parts in the quantified sort.
  std::vector<int> up_parts, down_parts;
};

bool mentions(const Node &n, int k) {
  return std::binary_search(n.mentioned.begin(), n.mentioned.end(), k);
}

Team empty_like(const Team &x, std::vector<std::string> domain) {
  return Team(x.sort(), std::move(domain));
}

class Evaluator {
public:
  Evaluator(const Structure &a, const AtomRegistry *registry, const EvalConfig &cfg,
            std::vector<Sort> sorts)
      : a_(a), registry_(registry), cfg_(cfg), sorts_(std::move(sorts)),
        deadline_(std::chrono::steady_clock::now() + cfg.timeout) {}

  int compile(const FormulaPtr &f);

  bool run(int root, const Teams &teams) { return eval(root, teams); }

  const Node &node(int n) const { return nodes_[n]; }
  EvalStats stats;

private:
  int sort_id(const Sort &s) const {
    auto it = std::lower_bound(sorts_.begin(), sorts_.end(), s);
    return static_cast<int>(it - sorts_.begin());
  }
  void compute_flags(Node &n);
  void collect_conjuncts(int n, std::vector<int> &out) const;

  void tick() {
    ++stats.nodes_visited;
    if ((stats.nodes_visited & 1023) == 0 &&
        std::chrono::steady_clock::now() > deadline_) {
      throw ResourceExhausted{"timeout"};
    }
  }

  std::vector<std::uint32_t> memo_key(int n, std::size_t suffix, const Teams &t) const;
  Teams restrict(const Node &nd, const Teams &t) const;

  bool eval(int n, const Teams &t);
  bool eval_uncached(int n, const Teams &t);
  bool eval_literal(const Node &nd, const Teams &t) const;
  bool eval_atom(const Node &nd, const Teams &t) const;
  bool eval_or(const Node &nd, const Teams &t);
  bool eval_block(int n, std::size_t suffix, const Teams &t);
  bool eval_block_uncached(int n, std::size_t suffix, const Teams &t);
  bool eval_all(const std::vector<int> &parts, const Teams &t) {
    for (int p : parts) {
      if (!eval(p, t)) return false;
    }
    return true;
  }

  std::vector<Tuple> all_tuples(std::size_t m) const;
  Team extended(const Team &x, const std::vector<std::string> &ext_domain,
                const std::vector<std::pair<std::size_t, const Tuple *>> &rows) const;

  const Structure &a_;
  const AtomRegistry *registry_;
  EvalConfig cfg_;
  std::vector<Sort> sorts_;
  std::vector<Node> nodes_;
  std::unordered_map<std::vector<std::uint32_t>, bool, TupleHash> memo_;
  std::chrono::steady_clock::time_point deadline_;
};

int Evaluator::compile(const FormulaPtr &f) {
  Node nd;
  nd.kind = f->kind;
  nd.f = f.get();

  switch (f->kind) {
  case NodeKind::top:
  case NodeKind::atom:
    break;
  case NodeKind::eq:
  case NodeKind::neq:
    nd.sort = sort_id(f->x.sort);
    break;
  case NodeKind::rel:
  case NodeKind::neg_rel:
    nd.sort = sort_id(f->args.sort);
    break;
  case NodeKind::conj:
  case NodeKind::or_global:
  case NodeKind::or_local:
    nd.left = compile(f->left);
    nd.right = compile(f->right);
    break;
  case NodeKind::forall: {
    auto fv = free_variables(*f->left);
    auto it = fv.find(f->x.sort);
    if (it == fv.end() || !it->second.count(f->x.name)) return compile(f->left);
    nd.sort = sort_id(f->x.sort);
    nd.block = {f->x};
    nd.left = compile(f->left);
    break;
  }
  case NodeKind::exists: {
    // Consecutive existentials of one sort over distinct variables choose a
    // nonempty set of value tuples per row, so they are searched together.
    std::vector<Variable> vars;
    const Formula *cur = f.get();
    FormulaPtr body = f;
    while (cur->kind == NodeKind::exists && cur->x.sort == f->x.sort &&
           std::find(vars.begin(), vars.end(), cur->x) == vars.end()) {
      vars.push_back(cur->x);
      body = cur->left;
      cur = body.get();
    }
    auto fv = free_variables(*body);
    auto &names = fv[f->x.sort];
    std::erase_if(vars, [&](const Variable &v) { return !names.count(v.name); });
    if (vars.empty()) return compile(body);
    nd.sort = sort_id(f->x.sort);
    nd.block = std::move(vars);
    nd.left = compile(body);
    break;
  }
  }

  for (const Sort &s : mentioned_sorts(*f)) nd.mentioned.push_back(sort_id(s));
  std::sort(nd.mentioned.begin(), nd.mentioned.end());
  nd.fv.assign(sorts_.size(), {});
  for (const auto &[s, names] : free_variables(*f)) {
    nd.fv[sort_id(s)].assign(names.begin(), names.end());
  }
  if (f->kind == NodeKind::or_global) {
    nd.split = nd.mentioned;
  } else if (f->kind == NodeKind::or_local) {
    for (const Sort &s : f->sorts) {
      int k = sort_id(s);
      if (k < static_cast<int>(sorts_.size()) && sorts_[k] == s && mentions(nd, k)) {
        nd.split.push_back(k);
      }
    }
  }
  compute_flags(nd);

  if (nd.kind == NodeKind::exists) {
    std::vector<int> parts;
    collect_conjuncts(nd.left, parts);
    bool ok = true;
    for (int p : parts) {
      const Node &pn = nodes_[p];
      if (pn.up[nd.sort]) {
        nd.up_parts.push_back(p);
      } else if (pn.down[nd.sort]) {
        nd.down_parts.push_back(p);
      } else {
        ok = false;
      }
    }
    if (!ok || nd.up_parts.empty() || nd.down_parts.empty()) {
      nd.up_parts.clear();
      nd.down_parts.clear();
    }
  }

  nodes_.push_back(std::move(nd));
  return static_cast<int>(nodes_.size() - 1);
}

void Evaluator::collect_conjuncts(int n, std::vector<int> &out) const {
  const Node &nd = nodes_[n];
  if (nd.kind == NodeKind::conj) {
    collect_conjuncts(nd.left, out);
    collect_conjuncts(nd.right, out);
  } else {
    out.push_back(n);
  }
}

struct Closure {
  bool dec, down, up;
};

Closure atom_closure(const AtomInstance &atom, const std::vector<Sort> &sorts, int k) {
  auto id = [&](const VarTuple &t) {
    return static_cast<int>(std::lower_bound(sorts.begin(), sorts.end(), t.sort) -
                            sorts.begin());
  };
  return std::visit(
      [&](const auto &at) -> Closure {
        using T = std::decay_t<decltype(at)>;
        if constexpr (std::is_same_v<T, PolyDep>) {
          bool same = id(at.x) == id(at.u);
          return {!same, true, false};
        } else if constexpr (std::is_same_v<T, PolyExc>) {
          bool same = id(at.lhs) == id(at.rhs);
          return {!same, true, false};
        } else if constexpr (std::is_same_v<T, PolyInc>) {
          int i = id(at.lhs), j = id(at.rhs);
          if (i == j) return {false, false, false};
          if (k == i) return {true, true, false};
          return {false, false, true};
        } else if constexpr (std::is_same_v<T, PolyInd>) {
          int i = id(at.x), j = id(at.a), w = id(at.u);
          bool dec = k != w && (k != i || (i != j && i != w)) &&
                     (k != j || (j != i && j != w));
          bool down = k != w;
          bool up = k == w && w != i && w != j;
          return {dec, down, up};
        } else {
          return {false, false, false};
        }
      },
      atom);
}

void Evaluator::compute_flags(Node &nd) {
  const std::size_t s = sorts_.size();
  nd.dec.assign(s, 1);
  nd.down.assign(s, 1);
  nd.up.assign(s, 1);
  for (int k : nd.mentioned) {
    Closure c{true, true, true};
    switch (nd.kind) {
    case NodeKind::top:
      break;
    case NodeKind::eq:
    case NodeKind::neq:
    case NodeKind::rel:
    case NodeKind::neg_rel:
      c = {true, true, false};
      break;
    case NodeKind::atom:
      c = atom_closure(*nd.f->atom, sorts_, k);
      break;
    case NodeKind::conj:
    case NodeKind::or_global:
    case NodeKind::or_local: {
      const Node &l = nodes_[nd.left], &r = nodes_[nd.right];
      c = {l.dec[k] && r.dec[k], l.down[k] && r.down[k], l.up[k] && r.up[k]};
      if (nd.kind != NodeKind::conj) {
        for (int j : nd.split) {
          if (j != k) c.dec = false;
        }
      }
      break;
    }
    case NodeKind::forall: {
      const Node &b = nodes_[nd.left];
      c = {static_cast<bool>(b.dec[k]), static_cast<bool>(b.down[k]),
           static_cast<bool>(b.up[k])};
      break;
    }
    case NodeKind::exists: {
      const Node &b = nodes_[nd.left];
      c = {nd.sort == k && b.dec[k], static_cast<bool>(b.down[k]),
           static_cast<bool>(b.up[k])};
      break;
    }
    }
    nd.dec[k] = c.dec;
    nd.down[k] = c.down;
    nd.up[k] = c.up;
  }
}

std::vector<std::uint32_t> Evaluator::memo_key(int n, std::size_t suffix,
                                               const Teams &t) const {
  std::vector<std::uint32_t> key{static_cast<std::uint32_t>(n),
                                 static_cast<std::uint32_t>(suffix)};
  for (int k : nodes_[n].mentioned) {
    const Team &x = t[k];
    key.push_back(static_cast<std::uint32_t>(x.size()));
    key.insert(key.end(), x.cells().begin(), x.cells().end());
  }
  return key;
}

Teams Evaluator::restrict(const Node &nd, const Teams &t) const {
  Teams out = t;
  for (int k : nd.mentioned) {
    if (out[k].domain() != nd.fv[k]) out[k] = out[k].project(nd.fv[k]);
  }
  return out;
}

bool Evaluator::eval(int n, const Teams &t) {
  tick();
  const Node &nd = nodes_[n];
  switch (nd.kind) {
  case NodeKind::top:
    return true;
  case NodeKind::eq:
  case NodeKind::neq:
  case NodeKind::rel:
  case NodeKind::neg_rel:
    return eval_literal(nd, t);
  case NodeKind::atom:
    return eval_atom(nd, t);
  case NodeKind::conj:
    return eval(nd.left, t) && eval(nd.right, t);
  default:
    break;
  }
  Teams r = restrict(nd, t);
  if (!cfg_.memoization) return eval_uncached(n, r);
  auto key = memo_key(n, 0, r);
  if (auto it = memo_.find(key); it != memo_.end()) {
    ++stats.cache_hits;
    return it->second;
  }
  bool v = eval_uncached(n, r);
  memo_.emplace(std::move(key), v);
  return v;
}

bool Evaluator::eval_uncached(int n, const Teams &t) {
  const Node &nd = nodes_[n];
  switch (nd.kind) {
  case NodeKind::or_global:
  case NodeKind::or_local:
    return eval_or(nd, t);
  case NodeKind::forall: {
    const Team &x = t[nd.sort];
    if (x.size() * a_.domain_size() > cfg_.max_expanded_team_rows) {
      throw ResourceExhausted{"max_expanded_team_rows"};
    }
    Teams e = t;
    e[nd.sort] = x.expand_all(nd.block[0], a_.domain());
    return eval(nd.left, e);
  }
  case NodeKind::exists:
    return eval_block_uncached(n, 0, t);
  default:
    throw Error("internal: unexpected node kind");
  }
}

bool Evaluator::eval_literal(const Node &nd, const Teams &t) const {
  const Formula &f = *nd.f;
  const Team &x = t[nd.sort];
  if (f.kind == NodeKind::eq || f.kind == NodeKind::neq) {
    std::size_t cx = x.require_column(f.x.name), cy = x.require_column(f.y.name);
    bool want = f.kind == NodeKind::eq;
    for (std::size_t r = 0; r < x.size(); ++r) {
      auto row = x.row(r);
      if ((row[cx] == row[cy]) != want) return false;
    }
    return true;
  }
  const Relation *rel = a_.relation(f.relation);
  if (!rel) throw Error("unknown relation symbol '" + f.relation + "'");
  if (rel->arity != f.args.size()) {
    throw Error("relation '" + f.relation + "' has arity " + std::to_string(rel->arity));
  }
  std::vector<std::size_t> cols;
  for (const auto &v : f.args.vars) cols.push_back(x.require_column(v.name));
  bool want = f.kind == NodeKind::rel;
  Tuple tup(cols.size());
  for (std::size_t r = 0; r < x.size(); ++r) {
    auto row = x.row(r);
    for (std::size_t i = 0; i < cols.size(); ++i) tup[i] = row[cols[i]];
    if ((rel->tuples.count(tup) != 0) != want) return false;
  }
  return true;
}

bool Evaluator::eval_atom(const Node &nd, const Teams &t) const {
  Polyteam p;
  for (int k : nd.mentioned) p.set(t[k]);
  return check_atom(a_, p, *nd.f->atom, registry_);
}

bool Evaluator::eval_or(const Node &nd, const Teams &t) {
  const Node &ln = nodes_[nd.left], &rn = nodes_[nd.right];
  if (nd.split.empty()) return eval(nd.left, t) && eval(nd.right, t);

  if (nd.split.size() == 1) {
    const int k = nd.split[0];
    const Team &x = t[k];
    Teams e = t;
    e[k] = empty_like(x, x.domain());
    if (ln.dec[k] && rn.dec[k]) {
      if (!eval(nd.left, e) || !eval(nd.right, e)) return false;
      for (std::size_t r = 0; r < x.size(); ++r) {
        std::size_t idx[] = {r};
        e[k] = x.select(idx);
        if (!eval(nd.left, e) && !eval(nd.right, e)) return false;
      }
      return true;
    }
    for (int side = 0; side < 2; ++side) {
      const Node &dn = side == 0 ? ln : rn;
      const Node &on = side == 0 ? rn : ln;
      int d = side == 0 ? nd.left : nd.right, o = side == 0 ? nd.right : nd.left;
      if (!dn.dec[k] || !on.down[k]) continue;
      e[k] = empty_like(x, x.domain());
      if (!eval(d, e)) return false;
      std::vector<std::size_t> bad;
      for (std::size_t r = 0; r < x.size(); ++r) {
        std::size_t idx[] = {r};
        e[k] = x.select(idx);
        if (!eval(d, e)) bad.push_back(r);
      }
      e[k] = x.select(bad);
      return eval(o, e);
    }
  }

  enum class Mode { fixed, left_subsets, right_subsets, partition, cover };
  struct Plan {
    int sort;
    Mode mode;
    std::uint64_t count = 1;
  };
  Teams ty = t, tz = t;
  std::vector<Plan> search;
  std::size_t rows = 0;
  for (int k : nd.split) {
    const Team &x = t[k];
    bool lu = ln.up[k], ru = rn.up[k], ld = ln.down[k], rd = rn.down[k];
    Team none = empty_like(x, x.domain());
    if (lu && ru) {
      continue;
    } else if (ld && ru) {
      ty[k] = none;
    } else if (lu && rd) {
      tz[k] = none;
    } else {
      Mode m = lu   ? Mode::right_subsets
               : ru ? Mode::left_subsets
               : (ld || rd) ? Mode::partition
                            : Mode::cover;
      rows += x.size();
      if (rows > cfg_.max_split_assignments) throw ResourceExhausted{"max_split_assignments"};
      std::uint64_t c = 1;
      for (std::size_t i = 0; i < x.size(); ++i) c *= (m == Mode::cover ? 3 : 2);
      search.push_back({k, m, c});
    }
  }

  // One partitioned sort with both sides downward closed: assign rows one at
  // a time and prune as soon as either side fails.
  if (search.size() == 1 && search[0].mode == Mode::partition && ln.down[search[0].sort] &&
      rn.down[search[0].sort]) {
    const int k = search[0].sort;
    const Team &x = t[k];
    std::vector<std::size_t> lrows, rrows;
    auto side_ok = [&](bool left) {
      Teams &tt = left ? ty : tz;
      tt[k] = x.select(left ? lrows : rrows);
      return eval(left ? nd.left : nd.right, tt);
    };
    if (!side_ok(true) || !side_ok(false)) return false;
    std::function<bool(std::size_t)> place = [&](std::size_t r) -> bool {
      if (r == x.size()) return true;
      for (bool left : {true, false}) {
        auto &v = left ? lrows : rrows;
        v.push_back(r);
        if (side_ok(left) && place(r + 1)) return true;
        v.pop_back();
      }
      return false;
    };
    return place(0);
  }

  std::vector<std::uint64_t> idx(search.size(), 0);
  while (true) {
    tick();
    for (std::size_t p = 0; p < search.size(); ++p) {
      const Plan &pl = search[p];
      const Team &x = t[pl.sort];
      std::vector<std::size_t> ys, zs;
      std::uint64_t code = idx[p];
      for (std::size_t r = 0; r < x.size(); ++r) {
        unsigned digit;
        if (pl.mode == Mode::cover) {
          digit = code % 3;
          code /= 3;
        } else {
          digit = code % 2;
          code /= 2;
        }
        switch (pl.mode) {
        case Mode::left_subsets:
          zs.push_back(r);
          if (digit) ys.push_back(r);
          break;
        case Mode::right_subsets:
          ys.push_back(r);
          if (digit) zs.push_back(r);
          break;
        case Mode::partition:
          (digit ? ys : zs).push_back(r);
          break;
        case Mode::cover:
          if (digit != 2) ys.push_back(r);
          if (digit != 1) zs.push_back(r);
          break;
        case Mode::fixed:
          break;
        }
      }
      ty[pl.sort] = x.select(ys);
      tz[pl.sort] = x.select(zs);
    }
    if (eval(nd.left, ty) && eval(nd.right, tz)) return true;
    std::size_t p = 0;
    while (p < search.size() && ++idx[p] == search[p].count) idx[p++] = 0;
    if (p == search.size()) return false;
  }
}

std::vector<Tuple> Evaluator::all_tuples(std::size_t m) const {
  const auto &dom = a_.domain();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < m; ++i) {
    total *= dom.size();
    if (total > cfg_.max_expanded_team_rows) throw ResourceExhausted{"max_expanded_team_rows"};
  }
  std::vector<Tuple> out;
  out.reserve(total);
  Tuple cur(m, 0);
  std::vector<std::size_t> pos(m, 0);
  for (std::uint64_t c = 0; c < total; ++c) {
    for (std::size_t i = 0; i < m; ++i) cur[i] = dom[pos[i]];
    out.push_back(cur);
    for (std::size_t i = m; i-- > 0;) {
      if (++pos[i] < dom.size()) break;
      pos[i] = 0;
    }
  }
  return out;
}

Team Evaluator::extended(const Team &x, const std::vector<std::string> &ext_domain,
                         const std::vector<std::pair<std::size_t, const Tuple *>> &rows) const {
  std::vector<Tuple> out;
  out.reserve(rows.size());
  for (const auto &[r, ext] : rows) {
    auto src = x.row(r);
    Tuple t(src.begin(), src.end());
    t.insert(t.end(), ext->begin(), ext->end());
    out.push_back(std::move(t));
  }
  return Team::from_rows(x.sort(), ext_domain, out);
}

bool Evaluator::eval_block(int n, std::size_t suffix, const Teams &t) {
  tick();
  if (!cfg_.memoization) return eval_block_uncached(n, suffix, t);
  auto key = memo_key(n, suffix, t);
  if (auto it = memo_.find(key); it != memo_.end()) {
    ++stats.cache_hits;
    return it->second;
  }
  bool v = eval_block_uncached(n, suffix, t);
  memo_.emplace(std::move(key), v);
  return v;
}

bool Evaluator::eval_block_uncached(int n, std::size_t suffix, const Teams &t) {
  const Node &nd = nodes_[n];
  const Node &body = nodes_[nd.left];
  const int k = nd.sort;
  const Team &x = t[k];
  const std::vector<Variable> vars(nd.block.begin() + static_cast<std::ptrdiff_t>(suffix),
                                   nd.block.end());
  std::vector<std::string> ext_domain = x.domain();
  for (const auto &v : vars) ext_domain.push_back(v.name);

  Teams e = t;
  if (x.empty()) {
    std::sort(ext_domain.begin(), ext_domain.end());
    e[k] = empty_like(x, ext_domain);
    return eval(nd.left, e);
  }

  // Row-wise: each row needs one good extension.
  if (body.dec[k]) {
    std::sort(ext_domain.begin(), ext_domain.end());
    e[k] = empty_like(x, ext_domain);
    if (!eval(nd.left, e)) return false;
    ext_domain = x.domain();
    for (const auto &v : vars) ext_domain.push_back(v.name);
    auto exts = all_tuples(vars.size());
    for (std::size_t r = 0; r < x.size(); ++r) {
      bool found = false;
      for (const Tuple &ext : exts) {
        e[k] = extended(x, ext_domain, {{r, &ext}});
        if (eval(nd.left, e)) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return true;
  }

  // Upward closed: the full extension is the best witness.
  if (body.up[k]) {
    auto exts = all_tuples(vars.size());
    if (x.size() * exts.size() > cfg_.max_expanded_team_rows) {
      throw ResourceExhausted{"max_expanded_team_rows"};
    }
    std::vector<std::pair<std::size_t, const Tuple *>> rows;
    for (std::size_t r = 0; r < x.size(); ++r) {
      for (const Tuple &ext : exts) rows.emplace_back(r, &ext);
    }
    e[k] = extended(x, ext_domain, rows);
    return eval(nd.left, e);
  }

  // Downward closed: a witness can be shrunk to one extension per row.
  if (body.down[k]) {
    auto exts = all_tuples(vars.size());
    std::vector<std::vector<const Tuple *>> options(x.size());
    for (std::size_t r = 0; r < x.size(); ++r) {
      for (const Tuple &ext : exts) {
        e[k] = extended(x, ext_domain, {{r, &ext}});
        if (eval(nd.left, e)) options[r].push_back(&ext);
      }
      if (options[r].empty()) return false;
    }
    std::vector<std::pair<std::size_t, const Tuple *>> chosen;
    std::function<bool(std::size_t)> pick = [&](std::size_t r) -> bool {
      if (r == x.size()) return true;
      for (const Tuple *ext : options[r]) {
        chosen.emplace_back(r, ext);
        bool ok = r == 0;
        if (!ok) {
          e[k] = extended(x, ext_domain, chosen);
          ok = eval(nd.left, e);
        }
        if (ok && pick(r + 1)) return true;
        chosen.pop_back();
      }
      return false;
    };
    return pick(0);
  }

  // Upward part and downward part: grow sets that keep the downward part
  // true, bounded by the upward part on everything still available.
  if (!nd.up_parts.empty()) {
    auto exts = all_tuples(vars.size());
    std::vector<std::pair<std::size_t, const Tuple *>> cands;
    std::vector<std::size_t> per_row(x.size(), 0);
    for (std::size_t r = 0; r < x.size(); ++r) {
      for (const Tuple &ext : exts) {
        e[k] = extended(x, ext_domain, {{r, &ext}});
        if (eval_all(nd.down_parts, e)) {
          cands.emplace_back(r, &ext);
          ++per_row[r];
        }
      }
      if (per_row[r] == 0) return false;
    }
    if (cands.size() > cfg_.max_expanded_team_rows) {
      throw ResourceExhausted{"max_expanded_team_rows"};
    }
    std::vector<std::pair<std::size_t, const Tuple *>> chosen;
    std::vector<std::size_t> chosen_per_row(x.size(), 0);
    std::vector<std::size_t> left_per_row = per_row;
    std::function<bool(std::size_t)> grow = [&](std::size_t i) -> bool {
      for (std::size_t r = 0; r < x.size(); ++r) {
        if (chosen_per_row[r] + left_per_row[r] == 0) return false;
      }
      auto bound = chosen;
      bound.insert(bound.end(), cands.begin() + static_cast<std::ptrdiff_t>(i), cands.end());
      e[k] = extended(x, ext_domain, bound);
      if (!eval_all(nd.up_parts, e)) return false;
      if (i == cands.size()) return true;

      const std::size_t r = cands[i].first;
      --left_per_row[r];
      chosen.push_back(cands[i]);
      e[k] = extended(x, ext_domain, chosen);
      if (eval_all(nd.down_parts, e)) {
        ++chosen_per_row[r];
        if (grow(i + 1)) return true;
        --chosen_per_row[r];
      }
      chosen.pop_back();
      bool found = grow(i + 1);
      ++left_per_row[r];
      return found;
    };
    return grow(0);
  }

  // General case: enumerate a nonempty value set for the first variable per
  // row, smallest sets first.
  const auto &dom = a_.domain();
  if (x.size() > cfg_.max_split_assignments || dom.size() >= 31) {
    throw ResourceExhausted{"max_split_assignments"};
  }
  std::vector<std::vector<ValueId>> subsets;
  for (std::uint32_t mask = 1; mask < (1u << dom.size()); ++mask) {
    std::vector<ValueId> s;
    for (std::size_t b = 0; b < dom.size(); ++b) {
      if (mask & (1u << b)) s.push_back(dom[b]);
    }
    subsets.push_back(std::move(s));
  }
  std::stable_sort(subsets.begin(), subsets.end(),
                   [](const auto &p, const auto &q) { return p.size() < q.size(); });
  std::vector<std::size_t> idx(x.size(), 0);
  std::vector<std::vector<ValueId>> choice(x.size());
  while (true) {
    tick();
    for (std::size_t r = 0; r < x.size(); ++r) choice[r] = subsets[idx[r]];
    e[k] = x.expand_choice(vars[0], choice);
    bool ok = vars.size() == 1 ? eval(nd.left, e) : eval_block(n, suffix + 1, e);
    if (ok) return true;
    std::size_t r = 0;
    while (r < idx.size() && ++idx[r] == subsets.size()) idx[r++] = 0;
    if (r == idx.size()) return false;
  }
}

} // namespace

EvalOutcome eval(const Structure &a, const Polyteam &x, const FormulaPtr &phi,
                 const EvalConfig &cfg, const AtomRegistry *registry) {
  cfg.validate();
  a.validate();
  SignatureTable sig;
  if (registry) sig = registry->signatures();
  auto problems = check_well_sorted(*phi, registry ? &sig : nullptr);
  if (!problems.empty()) throw Error("formula is not well-sorted: " + problems.front());

  auto mentioned = mentioned_sorts(*phi);
  std::vector<Sort> sorts(mentioned.begin(), mentioned.end());
  auto fv = free_variables(*phi);

  Teams teams;
  for (const Sort &s : sorts) {
    Team t = x.at(s);
    if (!x.contains(s) && fv.count(s)) {
      throw SortedDomainError("no team given for sort " + s.name +
                              ", whose variables occur free");
    }
    for (const auto &name : fv[s]) {
      if (!t.has_variable(name)) {
        throw SortedDomainError("variable " + s.name + "." + name +
                                " is not in the domain of the team of sort " + s.name);
      }
    }
    for (ValueId v : t.cells()) {
      if (v >= a.domain_size()) throw Error("team of sort " + s.name + " uses an unknown value");
    }
    teams.push_back(std::move(t));
  }

  Evaluator ev(a, registry, cfg, sorts);
  int root = ev.compile(phi);
  EvalOutcome out;
  try {
    out.verdict = ev.run(root, teams) ? Verdict::satisfied : Verdict::violated;
  } catch (const ResourceExhausted &e) {
    out.verdict = Verdict::resource_exhausted;
    out.detail = e.reason;
  }
  out.stats = ev.stats;
  return out;
}

EvalOutcome eval_sentence(const Structure &a, const FormulaPtr &phi,
                          const EvalConfig &cfg, const AtomRegistry *registry) {
  auto fv = free_variables(*phi);
  if (!fv.empty()) {
    const auto &[s, names] = *fv.begin();
    throw Error("not a sentence: " + s.name + "." + *names.begin() + " occurs free");
  }
  return eval(a, Polyteam{}, phi, cfg, registry);
}

CoverEnumerator::CoverEnumerator(Team team, std::size_t max_rows) : team_(std::move(team)) {
  if (team_.size() > max_rows) {
    throw Error("team has " + std::to_string(team_.size()) +
                " rows, more than the split cap of " + std::to_string(max_rows));
  }
  for (std::size_t i = 0; i < team_.size(); ++i) total_ *= 3;
}

bool CoverEnumerator::next(Team &left, Team &right) {
  if (index_ == total_) return false;
  std::vector<std::size_t> ys, zs;
  std::uint64_t code = index_++;
  for (std::size_t r = 0; r < team_.size(); ++r, code /= 3) {
    unsigned digit = code % 3;
    if (digit != 2) ys.push_back(r);
    if (digit != 1) zs.push_back(r);
  }
  left = team_.select(ys);
  right = team_.select(zs);
  return true;
}

} // namespace polyteam
