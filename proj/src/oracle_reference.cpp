// Lax semantics evaluated literally: every cover, every choice function.

#include "polyteam/oracle.hpp"

namespace polyteam::oracle {

namespace {

class RefEval {
public:
  RefEval(const Structure &a, const AtomRegistry *registry, std::uint64_t budget)
      : a_(a), registry_(registry), budget_(budget) {}

  bool eval(const RefPolyteam &x, const Formula &f) {
    step();
    switch (f.kind) {
    case NodeKind::top:
      return true;
    case NodeKind::eq:
    case NodeKind::neq:
      for (const auto &s : x.at(f.x.sort)) {
        bool same = s.at(f.x.name) == s.at(f.y.name);
        if (same != (f.kind == NodeKind::eq)) return false;
      }
      return true;
    case NodeKind::rel:
    case NodeKind::neg_rel: {
      const Relation *rel = a_.relation(f.relation);
      for (const auto &s : x.at(f.args.sort)) {
        Tuple t;
        for (const auto &v : f.args.vars) t.push_back(s.at(v.name));
        bool in = rel && rel->tuples.count(t);
        if (in != (f.kind == NodeKind::rel)) return false;
      }
      return true;
    }
    case NodeKind::atom:
      return naive_atom(a_, x, *f.atom, registry_);
    case NodeKind::conj:
      return eval(x, *f.left) && eval(x, *f.right);
    case NodeKind::or_global: {
      std::vector<Sort> sorts;
      for (const auto &[s, team] : x) sorts.push_back(s);
      RefPolyteam y = x, z = x;
      return split(x, y, z, sorts, 0, f);
    }
    case NodeKind::or_local: {
      std::vector<Sort> sorts(f.sorts.begin(), f.sorts.end());
      RefPolyteam xx = x;
      for (const Sort &s : sorts) xx.try_emplace(s, RefTeam{Assignment{}});
      RefPolyteam y = xx, z = xx;
      return split(xx, y, z, sorts, 0, f);
    }
    case NodeKind::forall: {
      RefPolyteam y = x;
      RefTeam t;
      for (const auto &s : x.at(f.x.sort)) {
        for (ValueId v : a_.domain()) {
          Assignment s2 = s;
          s2[f.x.name] = v;
          t.insert(std::move(s2));
        }
      }
      y[f.x.sort] = std::move(t);
      return eval(y, *f.left);
    }
    case NodeKind::exists: {
      std::vector<Assignment> rows(x.at(f.x.sort).begin(), x.at(f.x.sort).end());
      const auto &dom = a_.domain();
      if (dom.size() >= 20) throw BudgetExceeded("domain too large for choice enumeration");
      const std::uint32_t limit = 1u << dom.size();
      std::vector<std::uint32_t> mask(rows.size(), 1);
      RefPolyteam y = x;
      while (true) {
        step();
        RefTeam t;
        for (std::size_t r = 0; r < rows.size(); ++r) {
          for (std::size_t b = 0; b < dom.size(); ++b) {
            if (!(mask[r] & (1u << b))) continue;
            Assignment s2 = rows[r];
            s2[f.x.name] = dom[b];
            t.insert(std::move(s2));
          }
        }
        y[f.x.sort] = std::move(t);
        if (eval(y, *f.left)) return true;
        std::size_t r = 0;
        while (r < mask.size() && ++mask[r] == limit) mask[r++] = 1;
        if (r == mask.size()) return false;
      }
    }
    }
    return false;
  }

private:
  void step() {
    if (++steps_ > budget_) throw BudgetExceeded("reference evaluation budget exhausted");
  }

  bool split(const RefPolyteam &x, RefPolyteam &y, RefPolyteam &z,
             const std::vector<Sort> &sorts, std::size_t m, const Formula &f) {
    if (m == sorts.size()) return eval(y, *f.left) && eval(z, *f.right);
    const Sort &s = sorts[m];
    std::vector<Assignment> rows(x.at(s).begin(), x.at(s).end());
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < rows.size(); ++i) total *= 3;
    for (std::uint64_t code = 0; code < total; ++code) {
      step();
      RefTeam ys, zs;
      std::uint64_t c = code;
      for (const auto &row : rows) {
        unsigned d = c % 3;
        c /= 3;
        if (d != 2) ys.insert(row);
        if (d != 1) zs.insert(row);
      }
      y[s] = std::move(ys);
      z[s] = std::move(zs);
      if (split(x, y, z, sorts, m + 1, f)) return true;
    }
    return false;
  }

  const Structure &a_;
  const AtomRegistry *registry_;
  std::uint64_t budget_;
  std::uint64_t steps_ = 0;
};

} // namespace

bool reference_eval(const Structure &a, const Polyteam &x, const FormulaPtr &phi,
                    const AtomRegistry *registry, std::uint64_t budget) {
  RefPolyteam rx = to_reference(x);
  for (const Sort &s : mentioned_sorts(*phi)) rx.try_emplace(s, RefTeam{Assignment{}});
  return RefEval(a, registry, budget).eval(rx, *phi);
}

} // namespace polyteam::oracle
