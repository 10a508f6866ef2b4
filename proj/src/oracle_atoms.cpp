// Atom checkers written straight from the nested-quantifier definitions.
// Slow on purpose: they are the yardstick for src/atoms.cpp.

#include "polyteam/oracle.hpp"

namespace polyteam::oracle {

namespace {

const RefTeam &team_of(const RefPolyteam &x, const Sort &s) {
  static const RefTeam singleton{Assignment{}};
  auto it = x.find(s);
  return it == x.end() ? singleton : it->second;
}

Tuple values(const Assignment &s, const VarTuple &t) {
  Tuple out;
  for (const auto &v : t.vars) {
    auto it = s.find(v.name);
    if (it == s.end()) throw SortedDomainError("variable " + v.str() + " is unassigned");
    out.push_back(it->second);
  }
  return out;
}

} // namespace

RefPolyteam to_reference(const Polyteam &x) {
  RefPolyteam out;
  for (const auto &[sort, team] : x.teams()) {
    RefTeam t;
    for (std::size_t r = 0; r < team.size(); ++r) t.insert(team.assignment(r));
    out.emplace(sort, std::move(t));
  }
  return out;
}

bool naive_polydep(const RefPolyteam &x, const PolyDep &atom) {
  for (const auto &s : team_of(x, atom.x.sort)) {
    for (const auto &s2 : team_of(x, atom.u.sort)) {
      if (values(s, atom.x) == values(s2, atom.u) && values(s, atom.y) != values(s2, atom.v)) {
        return false;
      }
    }
  }
  return true;
}

bool naive_polyinc(const RefPolyteam &x, const PolyInc &atom) {
  for (const auto &s : team_of(x, atom.lhs.sort)) {
    bool found = false;
    for (const auto &s2 : team_of(x, atom.rhs.sort)) {
      if (values(s, atom.lhs) == values(s2, atom.rhs)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

bool naive_polyexc(const RefPolyteam &x, const PolyExc &atom) {
  for (const auto &s : team_of(x, atom.lhs.sort)) {
    for (const auto &s2 : team_of(x, atom.rhs.sort)) {
      if (values(s, atom.lhs) == values(s2, atom.rhs)) return false;
    }
  }
  return true;
}

bool naive_polyind(const RefPolyteam &x, const PolyInd &atom) {
  for (const auto &s : team_of(x, atom.x.sort)) {
    for (const auto &s2 : team_of(x, atom.a.sort)) {
      if (values(s, atom.x) != values(s2, atom.a)) continue;
      bool found = false;
      for (const auto &s3 : team_of(x, atom.u.sort)) {
        if (values(s3, atom.u) == values(s, atom.x) && values(s3, atom.v) == values(s, atom.y) &&
            values(s3, atom.w) == values(s2, atom.b)) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
  }
  return true;
}

bool naive_atom(const Structure &a, const RefPolyteam &x, const AtomInstance &atom,
                const AtomRegistry *registry) {
  if (auto *d = std::get_if<PolyDep>(&atom)) return naive_polydep(x, *d);
  if (auto *i = std::get_if<PolyInc>(&atom)) return naive_polyinc(x, *i);
  if (auto *e = std::get_if<PolyExc>(&atom)) return naive_polyexc(x, *e);
  if (auto *p = std::get_if<PolyInd>(&atom)) return naive_polyind(x, *p);
  const auto &g = std::get<GeneralizedAtom>(atom);
  const GeneralizedQuantifier *q = registry ? registry->find(g.name) : nullptr;
  if (!q) throw Error("unregistered generalized atom '" + g.name + "'");
  std::vector<TupleSet> rels;
  for (const auto &arg : g.args) {
    TupleSet r;
    for (const auto &s : team_of(x, arg.sort)) r.insert(values(s, arg));
    rels.push_back(std::move(r));
  }
  return q->predicate(a.domain(), rels);
}

} // namespace polyteam::oracle
