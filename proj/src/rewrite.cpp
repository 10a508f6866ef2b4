#include "polyteam/rewrite.hpp"

#include <algorithm>

namespace polyteam {

void FreshNameSource::avoid(const Formula &f) {
  for (const auto &v : all_variables(f)) used_.insert(v);
}

void FreshNameSource::avoid(const AtomInstance &atom) {
  for (const VarTuple *t : atom_tuples(atom)) used_.insert(t->vars.begin(), t->vars.end());
}

Variable FreshNameSource::fresh(const Sort &sort) {
  while (true) {
    Variable v{sort, std::string(reserved_prefix) + std::to_string(next_[sort]++)};
    if (used_.insert(v).second) return v;
  }
}

VarTuple FreshNameSource::fresh_tuple(const Sort &sort, std::size_t n) {
  VarTuple t{sort, {}};
  for (std::size_t i = 0; i < n; ++i) t.vars.push_back(fresh(sort));
  return t;
}

std::string to_string(LemmaRule r) {
  switch (r) {
  case LemmaRule::e1: return "e1";
  case LemmaRule::e2: return "e2";
  case LemmaRule::e3: return "e3";
  case LemmaRule::e4: return "e4";
  case LemmaRule::e5: return "e5";
  case LemmaRule::e6: return "e6";
  case LemmaRule::e8: return "e8";
  }
  return "?";
}

std::optional<LemmaRule> parse_lemma_rule(std::string_view name) {
  for (LemmaRule r : {LemmaRule::e1, LemmaRule::e2, LemmaRule::e3, LemmaRule::e4,
                      LemmaRule::e5, LemmaRule::e6, LemmaRule::e8}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

AtomKind kind_of(const AtomInstance &atom) {
  switch (atom.index()) {
  case 0: return AtomKind::pdep;
  case 1: return AtomKind::pinc;
  case 2: return AtomKind::pexc;
  case 3: return AtomKind::pind;
  default: return AtomKind::generalized;
  }
}

std::string to_string(AtomKind k) {
  switch (k) {
  case AtomKind::pdep: return "pdep";
  case AtomKind::pinc: return "pinc";
  case AtomKind::pexc: return "pexc";
  case AtomKind::pind: return "pind";
  case AtomKind::generalized: return "generalized";
  }
  return "?";
}

bool lemma_applies(LemmaRule rule, const AtomInstance &atom) {
  switch (rule) {
  case LemmaRule::e1:
  case LemmaRule::e2:
    return std::holds_alternative<PolyDep>(atom);
  case LemmaRule::e3:
    return std::holds_alternative<PolyInc>(atom);
  case LemmaRule::e4:
    if (auto *a = std::get_if<PolyInc>(&atom)) return a->lhs.sort != a->rhs.sort;
    return false;
  case LemmaRule::e5:
  case LemmaRule::e6:
    if (auto *a = std::get_if<PolyExc>(&atom)) return a->lhs.sort != a->rhs.sort;
    return false;
  case LemmaRule::e8:
    if (auto *a = std::get_if<PolyInd>(&atom)) {
      const Sort &i = a->x.sort, &j = a->a.sort, &k = a->u.sort;
      return i != j && j != k && i != k;
    }
    return false;
  }
  return false;
}

namespace {

FormulaPtr conj_all(std::vector<FormulaPtr> parts) {
  if (parts.empty()) return make_top();
  FormulaPtr acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = make_and(acc, parts[i]);
  return acc;
}

FormulaPtr exists_all(const std::vector<Variable> &vars, FormulaPtr body) {
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = make_exists(*it, body);
  return body;
}

FormulaPtr forall_all(const std::vector<Variable> &vars, FormulaPtr body) {
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = make_forall(*it, body);
  return body;
}

std::vector<Variable> vars_of(std::initializer_list<const VarTuple *> ts) {
  std::vector<Variable> out;
  for (const VarTuple *t : ts) out.insert(out.end(), t->vars.begin(), t->vars.end());
  return out;
}

VarTuple empty_tuple(const Sort &s) { return VarTuple{s, {}}; }
VarTuple single(const Variable &v) { return VarTuple{v.sort, {v}}; }

FormulaPtr e1(const PolyDep &d) {
  return make_atom(PolyInd{d.x, d.u, d.x, d.y, d.y, d.v, d.y});
}

FormulaPtr e2(const PolyDep &d, FreshNameSource &fresh) {
  std::vector<FormulaPtr> parts;
  for (std::size_t t = 0; t < d.y.size(); ++t) {
    const Variable &y = d.y.vars[t];
    Variable z = fresh.fresh(d.x.sort);
    VarTuple xz = concat(d.x, single(z));
    VarTuple uv = concat(d.u, single(d.v.vars[t]));
    parts.push_back(make_forall(
        z, make_or_local(d.x.sort, make_eq(y, z), make_atom(PolyExc{xz, uv}))));
  }
  return conj_all(std::move(parts));
}

FormulaPtr e3(const PolyInc &a) {
  const Sort &i = a.lhs.sort, &k = a.rhs.sort;
  return make_atom(PolyInd{empty_tuple(i), empty_tuple(i), empty_tuple(k), a.lhs, a.rhs,
                           empty_tuple(i), empty_tuple(k)});
}

FormulaPtr e4(const PolyInc &a, FreshNameSource &fresh) {
  VarTuple v = fresh.fresh_tuple(a.rhs.sort, a.lhs.size());
  FormulaPtr body = make_or_local(a.rhs.sort, make_atom(PolyExc{a.lhs, v}),
                                  make_atom(PolyInc{v, a.rhs}));
  return forall_all(v.vars, body);
}

FormulaPtr e5(const PolyExc &a, FreshNameSource &fresh) {
  const Sort &i = a.lhs.sort, &j = a.rhs.sort;
  Variable y = fresh.fresh(i), z = fresh.fresh(i), v = fresh.fresh(j), w = fresh.fresh(j);
  FormulaPtr dep = make_atom(PolyDep{a.lhs, VarTuple{i, {y, z}}, a.rhs, VarTuple{j, {v, w}}});
  FormulaPtr body = make_and(make_and(dep, make_eq(y, z)), make_neq(v, w));
  return exists_all({y, z, v, w}, body);
}

FormulaPtr e6(const PolyExc &a, FreshNameSource &fresh) {
  VarTuple y = fresh.fresh_tuple(a.lhs.sort, a.rhs.size());
  FormulaPtr body = make_and(make_atom(PolyInc{a.rhs, y}), make_atom(PolyExc{a.lhs, y}));
  return exists_all(y.vars, body);
}

FormulaPtr e8(const PolyInd &a, FreshNameSource &fresh) {
  const Sort &si = a.x.sort, &sj = a.a.sort;
  VarTuple pi = fresh.fresh_tuple(si, a.x.size());
  VarTuple qi = fresh.fresh_tuple(si, a.y.size());
  Variable ui = fresh.fresh(si), vi = fresh.fresh(si);
  VarTuple pj = fresh.fresh_tuple(sj, a.x.size());
  VarTuple qj = fresh.fresh_tuple(sj, a.y.size());
  VarTuple rj = fresh.fresh_tuple(sj, a.b.size());
  Variable uj = fresh.fresh(sj), vj = fresh.fresh(sj);

  FormulaPtr dep = make_atom(PolyDep{concat(pi, qi), VarTuple{si, {ui, vi}}, concat(pj, qj),
                                     VarTuple{sj, {uj, vj}}});
  FormulaPtr left_part =
      make_or_local(si, make_eq(ui, vi),
                    make_and(make_neq(ui, vi), make_atom(PolyExc{concat(a.x, a.y), concat(pi, qi)})));
  FormulaPtr right_part = make_or_local(
      sj,
      make_or_local(sj, make_neq(uj, vj), make_atom(PolyExc{concat(a.a, a.b), concat(pj, rj)})),
      make_atom(PolyInc{concat(concat(pj, qj), rj), concat(concat(a.u, a.v), a.w)}));
  FormulaPtr body = make_and(make_and(dep, left_part), right_part);
  body = exists_all({uj, vj}, body);
  body = forall_all(vars_of({&pj, &qj, &rj}), body);
  body = exists_all({ui, vi}, body);
  return forall_all(vars_of({&pi, &qi}), body);
}

FormulaPtr with_children(const Formula &f, FormulaPtr l, FormulaPtr r) {
  auto n = std::make_shared<Formula>(f);
  n->left = std::move(l);
  n->right = std::move(r);
  return n;
}

template <class AtomFn> FormulaPtr map_atoms(const FormulaPtr &f, AtomFn &&fn) {
  switch (f->kind) {
  case NodeKind::atom:
    return fn(*f->atom, f);
  case NodeKind::conj:
  case NodeKind::or_global:
  case NodeKind::or_local:
    return with_children(*f, map_atoms(f->left, fn), map_atoms(f->right, fn));
  case NodeKind::exists:
  case NodeKind::forall:
    return with_children(*f, map_atoms(f->left, fn), nullptr);
  default:
    return f;
  }
}

std::vector<LemmaRule> rules_for(AtomKind k) {
  switch (k) {
  case AtomKind::pdep: return {LemmaRule::e1, LemmaRule::e2};
  case AtomKind::pinc: return {LemmaRule::e3, LemmaRule::e4};
  case AtomKind::pexc: return {LemmaRule::e5, LemmaRule::e6};
  case AtomKind::pind: return {LemmaRule::e8};
  default: return {};
  }
}

FormulaPtr into_dialect(const AtomInstance &atom, const FormulaPtr &original,
                        const std::set<AtomKind> &allowed, FreshNameSource &fresh, int depth) {
  AtomKind k = kind_of(atom);
  if (allowed.count(k)) return original ? original : make_atom(atom);
  if (depth > 0) {
    for (LemmaRule r : rules_for(k)) {
      if (!lemma_applies(r, atom)) continue;
      try {
        FormulaPtr step = translate_atom(atom, r, fresh);
        return map_atoms(step, [&](const AtomInstance &inner, const FormulaPtr &node) {
          return into_dialect(inner, node, allowed, fresh, depth - 1);
        });
      } catch (const UnsupportedRewrite &) {
      }
    }
  }
  throw UnsupportedRewrite("no rewrite path takes " + atom_to_string(atom) +
                           " into the requested dialect");
}

struct Eliminator {
  std::vector<Sort> all_sorts;
  FreshNameSource &fresh;
  std::size_t replaced = 0;

  FormulaPtr chain(const std::vector<Sort> &sorts, FormulaPtr f0, FormulaPtr f1) {
    if (sorts.empty()) return make_and(f0, f1);
    ++replaced;
    std::vector<std::pair<Variable, Variable>> zs;
    for (const Sort &s : sorts) {
      Variable a = fresh.fresh(s);
      zs.emplace_back(a, fresh.fresh(s));
    }
    FormulaPtr t0 = f0, t1 = f1;
    for (std::size_t m = sorts.size(); m-- > 0;) {
      const auto &[a, b] = zs[m];
      t0 = make_or_local(sorts[m], make_eq(a, b), make_and(make_neq(a, b), t0));
      t1 = make_or_local(sorts[m], make_neq(a, b), make_and(make_eq(a, b), t1));
    }
    FormulaPtr out = make_and(t0, t1);
    for (std::size_t m = zs.size(); m-- > 0;) {
      out = make_exists(zs[m].first, make_exists(zs[m].second, out));
    }
    return out;
  }

  FormulaPtr run(const FormulaPtr &f) {
    switch (f->kind) {
    case NodeKind::conj:
      return with_children(*f, run(f->left), run(f->right));
    case NodeKind::exists:
    case NodeKind::forall:
      return with_children(*f, run(f->left), nullptr);
    case NodeKind::or_global:
      return chain(all_sorts, run(f->left), run(f->right));
    case NodeKind::or_local:
      if (f->sorts.size() > 1) {
        return chain(std::vector<Sort>(f->sorts.begin(), f->sorts.end()), run(f->left),
                     run(f->right));
      }
      return with_children(*f, run(f->left), run(f->right));
    default:
      return f;
    }
  }
};

std::optional<Sort> single_sort(const AtomInstance &atom) {
  std::optional<Sort> s;
  for (const VarTuple *t : atom_tuples(atom)) {
    if (s && *s != t->sort) return std::nullopt;
    s = t->sort;
  }
  return s;
}

FormulaPtr decompose_at(const FormulaPtr &f, const Sort &i) {
  switch (f->kind) {
  case NodeKind::top:
    return f;
  case NodeKind::eq:
  case NodeKind::neq:
    return f->x.sort == i ? f : make_top();
  case NodeKind::rel:
  case NodeKind::neg_rel:
    return f->args.sort == i ? f : make_top();
  case NodeKind::atom: {
    auto s = single_sort(*f->atom);
    if (!s) {
      throw DecompositionError("atom " + atom_to_string(*f->atom) + " is not a uni-atom");
    }
    return *s == i ? f : make_top();
  }
  case NodeKind::conj:
    return make_and(decompose_at(f->left, i), decompose_at(f->right, i));
  case NodeKind::or_global:
    throw DecompositionError("global disjunction present; eliminate it first");
  case NodeKind::or_local: {
    if (f->sorts.size() != 1) {
      throw DecompositionError("local disjunction over several sorts; eliminate it first");
    }
    FormulaPtr l = decompose_at(f->left, i), r = decompose_at(f->right, i);
    return *f->sorts.begin() == i ? make_or(l, r) : make_and(l, r);
  }
  case NodeKind::exists:
  case NodeKind::forall: {
    FormulaPtr body = decompose_at(f->left, i);
    if (f->x.sort != i) return body;
    return f->kind == NodeKind::exists ? make_exists(f->x, body) : make_forall(f->x, body);
  }
  }
  return f;
}

} // namespace

FormulaPtr translate_atom(const AtomInstance &atom, LemmaRule rule, FreshNameSource &fresh) {
  if (!lemma_applies(rule, atom)) {
    throw UnsupportedRewrite(to_string(rule) + " does not apply to " + atom_to_string(atom));
  }
  fresh.avoid(atom);
  switch (rule) {
  case LemmaRule::e1: return e1(std::get<PolyDep>(atom));
  case LemmaRule::e2: return e2(std::get<PolyDep>(atom), fresh);
  case LemmaRule::e3: return e3(std::get<PolyInc>(atom));
  case LemmaRule::e4: return e4(std::get<PolyInc>(atom), fresh);
  case LemmaRule::e5: return e5(std::get<PolyExc>(atom), fresh);
  case LemmaRule::e6: return e6(std::get<PolyExc>(atom), fresh);
  case LemmaRule::e8: return e8(std::get<PolyInd>(atom), fresh);
  }
  throw UnsupportedRewrite("unknown rule");
}

FormulaPtr rewrite_all(const FormulaPtr &phi, LemmaRule rule, FreshNameSource &fresh) {
  fresh.avoid(*phi);
  return map_atoms(phi, [&](const AtomInstance &atom, const FormulaPtr &node) {
    return lemma_applies(rule, atom) ? translate_atom(atom, rule, fresh) : node;
  });
}

FormulaPtr to_dialect(const FormulaPtr &phi, const std::set<AtomKind> &allowed,
                      FreshNameSource &fresh) {
  fresh.avoid(*phi);
  return map_atoms(phi, [&](const AtomInstance &atom, const FormulaPtr &node) {
    return into_dialect(atom, node, allowed, fresh, 3);
  });
}

EliminationResult eliminate_global_disjunction(const FormulaPtr &phi, FreshNameSource &fresh) {
  fresh.avoid(*phi);
  auto sorts = mentioned_sorts(*phi);
  Eliminator el{std::vector<Sort>(sorts.begin(), sorts.end()), fresh};
  EliminationResult out;
  out.formula = el.run(phi);
  out.warnings.push_back(
      "equivalence holds on structures with at least two elements; on a one-element "
      "structure the result may differ from the input");
  return out;
}

std::map<Sort, FormulaPtr> decompose_uniatom_formula(const FormulaPtr &phi) {
  std::map<Sort, FormulaPtr> out;
  for (const Sort &s : mentioned_sorts(*phi)) out.emplace(s, decompose_at(phi, s));
  return out;
}

} // namespace polyteam
