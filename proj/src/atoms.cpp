#include "polyteam/atoms.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

namespace polyteam {

namespace {

std::vector<std::size_t> columns(const Team &t, const VarTuple &tuple) {
  std::vector<std::size_t> cols;
  cols.reserve(tuple.size());
  for (const auto &v : tuple.vars) cols.push_back(t.require_column(v.name));
  return cols;
}

void read_into(const Team &t, std::size_t r, const std::vector<std::size_t> &cols,
               Tuple &out) {
  auto row = t.row(r);
  out.clear();
  for (std::size_t c : cols) out.push_back(row[c]);
}

using TupleIndex = std::unordered_set<Tuple, TupleHash>;

TupleIndex index_of(const Team &t, const std::vector<std::size_t> &cols) {
  TupleIndex out;
  Tuple buf;
  for (std::size_t r = 0; r < t.size(); ++r) {
    read_into(t, r, cols, buf);
    out.insert(buf);
  }
  return out;
}

} // namespace

TupleSet extract_relation(const Team &team, const VarTuple &tuple) {
  auto cols = columns(team, tuple);
  TupleSet out;
  Tuple buf;
  for (std::size_t r = 0; r < team.size(); ++r) {
    read_into(team, r, cols, buf);
    out.insert(buf);
  }
  return out;
}

bool check_polydep(const Polyteam &x, const PolyDep &atom) {
  const Team xi = x.at(atom.x.sort);
  const Team xj = x.at(atom.u.sort);
  auto cx = columns(xi, atom.x), cy = columns(xi, atom.y);
  auto cu = columns(xj, atom.u), cv = columns(xj, atom.v);
  if (xi.empty() || xj.empty()) return true;

  // u-value -> the unique v-value seen with it, or nullopt once two differ.
  std::unordered_map<Tuple, std::optional<Tuple>, TupleHash> image;
  Tuple key, val;
  for (std::size_t r = 0; r < xj.size(); ++r) {
    read_into(xj, r, cu, key);
    read_into(xj, r, cv, val);
    auto [it, fresh] = image.emplace(key, val);
    if (!fresh && it->second && *it->second != val) it->second.reset();
  }
  for (std::size_t r = 0; r < xi.size(); ++r) {
    read_into(xi, r, cx, key);
    auto it = image.find(key);
    if (it == image.end()) continue;
    if (!it->second) return false;
    read_into(xi, r, cy, val);
    if (val != *it->second) return false;
  }
  return true;
}

bool check_polyinc(const Polyteam &x, const PolyInc &atom) {
  const Team xi = x.at(atom.lhs.sort);
  const Team xj = x.at(atom.rhs.sort);
  auto cl = columns(xi, atom.lhs), cr = columns(xj, atom.rhs);
  if (xi.empty()) return true;
  TupleIndex rhs = index_of(xj, cr);
  Tuple buf;
  for (std::size_t r = 0; r < xi.size(); ++r) {
    read_into(xi, r, cl, buf);
    if (!rhs.count(buf)) return false;
  }
  return true;
}

bool check_polyexc(const Polyteam &x, const PolyExc &atom) {
  const Team xi = x.at(atom.lhs.sort);
  const Team xj = x.at(atom.rhs.sort);
  auto cl = columns(xi, atom.lhs), cr = columns(xj, atom.rhs);
  if (xi.empty() || xj.empty()) return true;
  TupleIndex rhs = index_of(xj, cr);
  Tuple buf;
  for (std::size_t r = 0; r < xi.size(); ++r) {
    read_into(xi, r, cl, buf);
    if (rhs.count(buf)) return false;
  }
  return true;
}

bool check_polyind(const Polyteam &x, const PolyInd &atom) {
  const Team xi = x.at(atom.x.sort);
  const Team xj = x.at(atom.a.sort);
  const Team xk = x.at(atom.u.sort);
  auto cx = columns(xi, atom.x), cy = columns(xi, atom.y);
  auto ca = columns(xj, atom.a), cb = columns(xj, atom.b);
  auto cuvw = columns(xk, atom.u);
  for (std::size_t c : columns(xk, atom.v)) cuvw.push_back(c);
  for (std::size_t c : columns(xk, atom.w)) cuvw.push_back(c);
  if (xi.empty() || xj.empty()) return true;

  TupleIndex witnesses = index_of(xk, cuvw);
  std::unordered_map<Tuple, std::vector<Tuple>, TupleHash> by_a;
  Tuple key, val;
  for (std::size_t r = 0; r < xj.size(); ++r) {
    read_into(xj, r, ca, key);
    read_into(xj, r, cb, val);
    by_a[key].push_back(val);
  }
  Tuple probe;
  for (std::size_t r = 0; r < xi.size(); ++r) {
    read_into(xi, r, cx, key);
    auto it = by_a.find(key);
    if (it == by_a.end()) continue;
    read_into(xi, r, cy, val);
    for (const Tuple &b : it->second) {
      probe = key;
      probe.insert(probe.end(), val.begin(), val.end());
      probe.insert(probe.end(), b.begin(), b.end());
      if (!witnesses.count(probe)) return false;
    }
  }
  return true;
}

void AtomRegistry::add(GeneralizedQuantifier q) {
  if (!q.predicate) throw Error("generalized quantifier " + q.name + " has no predicate");
  std::string key = q.name;
  quantifiers_.insert_or_assign(std::move(key), std::move(q));
}

const GeneralizedQuantifier *AtomRegistry::find(std::string_view name) const {
  auto it = quantifiers_.find(name);
  return it == quantifiers_.end() ? nullptr : &it->second;
}

SignatureTable AtomRegistry::signatures() const {
  SignatureTable out;
  for (const auto &[name, q] : quantifiers_) out.emplace(name, q.type);
  return out;
}

bool check_generalized(const Structure &a, const Polyteam &x,
                       const GeneralizedAtom &atom, const AtomRegistry &registry) {
  const GeneralizedQuantifier *q = registry.find(atom.name);
  if (!q) throw Error("unregistered generalized atom '" + atom.name + "'");
  if (q->type.size() != atom.args.size()) {
    throw Error("generalized atom '" + atom.name + "' expects " +
                std::to_string(q->type.size()) + " tuples");
  }
  std::vector<TupleSet> rels;
  rels.reserve(atom.args.size());
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    if (atom.args[i].size() != q->type[i]) {
      throw Error("generalized atom '" + atom.name + "' argument " +
                  std::to_string(i + 1) + " has the wrong length");
    }
    rels.push_back(extract_relation(x.at(atom.args[i].sort), atom.args[i]));
  }
  return q->predicate(a.domain(), rels);
}

bool check_atom(const Structure &a, const Polyteam &x, const AtomInstance &atom,
                const AtomRegistry *registry) {
  return std::visit(
      [&](const auto &at) -> bool {
        using T = std::decay_t<decltype(at)>;
        if constexpr (std::is_same_v<T, PolyDep>) {
          return check_polydep(x, at);
        } else if constexpr (std::is_same_v<T, PolyInc>) {
          return check_polyinc(x, at);
        } else if constexpr (std::is_same_v<T, PolyExc>) {
          return check_polyexc(x, at);
        } else if constexpr (std::is_same_v<T, PolyInd>) {
          return check_polyind(x, at);
        } else {
          if (!registry) throw Error("no registry for generalized atom '" + at.name + "'");
          return check_generalized(a, x, at, *registry);
        }
      },
      atom);
}

// ---------------------------------------------------------------------------
// Embedded dependencies

std::vector<std::string> EmbeddedDependency::relation_order() const {
  std::vector<std::string> out;
  auto visit = [&](const std::vector<EdAtom> &atoms) {
    for (const auto &a : atoms) {
      if (a.kind == EdAtom::Kind::relation &&
          std::find(out.begin(), out.end(), a.relation) == out.end()) {
        out.push_back(a.relation);
      }
    }
  };
  visit(antecedent);
  visit(consequent);
  return out;
}

std::map<std::string, std::size_t> EmbeddedDependency::relation_arities() const {
  std::map<std::string, std::size_t> out;
  for (const auto *side : {&antecedent, &consequent}) {
    for (const auto &a : *side) {
      if (a.kind != EdAtom::Kind::relation) continue;
      auto [it, fresh] = out.emplace(a.relation, a.args.size());
      if (!fresh && it->second != a.args.size()) {
        throw Error("relation " + a.relation + " used with different arities");
      }
    }
  }
  return out;
}

void validate(const EmbeddedDependency &ed) {
  std::set<std::string> bound;
  for (const auto *vars : {&ed.universal, &ed.existential}) {
    for (const auto &v : *vars) {
      if (!bound.insert(v).second) throw Error("variable " + v + " is quantified twice");
    }
  }
  std::set<std::string> uni(ed.universal.begin(), ed.universal.end());
  for (const auto &a : ed.antecedent) {
    for (const auto &v : a.args) {
      if (!uni.count(v)) {
        throw Error("antecedent variable " + v + " is not universally quantified");
      }
    }
  }
  for (const auto &a : ed.consequent) {
    for (const auto &v : a.args) {
      if (!bound.count(v)) throw Error("consequent variable " + v + " is not quantified");
    }
  }
  for (const auto *side : {&ed.antecedent, &ed.consequent}) {
    for (const auto &a : *side) {
      if (a.kind == EdAtom::Kind::equality && a.args.size() != 2) {
        throw Error("equality must have two arguments");
      }
    }
  }
  (void)ed.relation_arities();
}

namespace {

class EdParser {
public:
  explicit EdParser(std::string_view text) : text_(text) {}

  EmbeddedDependency run() {
    EmbeddedDependency ed;
    expect_word("forall");
    ed.universal = names_until_dot();
    ed.antecedent = conjunction();
    skip();
    if (text_.substr(pos_, 2) != "->") fail("expected '->'");
    pos_ += 2;
    skip();
    if (peek_word() == "exists") {
      expect_word("exists");
      ed.existential = names_until_dot();
    }
    ed.consequent = conjunction();
    skip();
    if (pos_ != text_.size()) fail("trailing input");
    validate(ed);
    return ed;
  }

private:
  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(msg, 1, pos_ + 1);
  }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }
  std::string peek_word() {
    skip();
    std::size_t p = pos_;
    while (p < text_.size() && ident_char(text_[p])) ++p;
    return std::string(text_.substr(pos_, p - pos_));
  }
  std::string word() {
    std::string w = peek_word();
    if (w.empty()) fail("expected an identifier");
    pos_ += w.size();
    return w;
  }
  void expect_word(const std::string &w) {
    if (word() != w) fail("expected '" + w + "'");
  }
  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::vector<std::string> names_until_dot() {
    std::vector<std::string> out;
    while (!accept('.')) out.push_back(word());
    return out;
  }
  std::vector<EdAtom> conjunction() {
    std::vector<EdAtom> out;
    if (peek_word() == "true") {
      word();
      return out;
    }
    while (true) {
      out.push_back(atom());
      skip();
      if (text_.substr(pos_, 2) == "/\\") {
        pos_ += 2;
      } else {
        return out;
      }
    }
  }
  EdAtom atom() {
    std::string head = word();
    EdAtom a;
    if (accept('(')) {
      a.kind = EdAtom::Kind::relation;
      a.relation = head;
      while (!accept(')')) {
        a.args.push_back(word());
        accept(',');
      }
      return a;
    }
    if (!accept('=')) fail("expected '(' or '='");
    a.kind = EdAtom::Kind::equality;
    a.args = {head, word()};
    return a;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string side_string(const std::vector<EdAtom> &atoms) {
  if (atoms.empty()) return "true";
  std::string out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) out += " /\\ ";
    const auto &a = atoms[i];
    if (a.kind == EdAtom::Kind::equality) {
      out += a.args[0] + " = " + a.args[1];
    } else {
      out += a.relation + "(";
      for (std::size_t j = 0; j < a.args.size(); ++j) {
        if (j) out += ",";
        out += a.args[j];
      }
      out += ")";
    }
  }
  return out;
}

/// Compiled form: variables are numbered, universal ones first.
struct CompiledEd {
  struct Lit {
    bool is_relation;
    std::size_t rel;              // index into relation order
    std::vector<std::size_t> args; // variable slots
  };
  std::size_t n_universal = 0;
  std::size_t n_existential = 0;
  std::vector<Lit> joins;          // antecedent relational atoms
  std::vector<std::size_t> free_universal; // slots not bound by any join
  std::vector<Lit> guards;         // antecedent equalities
  std::vector<Lit> consequent;
  std::vector<std::size_t> ready_at; // per consequent literal: existential depth
  bool widen = false;

  bool holds(const Lit &l, const std::vector<ValueId> &env,
             const std::vector<TupleSet> &rels) const {
    if (!l.is_relation) return env[l.args[0]] == env[l.args[1]];
    Tuple t;
    t.reserve(l.args.size());
    for (std::size_t s : l.args) t.push_back(env[s]);
    return rels[l.rel].count(t) != 0;
  }

  bool exists_witness(std::vector<ValueId> &env, std::size_t depth,
                      const std::vector<ValueId> &candidates,
                      const std::vector<TupleSet> &rels) const {
    for (std::size_t i = 0; i < consequent.size(); ++i) {
      if (ready_at[i] == depth && !holds(consequent[i], env, rels)) return false;
    }
    if (depth == n_existential) return true;
    std::size_t slot = n_universal + depth;
    for (ValueId v : candidates) {
      env[slot] = v;
      if (exists_witness(env, depth + 1, candidates, rels)) return true;
    }
    return false;
  }

  bool check_universal(std::vector<ValueId> &env, std::span<const ValueId> domain,
                       const std::vector<TupleSet> &rels,
                       const std::vector<ValueId> &active) const {
    for (const auto &g : guards) {
      if (!holds(g, env, rels)) return true;
    }
    std::vector<ValueId> candidates;
    if (widen || n_existential == 0) {
      candidates.assign(domain.begin(), domain.end());
    } else {
      std::set<ValueId> c(active.begin(), active.end());
      for (std::size_t s = 0; s < n_universal; ++s) c.insert(env[s]);
      for (ValueId v : domain) {
        if (!c.count(v)) {
          c.insert(v);
          break;
        }
      }
      candidates.assign(c.begin(), c.end());
    }
    return exists_witness(env, 0, candidates, rels);
  }

  bool enumerate_free(std::vector<ValueId> &env, std::size_t k,
                      std::span<const ValueId> domain,
                      const std::vector<TupleSet> &rels,
                      const std::vector<ValueId> &active) const {
    if (k == free_universal.size()) return check_universal(env, domain, rels, active);
    for (ValueId v : domain) {
      env[free_universal[k]] = v;
      if (!enumerate_free(env, k + 1, domain, rels, active)) return false;
    }
    return true;
  }

  bool join(std::vector<ValueId> &env, std::vector<bool> &bound, std::size_t k,
            std::span<const ValueId> domain, const std::vector<TupleSet> &rels,
            const std::vector<ValueId> &active) const {
    if (k == joins.size()) return enumerate_free(env, 0, domain, rels, active);
    const Lit &l = joins[k];
    for (const Tuple &t : rels[l.rel]) {
      std::vector<std::size_t> newly;
      bool ok = true;
      for (std::size_t p = 0; p < l.args.size() && ok; ++p) {
        std::size_t s = l.args[p];
        if (bound[s]) {
          ok = env[s] == t[p];
        } else {
          env[s] = t[p];
          bound[s] = true;
          newly.push_back(s);
        }
      }
      bool fine = !ok || join(env, bound, k + 1, domain, rels, active);
      for (std::size_t s : newly) bound[s] = false;
      if (!fine) return false;
    }
    return true;
  }

  bool operator()(std::span<const ValueId> domain,
                  const std::vector<TupleSet> &rels) const {
    std::set<ValueId> act;
    for (const auto &r : rels) {
      for (const auto &t : r) act.insert(t.begin(), t.end());
    }
    std::vector<ValueId> active(act.begin(), act.end());
    std::vector<ValueId> env(n_universal + n_existential, 0);
    std::vector<bool> bound(env.size(), false);
    return join(env, bound, 0, domain, rels, active);
  }
};

} // namespace

EmbeddedDependency parse_embedded_dependency(std::string_view text) {
  return EdParser(text).run();
}

std::string to_string(const EmbeddedDependency &ed) {
  std::string out = "forall";
  for (const auto &v : ed.universal) out += " " + v;
  out += " . " + side_string(ed.antecedent) + " -> ";
  if (!ed.existential.empty()) {
    out += "exists";
    for (const auto &v : ed.existential) out += " " + v;
    out += " . ";
  }
  return out + side_string(ed.consequent);
}

GeneralizedQuantifier compile_embedded_dependency(const std::string &name,
                                                  const EmbeddedDependency &ed,
                                                  CompileOptions opts) {
  validate(ed);
  auto order = ed.relation_order();
  auto arities = ed.relation_arities();
  std::map<std::string, std::size_t> rel_index, slot;
  for (std::size_t i = 0; i < order.size(); ++i) rel_index[order[i]] = i;
  for (const auto &v : ed.universal) slot.emplace(v, slot.size());
  for (const auto &v : ed.existential) slot.emplace(v, slot.size());

  CompiledEd c;
  c.n_universal = ed.universal.size();
  c.n_existential = ed.existential.size();
  c.widen = opts.widen_to_full_domain;
  auto lit = [&](const EdAtom &a) {
    CompiledEd::Lit l{a.kind == EdAtom::Kind::relation, 0, {}};
    if (l.is_relation) l.rel = rel_index.at(a.relation);
    for (const auto &v : a.args) l.args.push_back(slot.at(v));
    return l;
  };
  std::set<std::size_t> joined;
  for (const auto &a : ed.antecedent) {
    auto l = lit(a);
    if (l.is_relation) {
      joined.insert(l.args.begin(), l.args.end());
      c.joins.push_back(std::move(l));
    } else {
      c.guards.push_back(std::move(l));
    }
  }
  for (std::size_t s = 0; s < c.n_universal; ++s) {
    if (!joined.count(s)) c.free_universal.push_back(s);
  }
  for (const auto &a : ed.consequent) {
    auto l = lit(a);
    std::size_t depth = 0;
    for (std::size_t s : l.args) {
      if (s >= c.n_universal) depth = std::max(depth, s - c.n_universal + 1);
    }
    c.ready_at.push_back(depth);
    c.consequent.push_back(std::move(l));
  }

  GeneralizedQuantifier q;
  q.name = name;
  for (const auto &r : order) q.type.push_back(arities.at(r));
  q.predicate = [c](std::span<const ValueId> domain, const std::vector<TupleSet> &rels) {
    return c(domain, rels);
  };
  return q;
}

DependencyClassification classify(const EmbeddedDependency &ed,
                                  const std::vector<Sort> &instance_sorts,
                                  const std::set<Sort> &source,
                                  const std::set<Sort> &target) {
  DependencyClassification out;
  auto is_eq = [](const EdAtom &a) { return a.kind == EdAtom::Kind::equality; };
  bool any_eq = std::any_of(ed.antecedent.begin(), ed.antecedent.end(), is_eq) ||
                std::any_of(ed.consequent.begin(), ed.consequent.end(), is_eq);
  out.tuple_generating = !any_eq;
  out.equality_generating = !ed.consequent.empty() && ed.existential.empty() &&
                            std::all_of(ed.consequent.begin(), ed.consequent.end(), is_eq);
  out.full = ed.existential.empty();
  out.one_head = ed.consequent.size() == 1;
  auto order = ed.relation_order();
  out.uni_relational = order.size() == 1;

  std::set<std::string> ante, cons;
  for (const auto &a : ed.antecedent) {
    if (!is_eq(a)) ante.insert(a.relation);
  }
  for (const auto &a : ed.consequent) {
    if (!is_eq(a)) cons.insert(a.relation);
  }
  out.separated = std::none_of(ante.begin(), ante.end(),
                               [&](const std::string &r) { return cons.count(r) != 0; });

  if (out.separated && instance_sorts.size() == order.size() && !order.empty()) {
    bool s2t = true, tgt = true;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const Sort &s = instance_sorts[i];
      if (ante.count(order[i])) {
        s2t = s2t && source.count(s);
      } else {
        s2t = s2t && target.count(s);
      }
      tgt = tgt && target.count(s);
    }
    if (s2t) {
      out.instance = InstanceClass::source_to_target;
    } else if (tgt) {
      out.instance = InstanceClass::target;
    }
  }
  return out;
}

std::string to_string(InstanceClass c) {
  switch (c) {
  case InstanceClass::source_to_target: return "source-to-target";
  case InstanceClass::target: return "target";
  case InstanceClass::neither: return "neither";
  }
  return "neither";
}

} // namespace polyteam
