#pragma once

#include "polyteam/core.hpp"
#include "polyteam/syntax.hpp"

#include <functional>

namespace polyteam {

/// rel(X, x): the set of value tuples s(x) for s in X.
TupleSet extract_relation(const Team &team, const VarTuple &tuple);

bool check_polydep(const Polyteam &x, const PolyDep &atom);
bool check_polyinc(const Polyteam &x, const PolyInc &atom);
bool check_polyexc(const Polyteam &x, const PolyExc &atom);
bool check_polyind(const Polyteam &x, const PolyInd &atom);

/// Predicate over (domain A, R1, ..., Rn). Must be invariant under renaming
/// of A; this is the caller's obligation and is not checked.
using QuantifierPredicate =
    std::function<bool(std::span<const ValueId> domain, const std::vector<TupleSet> &rels)>;

struct GeneralizedQuantifier {
  std::string name;
  std::vector<std::size_t> type;
  QuantifierPredicate predicate;
};

class AtomRegistry {
public:
  void add(GeneralizedQuantifier q);
  const GeneralizedQuantifier *find(std::string_view name) const;
  SignatureTable signatures() const;
  bool empty() const { return quantifiers_.empty(); }

private:
  std::map<std::string, GeneralizedQuantifier, std::less<>> quantifiers_;
};

bool check_generalized(const Structure &a, const Polyteam &x,
                       const GeneralizedAtom &atom, const AtomRegistry &registry);

/// Dispatches on the atom kind. `registry` may be null when no generalized
/// atoms occur.
bool check_atom(const Structure &a, const Polyteam &x, const AtomInstance &atom,
                const AtomRegistry *registry);

// ---------------------------------------------------------------------------
// Embedded dependencies

struct EdAtom {
  enum class Kind { relation, equality };
  Kind kind = Kind::relation;
  std::string relation;
  std::vector<std::string> args;

  bool operator==(const EdAtom &) const = default;
};

/// forall x (phi(x) -> exists y psi(x, y)) with phi and psi conjunctions of
/// relational atoms and equalities.
struct EmbeddedDependency {
  std::vector<std::string> universal;
  std::vector<EdAtom> antecedent;
  std::vector<std::string> existential;
  std::vector<EdAtom> consequent;

  /// Relation symbols in order of first appearance, antecedent first.
  std::vector<std::string> relation_order() const;
  /// Arity of each relation symbol; throws on inconsistent use.
  std::map<std::string, std::size_t> relation_arities() const;
};

/// Text form:
///   forall x1 x2 y1 y2 . R1(x1,x2) /\ R2(y1,y2) /\ x1 = y1 -> x2 = y2
///   forall x y . R1(x,y) -> exists z . R2(x,z)
/// An empty side is written `true`.
EmbeddedDependency parse_embedded_dependency(std::string_view text);
std::string to_string(const EmbeddedDependency &ed);

/// Throws Error when a variable is used without being quantified, is
/// quantified twice, or relation arities clash.
void validate(const EmbeddedDependency &ed);

struct CompileOptions {
  /// Search existential witnesses over all of A rather than the active
  /// domain plus one fresh value.
  bool widen_to_full_domain = false;
};

/// Relation i of the quantifier is the i-th symbol of relation_order().
GeneralizedQuantifier compile_embedded_dependency(const std::string &name,
                                                  const EmbeddedDependency &ed,
                                                  CompileOptions opts = {});

enum class InstanceClass { source_to_target, target, neither };

struct DependencyClassification {
  bool tuple_generating = false;
  bool equality_generating = false;
  bool full = false;
  bool one_head = false;
  bool uni_relational = false;
  bool separated = false;
  InstanceClass instance = InstanceClass::neither;
};

/// `instance_sorts[i]` is the sort of the tuple bound to relation i of
/// relation_order(); may be empty when only syntactic flags are wanted.
DependencyClassification classify(const EmbeddedDependency &ed,
                                  const std::vector<Sort> &instance_sorts = {},
                                  const std::set<Sort> &source = {},
                                  const std::set<Sort> &target = {});

std::string to_string(InstanceClass c);

} // namespace polyteam
