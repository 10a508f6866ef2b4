#pragma once

#include "polyteam/core.hpp"
#include "polyteam/syntax.hpp"

namespace polyteam {

class RuleApplicationError : public Error {
public:
  using Error::Error;
};

/// One fired atom of Σ. For cross-sort goals `oriented` points from the
/// goal's left sort to its right sort; `symmetric` says whether Symmetry was
/// needed for that.
struct TraceStep {
  std::size_t atom_index = 0;
  bool symmetric = false;
  PolyDep oriented;
  std::vector<std::pair<Variable, Variable>> merged;
};

struct Counterexample {
  Structure structure;
  Polyteam polyteam;
  /// Variable -> the class value it is mapped to in the singleton teams. For
  /// same-sort goals: the value the variable takes in the second row.
  std::map<Variable, std::string> classes;
};

struct ImplicationVerdict {
  bool implied = false;
  bool same_sort = false;
  std::vector<PolyDep> sigma;
  PolyDep goal;
  std::vector<TraceStep> trace;
  std::optional<Counterexample> counterexample;
};

/// Throws Error when an atom is malformed: tuple lengths differ, mixed sorts
/// inside a tuple, or a same-sort atom whose two sides differ.
void validate_polydep(const PolyDep &atom);

ImplicationVerdict decide(const std::vector<PolyDep> &sigma, const PolyDep &goal);

/// True iff the verdict's counterexample satisfies every atom of Σ and
/// violates the goal. False when there is no counterexample.
bool verify_counterexample(const ImplicationVerdict &verdict);

enum class Rule {
  hypothesis,
  reflexivity,
  augmentation,
  transitivity,
  union_rule,
  symmetry,
  weak_transitivity
};

std::string to_string(Rule r);

/// Tuple arguments of Reflexivity (x, y, k) and Augmentation (z, w).
struct RuleParams {
  VarTuple first;
  VarTuple second;
  std::size_t k = 0; // 0-based projection index
};

/// Applies a single inference rule. Throws RuleApplicationError when the
/// premises or parameters do not have the rule's shape. `hypothesis` is not
/// accepted here.
PolyDep derive_rule(Rule rule, std::span<const PolyDep> premises,
                    const RuleParams &params = {});

struct DerivationStep {
  Rule rule = Rule::hypothesis;
  /// Earlier step indices used as premises.
  std::vector<std::size_t> premises;
  /// Index into Σ when rule is hypothesis.
  std::size_t hypothesis = 0;
  RuleParams params;
  PolyDep conclusion;
};

using Derivation = std::vector<DerivationStep>;

/// For an implied verdict, one derivation per consequent position t of the
/// goal, concluding =(x; y_t | u; v_t). Throws Error on a refuted verdict.
std::vector<Derivation> replay(const ImplicationVerdict &verdict);

/// Re-applies every step and checks that the last one concludes `goal`.
bool check_derivation(const std::vector<PolyDep> &sigma, const Derivation &d,
                      const PolyDep &goal);

/// =(x; y_t | u; v_t).
PolyDep consequent_projection(const PolyDep &atom, std::size_t t);

} // namespace polyteam
