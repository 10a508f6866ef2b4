#pragma once

#include "polyteam/syntax.hpp"

namespace polyteam {

class UnsupportedRewrite : public Error {
public:
  using Error::Error;
};

class DecompositionError : public Error {
public:
  using Error::Error;
};

/// Hands out `_fr<n>` variables that occur nowhere in the formulas it was
/// told to avoid.
class FreshNameSource {
public:
  FreshNameSource() = default;
  explicit FreshNameSource(const Formula &avoid) { this->avoid(avoid); }

  void avoid(const Formula &f);
  void avoid(const AtomInstance &atom);
  Variable fresh(const Sort &sort);
  VarTuple fresh_tuple(const Sort &sort, std::size_t n);

private:
  std::map<Sort, std::size_t> next_;
  std::set<Variable> used_;
};

/// The atom translations e1..e8 (there is no e7).
enum class LemmaRule { e1, e2, e3, e4, e5, e6, e8 };

std::string to_string(LemmaRule r);
std::optional<LemmaRule> parse_lemma_rule(std::string_view name);

/// True when `rule` rewrites atoms of this kind and its sort side
/// conditions hold.
bool lemma_applies(LemmaRule rule, const AtomInstance &atom);

/// Throws UnsupportedRewrite when the rule does not apply.
FormulaPtr translate_atom(const AtomInstance &atom, LemmaRule rule, FreshNameSource &fresh);

/// Rewrites every atom the rule applies to and leaves the rest alone.
FormulaPtr rewrite_all(const FormulaPtr &phi, LemmaRule rule, FreshNameSource &fresh);

enum class AtomKind { pdep, pinc, pexc, pind, generalized };

AtomKind kind_of(const AtomInstance &atom);
std::string to_string(AtomKind k);

/// Rewrites atoms until only kinds in `allowed` remain, chaining lemma rules.
/// Throws UnsupportedRewrite when some atom has no path into the dialect.
FormulaPtr to_dialect(const FormulaPtr &phi, const std::set<AtomKind> &allowed,
                      FreshNameSource &fresh);

struct EliminationResult {
  FormulaPtr formula;
  std::vector<std::string> warnings;
};

/// Replaces every global disjunction, and every local one over more than one
/// sort, by local disjunctions over single sorts. The result agrees with the
/// input on structures with at least two elements.
EliminationResult eliminate_global_disjunction(const FormulaPtr &phi, FreshNameSource &fresh);

/// f_i(phi) for every sort i mentioned in phi. Requires uni-atoms only and no
/// global or multi-sort disjunction; throws DecompositionError otherwise.
std::map<Sort, FormulaPtr> decompose_uniatom_formula(const FormulaPtr &phi);

} // namespace polyteam
