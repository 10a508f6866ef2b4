#pragma once

#include "polyteam/atoms.hpp"
#include "polyteam/core.hpp"
#include "polyteam/syntax.hpp"

#include <chrono>
#include <cstdint>

namespace polyteam {

struct EvalConfig {
  /// Largest team the evaluator may build by quantifier expansion.
  std::size_t max_expanded_team_rows = std::size_t{1} << 20;
  /// Largest number of rows over which a split or a per-row subset choice is
  /// enumerated exhaustively.
  std::size_t max_split_assignments = 20;
  std::chrono::milliseconds timeout{10 * 60 * 1000};
  bool memoization = true;

  /// Throws Error unless every cap is positive.
  void validate() const;
};

enum class Verdict { satisfied, violated, resource_exhausted };

/// "true", "false" or "resource_exhausted".
std::string to_string(Verdict v);

struct EvalStats {
  std::uint64_t nodes_visited = 0;
  std::uint64_t cache_hits = 0;
};

struct EvalOutcome {
  Verdict verdict = Verdict::violated;
  EvalStats stats;
  /// Which cap tripped, when the verdict is resource_exhausted.
  std::string detail;

  bool holds() const { return verdict == Verdict::satisfied; }
  bool exhausted() const { return verdict == Verdict::resource_exhausted; }
};

/// Lax polyteam semantics. Sorts absent from `x` are read as {∅}; a free
/// variable missing from the team of its sort raises SortedDomainError.
/// Ill-sorted formulas raise Error.
EvalOutcome eval(const Structure &a, const Polyteam &x, const FormulaPtr &phi,
                 const EvalConfig &cfg = {}, const AtomRegistry *registry = nullptr);

/// Truth of a sentence: evaluation on the polyteam of singleton empty teams.
EvalOutcome eval_sentence(const Structure &a, const FormulaPtr &phi,
                          const EvalConfig &cfg = {},
                          const AtomRegistry *registry = nullptr);

/// Lists every lax cover (Y, Z) of a team, routing each row to the left,
/// the right or both.
class CoverEnumerator {
public:
  /// Throws Error when the team has more than `max_rows` rows.
  CoverEnumerator(Team team, std::size_t max_rows);

  /// Writes the next cover and returns true, or returns false when done.
  bool next(Team &left, Team &right);
  std::uint64_t total() const { return total_; }

private:
  Team team_;
  std::uint64_t index_ = 0;
  std::uint64_t total_ = 1;
};

} // namespace polyteam
