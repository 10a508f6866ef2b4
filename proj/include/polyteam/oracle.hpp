#pragma once

// Brute-force ground truth. Nothing here calls the optimized atom checkers or
// the evaluator except where a caller explicitly asks for the fast engine.

#include "polyteam/atoms.hpp"
#include "polyteam/core.hpp"
#include "polyteam/evaluator.hpp"
#include "polyteam/syntax.hpp"

namespace polyteam::oracle {

/// Every polyteam whose team at each listed sort has the given variables,
/// values below `value_count`, and at most `max_rows` rows. A sort with no
/// variables yields both the empty team and {∅}.
class PolyteamEnumerator {
public:
  PolyteamEnumerator(std::map<Sort, std::vector<std::string>> domains, std::size_t value_count,
                     std::size_t max_rows);

  bool next(Polyteam &out);
  std::uint64_t total() const { return total_; }
  void reset() { index_.assign(choices_.size(), 0), done_ = false; }

private:
  std::vector<std::vector<Team>> choices_;
  std::vector<std::size_t> index_;
  std::uint64_t total_ = 1;
  bool done_ = false;
};

/// All structures over {0..n-1} interpreting the given relation symbols.
class StructureEnumerator {
public:
  StructureEnumerator(std::size_t domain_size, std::map<std::string, std::size_t> arities);

  bool next(Structure &out);
  std::uint64_t total() const { return total_; }

private:
  std::size_t n_;
  std::vector<std::pair<std::string, std::size_t>> rels_;
  std::vector<std::vector<Tuple>> universe_; // all tuples per relation
  std::vector<std::uint64_t> mask_;
  std::uint64_t total_ = 1;
  bool done_ = false;
};

using RefTeam = std::set<Assignment>;
using RefPolyteam = std::map<Sort, RefTeam>;

RefPolyteam to_reference(const Polyteam &x);

bool naive_polydep(const RefPolyteam &x, const PolyDep &atom);
bool naive_polyinc(const RefPolyteam &x, const PolyInc &atom);
bool naive_polyexc(const RefPolyteam &x, const PolyExc &atom);
bool naive_polyind(const RefPolyteam &x, const PolyInd &atom);
bool naive_atom(const Structure &a, const RefPolyteam &x, const AtomInstance &atom,
                const AtomRegistry *registry);

class BudgetExceeded : public Error {
public:
  using Error::Error;
};

/// Definition-level evaluator: global disjunction splits every sort in play,
/// existentials try every choice function. Throws BudgetExceeded after
/// `budget` recursive steps.
bool reference_eval(const Structure &a, const Polyteam &x, const FormulaPtr &phi,
                    const AtomRegistry *registry = nullptr, std::uint64_t budget = 50'000'000);

struct ImplicationBounds {
  std::size_t domain_size = 3;
  std::size_t max_rows = 2;
  /// Enumerate every polyteam within bounds instead of the minimal shapes
  /// (one row per team for cross-sort goals, two rows for same-sort ones).
  bool exhaustive = false;
};

std::optional<Polyteam> semantic_counterexample(const std::vector<PolyDep> &sigma,
                                                const PolyDep &goal,
                                                const ImplicationBounds &bounds = {});

inline bool semantic_implies(const std::vector<PolyDep> &sigma, const PolyDep &goal,
                             const ImplicationBounds &bounds = {}) {
  return !semantic_counterexample(sigma, goal, bounds).has_value();
}

enum class Engine { fast, reference };

struct EquivalenceBounds {
  std::size_t domain_size = 2;
  std::size_t max_rows = 2;
  Engine left = Engine::reference;
  Engine right = Engine::fast;
  /// Skip polyteams in which some team is empty.
  bool nonempty_only = false;
  EvalConfig config;
  const AtomRegistry *registry = nullptr;
};

struct Witness {
  Structure structure;
  Polyteam polyteam;
  bool left_value = false;
  bool right_value = false;
};

struct EquivalenceResult {
  bool equivalent = true;
  std::optional<Witness> witness;
  std::uint64_t checked = 0;
  /// Instances skipped because an engine hit a cap.
  std::uint64_t inconclusive = 0;
};

/// Compares the two formulas on every structure over {0..n-1} for their
/// relation symbols and every polyteam within bounds over their free
/// variables. Stops at the first separating instance.
EquivalenceResult equivalent(const FormulaPtr &phi, const FormulaPtr &psi,
                             const EquivalenceBounds &bounds = {});

/// Free variables of both formulas by sort, over every sort either mentions.
std::map<Sort, std::vector<std::string>> joint_domains(const FormulaPtr &phi,
                                                       const FormulaPtr &psi);

} // namespace polyteam::oracle
