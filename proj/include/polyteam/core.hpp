#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace polyteam {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A variable was used outside the domain of the team of its sort, or two
/// teams that must share a domain do not.
class SortedDomainError : public Error {
public:
  using Error::Error;
};

class InvalidChoiceError : public Error {
public:
  using Error::Error;
};

struct Sort {
  std::string name;

  auto operator<=>(const Sort &) const = default;
  bool operator==(const Sort &) const = default;
};

struct Variable {
  Sort sort;
  std::string name;

  auto operator<=>(const Variable &) const = default;
  bool operator==(const Variable &) const = default;

  std::string str() const { return sort.name + "." + name; }
};

inline Variable var(std::string_view sort, std::string_view name) {
  return Variable{Sort{std::string(sort)}, std::string(name)};
}

using ValueId = std::uint32_t;
using Tuple = std::vector<ValueId>;
using TupleSet = std::set<Tuple>;

/// Keys are variable names of the owning team's sort.
using Assignment = std::map<std::string, ValueId>;

struct TupleHash {
  std::size_t operator()(std::span<const ValueId> t) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (ValueId v : t) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
  std::size_t operator()(const Tuple &t) const noexcept {
    return (*this)(std::span<const ValueId>(t));
  }
};

/// A set of assignments over one sorted domain. Rows are kept sorted and
/// duplicate-free; the domain is kept sorted by variable name.
class Team {
public:
  Team() = default;
  /// The empty team over `domain`.
  Team(Sort sort, std::vector<std::string> domain);

  /// The team {∅}: one row, empty domain.
  static Team singleton_empty(Sort sort);

  /// Rows are given in the order of `domain` (which need not be sorted).
  static Team from_rows(Sort sort, std::vector<std::string> domain,
                        const std::vector<Tuple> &rows);
  static Team from_assignments(Sort sort, std::vector<std::string> domain,
                               std::span<const Assignment> rows);
  /// Fast path: `domain` must already be sorted and `cells` row-major over
  /// it. `rows` is needed because a width-0 team has no cells.
  static Team from_cells(Sort sort, std::vector<std::string> domain,
                         std::vector<ValueId> cells, std::size_t rows);

  const Sort &sort() const { return sort_; }
  const std::vector<std::string> &domain() const { return domain_; }
  std::size_t width() const { return domain_.size(); }
  std::size_t size() const { return rows_; }
  bool empty() const { return rows_ == 0; }
  const std::vector<ValueId> &cells() const { return cells_; }

  std::span<const ValueId> row(std::size_t r) const {
    return {cells_.data() + r * domain_.size(), domain_.size()};
  }
  Assignment assignment(std::size_t r) const;

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
  bool has_variable(std::string_view name) const {
    return column(name).has_value();
  }

  bool contains_row(std::span<const ValueId> row) const;

  /// X↾V. Every name must be in the domain.
  Team project(const std::vector<std::string> &vars) const;
  /// X[A/x].
  Team expand_all(const Variable &x, std::span<const ValueId> values) const;
  /// X[F/x]; `choices[r]` is F(row r) and must be nonempty.
  Team expand_choice(const Variable &x,
                     std::span<const std::vector<ValueId>> choices) const;
  /// The subteam consisting of the given row indices.
  Team select(std::span<const std::size_t> rows) const;

  bool subset_of(const Team &other) const;
  Team unite(const Team &other) const;

  bool operator==(const Team &) const = default;

private:
  void normalize();
  std::size_t insert_column(const std::string &name,
                            std::vector<std::string> &new_domain) const;

  Sort sort_;
  std::vector<std::string> domain_;
  std::vector<ValueId> cells_;
  std::size_t rows_ = 0;
};

/// Finite map from sorts to teams. Sorts absent from the map stand for the
/// singleton team {∅}.
class Polyteam {
public:
  Polyteam() = default;
  explicit Polyteam(std::vector<Team> teams);

  void set(Team team);
  bool contains(const Sort &sort) const { return teams_.count(sort) != 0; }
  const Team *find(const Sort &sort) const;
  /// Never fails: absent sorts yield {∅}.
  Team at(const Sort &sort) const;
  const std::map<Sort, Team> &teams() const { return teams_; }

  bool operator==(const Polyteam &) const = default;

private:
  std::map<Sort, Team> teams_;
};

bool subteam_of(const Polyteam &x, const Polyteam &y);
Polyteam polyteam_union(const Polyteam &x, const Polyteam &y);
Polyteam polyteam_restrict(const Polyteam &x,
                           const std::map<Sort, std::vector<std::string>> &vars);

Team team_expand_all(const Team &x, const Variable &var,
                     std::span<const ValueId> values);
Team team_expand_choice(const Team &x, const Variable &var,
                        std::span<const std::vector<ValueId>> choices);

struct Relation {
  std::size_t arity = 0;
  TupleSet tuples;

  bool contains(std::span<const ValueId> t) const {
    return tuples.count(Tuple(t.begin(), t.end())) != 0;
  }
};

/// Finite relational structure. Values are interned: every distinct value
/// string gets one id, and the domain is exactly the set of interned values.
class Structure {
public:
  Structure() = default;
  /// Domain {"0", ..., "n-1"} with ids 0..n-1.
  static Structure with_domain_size(std::size_t n);

  ValueId intern(std::string_view value);
  std::optional<ValueId> find_value(std::string_view value) const;
  const std::string &value_name(ValueId id) const { return names_.at(id); }
  std::size_t domain_size() const { return names_.size(); }
  const std::vector<ValueId> &domain() const { return ids_; }

  Relation &add_relation(const std::string &name, std::size_t arity);
  void add_tuple(const std::string &name, Tuple tuple);
  const Relation *relation(std::string_view name) const;
  const std::map<std::string, Relation, std::less<>> &relations() const {
    return relations_;
  }

  /// Throws Error when the domain is empty or a tuple is malformed.
  void validate() const;

private:
  std::vector<std::string> names_;
  std::vector<ValueId> ids_;
  std::unordered_map<std::string, ValueId> index_;
  std::map<std::string, Relation, std::less<>> relations_;
};

} // namespace polyteam
