#include "polyteam/core.hpp"

#include <algorithm>
#include <numeric>

namespace polyteam {

namespace {

std::string join_domain(const std::vector<std::string> &d) {
  std::string out = "{";
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) out += ",";
    out += d[i];
  }
  return out + "}";
}

} // namespace

Team::Team(Sort sort, std::vector<std::string> domain)
    : sort_(std::move(sort)), domain_(std::move(domain)) {
  std::sort(domain_.begin(), domain_.end());
  if (std::adjacent_find(domain_.begin(), domain_.end()) != domain_.end()) {
    throw SortedDomainError("duplicate variable in domain of team " +
                            sort_.name);
  }
}

Team Team::singleton_empty(Sort sort) {
  Team t(std::move(sort), {});
  t.rows_ = 1;
  return t;
}

Team Team::from_rows(Sort sort, std::vector<std::string> domain,
                     const std::vector<Tuple> &rows) {
  std::vector<std::size_t> perm(domain.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(),
            [&](std::size_t a, std::size_t b) { return domain[a] < domain[b]; });
  Team t(std::move(sort), domain);
  t.cells_.reserve(rows.size() * domain.size());
  for (const auto &r : rows) {
    if (r.size() != domain.size()) {
      throw SortedDomainError("row width " + std::to_string(r.size()) +
                              " does not match domain " + join_domain(domain));
    }
    for (std::size_t c : perm) t.cells_.push_back(r[c]);
  }
  t.rows_ = rows.size();
  t.normalize();
  return t;
}

Team Team::from_assignments(Sort sort, std::vector<std::string> domain,
                            std::span<const Assignment> rows) {
  Team t(std::move(sort), std::move(domain));
  for (const auto &a : rows) {
    if (a.size() != t.domain_.size()) {
      throw SortedDomainError("assignment keys do not match team domain " +
                              join_domain(t.domain_));
    }
    for (const auto &name : t.domain_) {
      auto it = a.find(name);
      if (it == a.end()) {
        throw SortedDomainError("assignment lacks variable " + name);
      }
      t.cells_.push_back(it->second);
    }
  }
  t.rows_ = rows.size();
  t.normalize();
  return t;
}

Team Team::from_cells(Sort sort, std::vector<std::string> domain,
                      std::vector<ValueId> cells, std::size_t rows) {
  Team t;
  t.sort_ = std::move(sort);
  t.domain_ = std::move(domain);
  t.rows_ = rows;
  t.cells_ = std::move(cells);
  if (t.cells_.size() != rows * t.domain_.size()) {
    throw SortedDomainError("cell count does not match rows times width");
  }
  t.normalize();
  return t;
}

void Team::normalize() {
  const std::size_t w = domain_.size();
  if (w == 0) {
    rows_ = std::min<std::size_t>(rows_, 1);
    return;
  }
  if (rows_ <= 1) return;
  std::vector<std::size_t> idx(rows_);
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(
        cells_.begin() + a * w, cells_.begin() + (a + 1) * w,
        cells_.begin() + b * w, cells_.begin() + (b + 1) * w);
  };
  auto equal = [&](std::size_t a, std::size_t b) {
    return std::equal(cells_.begin() + a * w, cells_.begin() + (a + 1) * w,
                      cells_.begin() + b * w);
  };
  bool sorted = true;
  for (std::size_t r = 1; r < rows_ && sorted; ++r) {
    sorted = less(r - 1, r);
  }
  if (sorted) return;
  std::sort(idx.begin(), idx.end(), less);
  std::vector<ValueId> out;
  out.reserve(cells_.size());
  std::size_t kept = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0 && equal(idx[i - 1], idx[i])) continue;
    out.insert(out.end(), cells_.begin() + idx[i] * w,
               cells_.begin() + (idx[i] + 1) * w);
    ++kept;
  }
  cells_ = std::move(out);
  rows_ = kept;
}

Assignment Team::assignment(std::size_t r) const {
  Assignment a;
  auto cells = row(r);
  for (std::size_t c = 0; c < domain_.size(); ++c) a.emplace(domain_[c], cells[c]);
  return a;
}

std::optional<std::size_t> Team::column(std::string_view name) const {
  auto it = std::lower_bound(domain_.begin(), domain_.end(), name);
  if (it == domain_.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - domain_.begin());
}

std::size_t Team::require_column(std::string_view name) const {
  auto c = column(name);
  if (!c) {
    throw SortedDomainError("variable " + sort_.name + "." + std::string(name) +
                            " is not in the domain " + join_domain(domain_) +
                            " of team " + sort_.name);
  }
  return *c;
}

bool Team::contains_row(std::span<const ValueId> r) const {
  const std::size_t w = domain_.size();
  if (r.size() != w) return false;
  if (w == 0) return rows_ == 1;
  std::size_t lo = 0, hi = rows_;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    auto m = row(mid);
    if (std::lexicographical_compare(m.begin(), m.end(), r.begin(), r.end())) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo < rows_ && std::equal(r.begin(), r.end(), row(lo).begin());
}

Team Team::project(const std::vector<std::string> &vars) const {
  std::vector<std::string> sorted = vars;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted == domain_) return *this;
  std::vector<std::size_t> cols;
  cols.reserve(sorted.size());
  for (const auto &v : sorted) cols.push_back(require_column(v));
  std::vector<ValueId> cells;
  cells.reserve(rows_ * cols.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    auto src = row(r);
    for (std::size_t c : cols) cells.push_back(src[c]);
  }
  Team t;
  t.sort_ = sort_;
  t.domain_ = std::move(sorted);
  t.rows_ = t.domain_.empty() ? std::min<std::size_t>(rows_, 1) : rows_;
  t.cells_ = std::move(cells);
  t.normalize();
  return t;
}

std::size_t Team::insert_column(const std::string &name,
                                std::vector<std::string> &new_domain) const {
  new_domain = domain_;
  auto it = std::lower_bound(new_domain.begin(), new_domain.end(), name);
  std::size_t pos = static_cast<std::size_t>(it - new_domain.begin());
  if (it == new_domain.end() || *it != name) new_domain.insert(it, name);
  return pos;
}

Team Team::expand_all(const Variable &x, std::span<const ValueId> values) const {
  std::vector<std::vector<ValueId>> choices(
      rows_, std::vector<ValueId>(values.begin(), values.end()));
  return expand_choice(x, choices);
}

Team Team::expand_choice(const Variable &x,
                         std::span<const std::vector<ValueId>> choices) const {
  if (x.sort != sort_) {
    throw SortedDomainError("variable " + x.str() +
                            " cannot extend a team of sort " + sort_.name);
  }
  if (choices.size() != rows_) {
    throw InvalidChoiceError("choice function must give one value set per row");
  }
  std::vector<std::string> nd;
  const std::size_t pos = insert_column(x.name, nd);
  const bool overwrite = nd.size() == domain_.size();
  const std::size_t nw = nd.size();
  std::vector<ValueId> cells;
  for (std::size_t r = 0; r < rows_; ++r) {
    if (choices[r].empty()) {
      throw InvalidChoiceError("choice function assigns the empty set to row " +
                               std::to_string(r));
    }
    auto src = row(r);
    for (ValueId a : choices[r]) {
      for (std::size_t c = 0, s = 0; c < nw; ++c) {
        if (c == pos) {
          cells.push_back(a);
          if (overwrite) ++s;
        } else {
          cells.push_back(src[s++]);
        }
      }
    }
  }
  Team t;
  t.sort_ = sort_;
  t.domain_ = std::move(nd);
  t.rows_ = cells.size() / nw;
  t.cells_ = std::move(cells);
  t.normalize();
  return t;
}

Team Team::select(std::span<const std::size_t> rows) const {
  std::vector<ValueId> cells;
  cells.reserve(rows.size() * domain_.size());
  for (std::size_t r : rows) {
    auto src = row(r);
    cells.insert(cells.end(), src.begin(), src.end());
  }
  Team t;
  t.sort_ = sort_;
  t.domain_ = domain_;
  t.rows_ = domain_.empty() ? std::min<std::size_t>(rows.size(), rows_)
                            : rows.size();
  t.cells_ = std::move(cells);
  t.normalize();
  return t;
}

bool Team::subset_of(const Team &other) const {
  if (domain_ != other.domain_) {
    throw SortedDomainError("teams of sort " + sort_.name +
                            " have different domains " + join_domain(domain_) +
                            " and " + join_domain(other.domain_));
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    if (!other.contains_row(row(r))) return false;
  }
  return true;
}

Team Team::unite(const Team &other) const {
  if (domain_ != other.domain_) {
    throw SortedDomainError("cannot unite teams of sort " + sort_.name +
                            " over domains " + join_domain(domain_) + " and " +
                            join_domain(other.domain_));
  }
  Team t = *this;
  t.cells_.insert(t.cells_.end(), other.cells_.begin(), other.cells_.end());
  t.rows_ += other.rows_;
  t.normalize();
  return t;
}

Polyteam::Polyteam(std::vector<Team> teams) {
  for (auto &t : teams) set(std::move(t));
}

void Polyteam::set(Team team) {
  Sort s = team.sort();
  teams_.insert_or_assign(std::move(s), std::move(team));
}

const Team *Polyteam::find(const Sort &sort) const {
  auto it = teams_.find(sort);
  return it == teams_.end() ? nullptr : &it->second;
}

Team Polyteam::at(const Sort &sort) const {
  if (const Team *t = find(sort)) return *t;
  return Team::singleton_empty(sort);
}

namespace {

std::set<Sort> sort_union(const Polyteam &x, const Polyteam &y) {
  std::set<Sort> out;
  for (const auto &[s, _] : x.teams()) out.insert(s);
  for (const auto &[s, _] : y.teams()) out.insert(s);
  return out;
}

} // namespace

bool subteam_of(const Polyteam &x, const Polyteam &y) {
  for (const auto &s : sort_union(x, y)) {
    if (!x.at(s).subset_of(y.at(s))) return false;
  }
  return true;
}

Polyteam polyteam_union(const Polyteam &x, const Polyteam &y) {
  Polyteam out;
  for (const auto &s : sort_union(x, y)) out.set(x.at(s).unite(y.at(s)));
  return out;
}

Polyteam polyteam_restrict(const Polyteam &x,
                           const std::map<Sort, std::vector<std::string>> &vars) {
  Polyteam out = x;
  for (const auto &[s, v] : vars) out.set(x.at(s).project(v));
  return out;
}

Team team_expand_all(const Team &x, const Variable &var,
                     std::span<const ValueId> values) {
  return x.expand_all(var, values);
}

Team team_expand_choice(const Team &x, const Variable &var,
                        std::span<const std::vector<ValueId>> choices) {
  return x.expand_choice(var, choices);
}

Structure Structure::with_domain_size(std::size_t n) {
  Structure s;
  for (std::size_t i = 0; i < n; ++i) s.intern(std::to_string(i));
  return s;
}

ValueId Structure::intern(std::string_view value) {
  std::string key(value);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  ValueId id = static_cast<ValueId>(names_.size());
  names_.push_back(key);
  ids_.push_back(id);
  index_.emplace(std::move(key), id);
  return id;
}

std::optional<ValueId> Structure::find_value(std::string_view value) const {
  auto it = index_.find(std::string(value));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Relation &Structure::add_relation(const std::string &name, std::size_t arity) {
  auto it = relations_.find(name);
  if (it != relations_.end()) {
    if (it->second.arity != arity) {
      throw Error("relation " + name + " redeclared with arity " +
                  std::to_string(arity) + " (was " +
                  std::to_string(it->second.arity) + ")");
    }
    return it->second;
  }
  Relation &r = relations_[name];
  r.arity = arity;
  return r;
}

void Structure::add_tuple(const std::string &name, Tuple tuple) {
  Relation &r = add_relation(name, tuple.size());
  for (ValueId v : tuple) {
    if (v >= names_.size()) {
      throw Error("relation " + name + " holds a value outside the domain");
    }
  }
  r.tuples.insert(std::move(tuple));
}

const Relation *Structure::relation(std::string_view name) const {
  auto it = relations_.find(name);
  return it == relations_.end() ? nullptr : &it->second;
}

void Structure::validate() const {
  if (names_.empty()) throw Error("structure domain is empty");
  for (const auto &[name, rel] : relations_) {
    for (const auto &t : rel.tuples) {
      if (t.size() != rel.arity) {
        throw Error("relation " + name + " has a tuple of wrong arity");
      }
      for (ValueId v : t) {
        if (v >= names_.size()) {
          throw Error("relation " + name + " holds a value outside the domain");
        }
      }
    }
  }
}

} // namespace polyteam
