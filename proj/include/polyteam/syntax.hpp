#pragma once

#include "polyteam/core.hpp"

#include <memory>
#include <set>
#include <variant>

namespace polyteam {

class ParseError : public Error {
public:
  ParseError(const std::string &message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " +
              message),
        message_(message), line_(line), column_(column) {}

  const std::string &message() const { return message_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

/// A tuple of variables that is meant to be single-sorted. The sort is stored
/// explicitly so the empty tuple still knows which team it refers to.
struct VarTuple {
  Sort sort;
  std::vector<Variable> vars;

  std::size_t size() const { return vars.size(); }
  bool empty() const { return vars.empty(); }
  std::vector<std::string> names() const;
  bool operator==(const VarTuple &) const = default;
};

VarTuple tuple_of(std::string_view sort, std::initializer_list<std::string_view> names);
VarTuple concat(const VarTuple &a, const VarTuple &b);

/// =(x ; y | u ; v)
struct PolyDep {
  VarTuple x, y, u, v;
  bool operator==(const PolyDep &) const = default;
};

/// x ⊆ y
struct PolyInc {
  VarTuple lhs, rhs;
  bool operator==(const PolyInc &) const = default;
};

/// x | y
struct PolyExc {
  VarTuple lhs, rhs;
  bool operator==(const PolyExc &) const = default;
};

/// ⟨x, a / u⟩⟨y / v⟩⟨b / w⟩ with x, y of sort i; a, b of sort j; u, v, w of
/// sort k.
struct PolyInd {
  VarTuple x, a, u, y, v, b, w;
  bool operator==(const PolyInd &) const = default;
};

struct GeneralizedAtom {
  std::string name;
  std::vector<VarTuple> args;
  bool operator==(const GeneralizedAtom &) const = default;
};

using AtomInstance =
    std::variant<PolyDep, PolyInc, PolyExc, PolyInd, GeneralizedAtom>;

/// Every tuple of the atom in argument order.
std::vector<const VarTuple *> atom_tuples(const AtomInstance &atom);
std::string atom_to_string(const AtomInstance &atom);

enum class NodeKind {
  top,
  eq,
  neq,
  rel,
  neg_rel,
  conj,
  or_global,
  or_local,
  exists,
  forall,
  atom
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  NodeKind kind = NodeKind::top;
  /// eq/neq operands; `x` is also the bound variable of a quantifier.
  Variable x, y;
  /// Relation literals.
  std::string relation;
  VarTuple args;
  /// Binary connectives use both; quantifiers use `left` as the body.
  FormulaPtr left, right;
  /// Index set of a local disjunction.
  std::set<Sort> sorts;
  std::optional<AtomInstance> atom;
};

FormulaPtr make_top();
FormulaPtr make_eq(Variable x, Variable y);
FormulaPtr make_neq(Variable x, Variable y);
FormulaPtr make_rel(std::string name, VarTuple args);
FormulaPtr make_neg_rel(std::string name, VarTuple args);
FormulaPtr make_and(FormulaPtr a, FormulaPtr b);
FormulaPtr make_or(FormulaPtr a, FormulaPtr b);
FormulaPtr make_or_local(std::set<Sort> sorts, FormulaPtr a, FormulaPtr b);
FormulaPtr make_or_local(Sort sort, FormulaPtr a, FormulaPtr b);
FormulaPtr make_exists(Variable x, FormulaPtr body);
FormulaPtr make_forall(Variable x, FormulaPtr body);
FormulaPtr make_atom(AtomInstance atom);

bool structurally_equal(const Formula &a, const Formula &b);

/// Generalized-atom name -> arity of each argument tuple.
using SignatureTable = std::map<std::string, std::vector<std::size_t>>;

struct ParseOptions {
  /// Accept the `_fr` prefix that is reserved for generated variables.
  bool allow_reserved = false;
  /// When set, every sort must be listed here.
  std::optional<std::set<Sort>> known_sorts;
  /// When set, generalized atoms must be listed with matching arities.
  std::optional<SignatureTable> signatures;
};

inline constexpr std::string_view reserved_prefix = "_fr";

FormulaPtr parse_formula(std::string_view text, const ParseOptions &opts = {});
/// One `pdep(...)` per nonempty, non-comment line.
std::vector<PolyDep> parse_polydep_list(std::string_view text,
                                        const ParseOptions &opts = {});
PolyDep parse_polydep(std::string_view text, const ParseOptions &opts = {});

std::string to_string(const Formula &f);
std::string to_string(const FormulaPtr &f);
std::string to_string(const VarTuple &t);
std::string to_string(const PolyDep &d);

using FreeVariableReport = std::map<Sort, std::set<std::string>>;

FreeVariableReport free_variables(const Formula &f);
/// Sorts of every variable (free or bound), every atom tuple, and every
/// local-disjunction index.
std::set<Sort> mentioned_sorts(const Formula &f);
/// All variable names occurring anywhere, bound or free.
std::set<Variable> all_variables(const Formula &f);
/// Relation symbol -> arity as used in `f`.
std::map<std::string, std::size_t> relation_symbols(const Formula &f);

/// Empty iff `f` is well-sorted.
std::vector<std::string> check_well_sorted(const Formula &f,
                                           const SignatureTable *signatures = nullptr);
std::vector<std::string> check_atom_well_sorted(const AtomInstance &atom,
                                                const SignatureTable *signatures = nullptr);

} // namespace polyteam
