#pragma once

#include "polyteam/core.hpp"
#include "polyteam/evaluator.hpp"
#include "polyteam/implication.hpp"

#include <iosfwd>
#include <json.hpp>

namespace polyteam::io {

using json = nlohmann::ordered_json;

class IoError : public Error {
public:
  using Error::Error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Header row first; cells are trimmed, double quotes group cells and `""`
/// escapes a quote; blank lines are skipped. Throws IoError on an empty
/// header or a row whose width differs from the header.
CsvTable parse_csv(std::istream &in, const std::string &source = "<input>");
CsvTable read_csv_file(const std::string &path);

/// Interns every cell into `a`. Duplicate rows collapse.
Team team_from_csv(const CsvTable &table, const Sort &sort, Structure &a);
Team load_team_csv(const std::string &path, const Sort &sort, Structure &a);

/// {"domain": [...], "relations": {"R": [[...], ...]}}. A relation may also
/// be given as {"arity": n, "tuples": [...]} so that an empty one still has
/// an arity. Values may be strings or numbers.
Structure parse_structure_json(const json &doc);
Structure load_structure_json(const std::string &path);

std::string read_text_file(const std::string &path);

struct ImplicationProblem {
  std::vector<PolyDep> sigma;
  PolyDep goal;
};

/// One atom per line; the goal is the single line starting with `|-`.
/// Lines starting with `#` are comments.
ImplicationProblem parse_implication_problem(std::string_view text,
                                             const ParseOptions &opts = {});

json to_json(const Team &t, const Structure &a);
json to_json(const Polyteam &x, const Structure &a);
json to_json(const EvalOutcome &o);
json to_json(const ImplicationVerdict &v, bool with_derivations = false);
json to_json(const Derivation &d);

} // namespace polyteam::io
