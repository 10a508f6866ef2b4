#include "polyteam/io.hpp"

#include <fstream>
#include <sstream>

namespace polyteam::io {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// Splits one record. Quoted cells keep inner whitespace; unquoted cells are
/// trimmed.
std::vector<std::string> split_record(const std::string &line, const std::string &where) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false, was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!trim(cur).empty()) throw IoError(where + ": stray quote inside a cell");
      cur.clear();
      quoted = was_quoted = true;
    } else if (c == ',') {
      cells.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else if (was_quoted) {
      if (!std::isspace(static_cast<unsigned char>(c))) {
        throw IoError(where + ": text after a closing quote");
      }
    } else {
      cur += c;
    }
  }
  if (quoted) throw IoError(where + ": unterminated quote");
  cells.push_back(was_quoted ? cur : trim(cur));
  return cells;
}

std::string value_text(const json &v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw IoError("structure values must be strings or numbers");
}

} // namespace

CsvTable parse_csv(std::istream &in, const std::string &source) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::string where = source + ":" + std::to_string(lineno);
    auto cells = split_record(line, where);
    if (!have_header) {
      for (const auto &h : cells) {
        if (h.empty()) throw IoError(where + ": empty column name in header");
      }
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw IoError(where + ": row has " + std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw IoError(source + ": missing header row");
  return t;
}

CsvTable read_csv_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_csv(in, path);
}

Team team_from_csv(const CsvTable &table, const Sort &sort, Structure &a) {
  std::vector<Tuple> rows;
  rows.reserve(table.rows.size());
  for (const auto &r : table.rows) {
    Tuple t;
    for (const auto &cell : r) t.push_back(a.intern(cell));
    rows.push_back(std::move(t));
  }
  return Team::from_rows(sort, table.header, rows);
}

Team load_team_csv(const std::string &path, const Sort &sort, Structure &a) {
  return team_from_csv(read_csv_file(path), sort, a);
}

Structure parse_structure_json(const json &doc) {
  if (!doc.is_object()) throw IoError("structure file must hold a JSON object");
  Structure a;
  if (doc.contains("domain")) {
    for (const auto &v : doc.at("domain")) a.intern(value_text(v));
  }
  if (doc.contains("relations")) {
    for (const auto &[name, spec] : doc.at("relations").items()) {
      const json *tuples = &spec;
      std::optional<std::size_t> arity;
      if (spec.is_object()) {
        arity = spec.at("arity").get<std::size_t>();
        tuples = &spec.at("tuples");
      }
      if (!tuples->is_array()) throw IoError("relation " + name + " must list tuples");
      if (!arity && !tuples->empty()) arity = tuples->front().size();
      if (!arity) continue; // empty and arity unknown: resolved by the caller
      a.add_relation(name, *arity);
      for (const auto &tj : *tuples) {
        if (!tj.is_array()) throw IoError("relation " + name + " has a non-array tuple");
        Tuple t;
        for (const auto &v : tj) t.push_back(a.intern(value_text(v)));
        a.add_tuple(name, std::move(t));
      }
    }
  }
  return a;
}

std::string read_text_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ImplicationProblem parse_implication_problem(std::string_view text, const ParseOptions &opts) {
  std::string premises;
  std::optional<PolyDep> goal;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.rfind("|-", 0) == 0) {
      if (goal) throw ParseError("second goal line", line_no, 1);
      try {
        goal = parse_polydep(std::string_view(line).substr(2), opts);
      } catch (const ParseError &e) {
        throw ParseError(e.message(), line_no, e.column() + 2);
      }
      premises += '\n'; // keep line numbers aligned
    } else {
      premises += line + '\n';
    }
  }
  if (!goal) throw ParseError("no goal line starting with '|-'", line_no, 1);
  return ImplicationProblem{parse_polydep_list(premises, opts), *goal};
}

Structure load_structure_json(const std::string &path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error &e) {
    throw IoError(path + ": " + e.what());
  }
  return parse_structure_json(doc);
}

json to_json(const Team &t, const Structure &a) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.size(); ++r) {
    json row = json::array();
    for (ValueId v : t.row(r)) row.push_back(a.value_name(v));
    rows.push_back(std::move(row));
  }
  return json{{"variables", t.domain()}, {"rows", std::move(rows)}};
}

json to_json(const Polyteam &x, const Structure &a) {
  json out = json::object();
  for (const auto &[sort, team] : x.teams()) out[sort.name] = to_json(team, a);
  return out;
}

json to_json(const EvalOutcome &o) {
  json out{{"verdict", to_string(o.verdict)},
           {"stats", {{"nodes_visited", o.stats.nodes_visited}, {"cache_hits", o.stats.cache_hits}}}};
  if (!o.detail.empty()) out["exhausted"] = o.detail;
  return out;
}

json to_json(const Derivation &d) {
  json steps = json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto &s = d[i];
    json step{{"step", i}, {"rule", to_string(s.rule)}, {"conclusion", to_string(s.conclusion)}};
    if (s.rule == Rule::hypothesis) step["hypothesis"] = s.hypothesis;
    if (!s.premises.empty()) step["premises"] = s.premises;
    steps.push_back(std::move(step));
  }
  return steps;
}

json to_json(const ImplicationVerdict &v, bool with_derivations) {
  json out{{"implied", v.implied}, {"goal", to_string(v.goal)}};
  if (v.implied) {
    json trace = json::array();
    for (const auto &t : v.trace) {
      json merged = json::array();
      for (const auto &[p, q] : t.merged) merged.push_back(json::array({p.str(), q.str()}));
      trace.push_back(json{{"atom", t.atom_index},
                           {"symmetric", t.symmetric},
                           {"fired", to_string(t.oriented)},
                           {"merged", std::move(merged)}});
    }
    out["trace"] = std::move(trace);
    if (with_derivations) {
      json ds = json::array();
      for (const auto &d : replay(v)) ds.push_back(to_json(d));
      out["derivations"] = std::move(ds);
    }
  } else if (v.counterexample) {
    const auto &c = *v.counterexample;
    json domain = json::array();
    for (ValueId id : c.structure.domain()) domain.push_back(c.structure.value_name(id));
    json classes = json::object();
    for (const auto &[var, val] : c.classes) classes[var.str()] = val;
    out["counterexample"] = json{{"domain", std::move(domain)},
                                 {"teams", to_json(c.polyteam, c.structure)},
                                 {"classes", std::move(classes)}};
  }
  return out;
}

} // namespace polyteam::io
