#include "polyteam/cli.hpp"

#include "polyteam/atoms.hpp"
#include "polyteam/evaluator.hpp"
#include "polyteam/implication.hpp"
#include "polyteam/io.hpp"
#include "polyteam/oracle.hpp"
#include "polyteam/rewrite.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <ostream>

namespace polyteam::cli {

namespace {

using io::json;

struct FormulaSource {
  std::string file;
  std::string expr;

  void attach(CLI::App &cmd, const std::string &prefix = "") {
    auto *f = cmd.add_option("--" + prefix + "formula", file, "file holding the formula");
    auto *e = cmd.add_option("--" + prefix + "expr", expr, "formula text");
    f->excludes(e);
  }

  std::string text(const std::string &what) const {
    if (!file.empty()) return io::read_text_file(file);
    if (!expr.empty()) return expr;
    throw Error("no " + what + " given (use --formula or --expr)");
  }
};

struct EvalFlags {
  std::size_t max_rows = EvalConfig{}.max_expanded_team_rows;
  std::size_t max_split = EvalConfig{}.max_split_assignments;
  long long timeout_ms = EvalConfig{}.timeout.count();
  bool no_memo = false;

  void attach(CLI::App &cmd) {
    cmd.add_option("--max-rows", max_rows, "cap on rows of any expanded team");
    cmd.add_option("--max-split", max_split, "cap on assignments split by a disjunction");
    cmd.add_option("--timeout-ms", timeout_ms, "wall-clock limit in milliseconds");
    cmd.add_flag("--no-memo", no_memo, "disable subformula memoization");
  }

  EvalConfig config() const {
    EvalConfig c;
    c.max_expanded_team_rows = max_rows;
    c.max_split_assignments = max_split;
    c.timeout = std::chrono::milliseconds(timeout_ms);
    c.memoization = !no_memo;
    return c;
  }
};

/// NAME=ED pairs turned into generalized quantifiers.
AtomRegistry build_registry(const std::vector<std::string> &defs) {
  AtomRegistry reg;
  for (const auto &d : defs) {
    auto eq = d.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error("--atom-def expects NAME=DEPENDENCY, got '" + d + "'");
    }
    std::string name = d.substr(0, eq);
    EmbeddedDependency ed = parse_embedded_dependency(d.substr(eq + 1));
    reg.add(compile_embedded_dependency(name, ed));
  }
  return reg;
}

ParseOptions parse_options(bool allow_reserved, const AtomRegistry &reg) {
  ParseOptions opts;
  opts.allow_reserved = allow_reserved;
  if (!reg.empty()) opts.signatures = reg.signatures();
  return opts;
}

std::pair<Sort, std::string> team_spec(const std::string &spec) {
  auto eq = spec.find('=');
  if (eq != std::string::npos) {
    if (eq == 0 || eq + 1 == spec.size()) throw Error("--team expects SORT=PATH, got '" + spec + "'");
    return {Sort{spec.substr(0, eq)}, spec.substr(eq + 1)};
  }
  return {Sort{std::filesystem::path(spec).stem().string()}, spec};
}

int verdict_code(Verdict v) {
  switch (v) {
  case Verdict::satisfied:
    return exit_true;
  case Verdict::violated:
    return exit_false;
  case Verdict::resource_exhausted:
    return exit_exhausted;
  }
  return exit_error;
}

void print(std::ostream &out, const json &j) { out << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------

struct CheckCommand {
  std::string structure;
  std::vector<std::string> teams;
  FormulaSource formula;
  EvalFlags eval;
  std::vector<std::string> atom_defs;
  bool allow_reserved = false;
  bool as_json = false;

  void attach(CLI::App &app) {
    auto *cmd = app.add_subcommand("check", "evaluate a formula on a structure and polyteam");
    cmd->add_option("--structure", structure, "structure JSON file");
    cmd->add_option("--team", teams, "team CSV as SORT=PATH or PATH (sort = file stem)");
    formula.attach(*cmd);
    eval.attach(*cmd);
    cmd->add_option("--atom-def", atom_defs, "generalized atom NAME=EMBEDDED-DEPENDENCY");
    cmd->add_flag("--allow-reserved", allow_reserved, "accept reserved variable names");
    cmd->add_flag("--json", as_json, "print a JSON report");
  }

  int run(std::ostream &out, std::ostream &err) const {
    AtomRegistry reg = build_registry(atom_defs);
    FormulaPtr phi = parse_formula(formula.text("formula"), parse_options(allow_reserved, reg));

    Structure a = structure.empty() ? Structure{} : io::load_structure_json(structure);
    Polyteam x;
    for (const auto &spec : teams) {
      auto [sort, path] = team_spec(spec);
      if (x.contains(sort)) throw Error("two tables given for sort " + sort.name);
      x.set(io::load_team_csv(path, sort, a));
    }
    for (const Sort &s : mentioned_sorts(*phi)) {
      if (!x.contains(s)) {
        err << "notice: no table for sort " << s.name << "; using the team {∅}\n";
      }
    }
    for (const auto &[name, arity] : relation_symbols(*phi)) {
      if (!a.relation(name)) {
        err << "notice: relation " << name << " is not in the structure; treating it as empty\n";
        a.add_relation(name, arity);
      }
    }

    EvalOutcome o = polyteam::eval(a, x, phi, eval.config(), reg.empty() ? nullptr : &reg);
    if (as_json) {
      print(out, io::to_json(o));
    } else {
      out << to_string(o.verdict) << '\n';
    }
    return verdict_code(o.verdict);
  }
};

struct ImpliesCommand {
  std::string file;
  bool derivations = false;
  bool as_json = false;

  void attach(CLI::App &app) {
    auto *cmd = app.add_subcommand("implies", "decide implication between poly-dependence atoms");
    cmd->add_option("file", file, "atoms, one per line, goal prefixed with |-")->required();
    cmd->add_flag("--derivations", derivations, "include replayed derivations");
    cmd->add_flag("--json", as_json, "print a JSON report");
  }

  int run(std::ostream &out, std::ostream &) const {
    auto problem = io::parse_implication_problem(io::read_text_file(file));
    ImplicationVerdict v = decide(problem.sigma, problem.goal);
    if (as_json) {
      print(out, io::to_json(v, derivations));
    } else {
      out << (v.implied ? "implied" : "not implied") << '\n';
      if (v.implied) {
        for (const auto &t : v.trace) {
          out << "  fire " << t.atom_index << (t.symmetric ? " (by symmetry)" : "") << ": "
              << to_string(t.oriented) << '\n';
        }
      } else if (v.counterexample) {
        for (const auto &[var, val] : v.counterexample->classes) {
          out << "  " << var.str() << " = " << val << '\n';
        }
      }
    }
    return v.implied ? exit_true : exit_false;
  }
};

struct RewriteCommand {
  FormulaSource formula;
  std::string rule;
  std::vector<std::string> kinds;
  bool allow_reserved = false;
  bool as_json = false;

  void attach(CLI::App &app) {
    auto *cmd = app.add_subcommand("rewrite", "apply a formula translation");
    formula.attach(*cmd);
    cmd->add_option("--rule", rule, "e1..e6, e8, elim-or, decompose or dialect")->required();
    cmd->add_option("--kinds", kinds, "atom kinds kept by --rule dialect (pdep pinc pexc pind)")
        ->delimiter(',');
    cmd->add_flag("--allow-reserved", allow_reserved, "accept reserved variable names");
    cmd->add_flag("--json", as_json, "print a JSON report");
  }

  int run(std::ostream &out, std::ostream &err) const {
    ParseOptions opts;
    opts.allow_reserved = allow_reserved;
    FormulaPtr phi = parse_formula(formula.text("formula"), opts);
    FreshNameSource fresh(*phi);

    if (rule == "decompose") {
      auto parts = decompose_uniatom_formula(phi);
      if (as_json) {
        json j = json::object();
        for (const auto &[s, f] : parts) j[s.name] = to_string(f);
        print(out, json{{"components", j}});
      } else {
        for (const auto &[s, f] : parts) out << s.name << ": " << to_string(f) << '\n';
      }
      return exit_true;
    }

    FormulaPtr result;
    std::vector<std::string> warnings;
    if (rule == "elim-or") {
      auto r = eliminate_global_disjunction(phi, fresh);
      result = r.formula;
      warnings = r.warnings;
    } else if (rule == "dialect") {
      if (kinds.empty()) throw Error("--rule dialect needs --kinds");
      std::set<AtomKind> allowed;
      for (const auto &k : kinds) {
        static const std::map<std::string, AtomKind> names{{"pdep", AtomKind::pdep},
                                                           {"pinc", AtomKind::pinc},
                                                           {"pexc", AtomKind::pexc},
                                                           {"pind", AtomKind::pind}};
        auto it = names.find(k);
        if (it == names.end()) throw Error("unknown atom kind '" + k + "'");
        allowed.insert(it->second);
      }
      result = to_dialect(phi, allowed, fresh);
    } else if (auto r = parse_lemma_rule(rule)) {
      result = rewrite_all(phi, *r, fresh);
    } else {
      throw Error("unknown rule '" + rule + "'");
    }
    for (const auto &w : warnings) err << "warning: " << w << '\n';
    if (as_json) {
      print(out, json{{"formula", to_string(result)}, {"warnings", warnings}});
    } else {
      out << to_string(result) << '\n';
    }
    return exit_true;
  }
};

json witness_json(const oracle::Witness &w) {
  json domain = json::array();
  for (ValueId v : w.structure.domain()) domain.push_back(w.structure.value_name(v));
  json rels = json::object();
  for (const auto &[name, rel] : w.structure.relations()) {
    json tuples = json::array();
    for (const auto &t : rel.tuples) {
      json row = json::array();
      for (ValueId v : t) row.push_back(w.structure.value_name(v));
      tuples.push_back(std::move(row));
    }
    rels[name] = std::move(tuples);
  }
  return json{{"domain", std::move(domain)},
              {"relations", std::move(rels)},
              {"teams", io::to_json(w.polyteam, w.structure)},
              {"left", w.left_value},
              {"right", w.right_value}};
}

struct OracleCommand {
  CLI::App *equiv = nullptr;
  CLI::App *implies = nullptr;
  FormulaSource left, right;
  std::string implies_file;
  std::size_t domain_size = 0;
  std::size_t max_rows = 2;
  bool nonempty_only = false;
  bool exhaustive = false;
  bool allow_reserved = false;
  std::string left_engine = "reference", right_engine = "fast";

  void attach(CLI::App &app) {
    auto *cmd = app.add_subcommand("oracle", "brute-force checks over small instances");
    cmd->require_subcommand(1);
    equiv = cmd->add_subcommand("equiv", "compare two formulas on every bounded instance");
    left.attach(*equiv, "left-");
    right.attach(*equiv, "right-");
    equiv->add_option("--domain-size", domain_size, "structure size (default 2)");
    equiv->add_option("--max-rows", max_rows, "rows per team (default 2)");
    equiv->add_flag("--nonempty-only", nonempty_only, "skip polyteams with an empty team");
    equiv->add_flag("--allow-reserved", allow_reserved, "accept reserved variable names");
    equiv->add_option("--left-engine", left_engine, "reference or fast")
        ->check(CLI::IsMember({"reference", "fast"}));
    equiv->add_option("--right-engine", right_engine, "reference or fast")
        ->check(CLI::IsMember({"reference", "fast"}));

    implies = cmd->add_subcommand("implies", "search for a bounded counterexample");
    implies->add_option("file", implies_file, "atoms file as for the implies command")->required();
    implies->add_option("--domain-size", domain_size, "number of values (default 3)");
    implies->add_option("--max-rows", max_rows, "rows per team (default 2)");
    implies->add_flag("--exhaustive", exhaustive, "enumerate every polyteam within bounds");
  }

  int run(std::ostream &out, std::ostream &) const {
    if (equiv->parsed()) {
      ParseOptions opts;
      opts.allow_reserved = allow_reserved;
      FormulaPtr phi = parse_formula(left.text("left formula"), opts);
      FormulaPtr psi = parse_formula(right.text("right formula"), opts);
      oracle::EquivalenceBounds b;
      b.domain_size = domain_size ? domain_size : 2;
      b.max_rows = max_rows;
      b.nonempty_only = nonempty_only;
      b.left = left_engine == "fast" ? oracle::Engine::fast : oracle::Engine::reference;
      b.right = right_engine == "fast" ? oracle::Engine::fast : oracle::Engine::reference;
      auto r = oracle::equivalent(phi, psi, b);
      json j{{"equivalent", r.equivalent}, {"checked", r.checked}, {"inconclusive", r.inconclusive}};
      if (r.witness) j["witness"] = witness_json(*r.witness);
      print(out, j);
      if (!r.equivalent) return exit_false;
      return r.inconclusive ? exit_exhausted : exit_true;
    }
    auto problem = io::parse_implication_problem(io::read_text_file(implies_file));
    oracle::ImplicationBounds b;
    b.domain_size = domain_size ? domain_size : 3;
    b.max_rows = max_rows;
    b.exhaustive = exhaustive;
    auto cx = oracle::semantic_counterexample(problem.sigma, problem.goal, b);
    json j{{"implied", !cx.has_value()}};
    if (cx) j["counterexample"] = io::to_json(*cx, Structure::with_domain_size(b.domain_size));
    print(out, j);
    return cx ? exit_false : exit_true;
  }
};

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Model checking, implication and rewriting for polyteam logic", "polyteam"};
  app.require_subcommand(1);
  CheckCommand check;
  ImpliesCommand implies;
  RewriteCommand rewrite;
  OracleCommand oracle_cmd;
  check.attach(app);
  implies.attach(app);
  rewrite.attach(app);
  oracle_cmd.attach(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return exit_true;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_true;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }

  try {
    const std::string &name = app.get_subcommands().front()->get_name();
    if (name == "check") return check.run(out, err);
    if (name == "implies") return implies.run(out, err);
    if (name == "rewrite") return rewrite.run(out, err);
    return oracle_cmd.run(out, err);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
}

} // namespace polyteam::cli
