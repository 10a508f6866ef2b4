// Acceptance runner. Prints one PASS/FAIL line per criterion followed by a few
// indented detail lines, and exits nonzero when any criterion fails.

#include "polyteam/evaluator.hpp"
#include "polyteam/implication.hpp"
#include "polyteam/oracle.hpp"
#include "polyteam/rewrite.hpp"

#include "support.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

using namespace polyteam;
using testing::Rng;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::vector<std::string> details;

  void note(std::string s) { details.push_back(std::move(s)); }
};

std::string describe(const Polyteam &x, const Structure &a) {
  std::ostringstream os;
  for (const auto &[s, t] : x.teams()) {
    os << s.name << "{";
    for (std::size_t r = 0; r < t.size(); ++r) {
      if (r) os << ", ";
      os << "(";
      for (std::size_t c = 0; c < t.width(); ++c) {
        if (c) os << " ";
        os << t.domain()[c] << "=" << a.value_name(t.row(r)[c]);
      }
      os << ")";
    }
    os << "} ";
  }
  return os.str();
}

// 1 and 2 share one batch of instances.
struct ImplicationBatch {
  int total = 0, implied = 0, refuted = 0;
  int unsound = 0, bad_counterexamples = 0;
  double seconds = 0;
  std::string first_problem;
};

ImplicationBatch run_implication_batch(int n) {
  ImplicationBatch b;
  Rng rng(20240601);
  auto t0 = Clock::now();
  oracle::ImplicationBounds bounds{3, 2, false};
  for (int i = 0; i < n; ++i) {
    auto inst = testing::random_implication(rng);
    ImplicationVerdict v = decide(inst.sigma, inst.goal);
    ++b.total;
    if (v.implied) {
      ++b.implied;
      if (!oracle::semantic_implies(inst.sigma, inst.goal, bounds)) {
        if (b.first_problem.empty()) b.first_problem = "unsound on goal " + to_string(inst.goal);
        ++b.unsound;
      }
    } else {
      ++b.refuted;
      if (!verify_counterexample(v)) {
        if (b.first_problem.empty()) b.first_problem = "bad counterexample for " + to_string(inst.goal);
        ++b.bad_counterexamples;
      }
    }
  }
  b.seconds = seconds_since(t0);
  return b;
}

Outcome criterion_1(const ImplicationBatch &b) {
  Outcome o;
  o.pass = b.total >= 10000 && b.unsound == 0 && b.seconds < 300;
  o.note(std::to_string(b.total) + " instances, " + std::to_string(b.implied) +
         " implied, all checked against the bounded semantic search (|A|=3, 2 rows)");
  o.note("unsound answers: " + std::to_string(b.unsound) + ", time " + std::to_string(b.seconds) + " s");
  if (!b.first_problem.empty()) o.note(b.first_problem);
  return o;
}

Outcome criterion_2(const ImplicationBatch &b) {
  Outcome o;
  o.pass = b.refuted > 0 && b.bad_counterexamples == 0;
  o.note(std::to_string(b.refuted) + " refuted instances, counterexamples failing verification: " +
         std::to_string(b.bad_counterexamples));
  return o;
}

Outcome criterion_3() {
  Outcome o;
  Rng rng(77);
  const char *names[] = {"a", "b", "c", "d", "e", "f"};
  auto tuple_of_mask = [&](unsigned mask, std::size_t attrs) {
    VarTuple t{Sort{"S"}, {}};
    for (std::size_t k = 0; k < attrs; ++k) {
      if (mask & (1u << k)) t.vars.push_back(var("S", names[k]));
    }
    return t;
  };
  int sets = 0, queries = 0, mismatches = 0;
  std::string first;
  for (; sets < 1000; ++sets) {
    std::size_t attrs = 1 + testing::pick(rng, 6);
    std::size_t count = testing::pick(rng, 9);
    unsigned full = (1u << attrs) - 1;
    std::vector<testing::Fd> fds;
    std::vector<PolyDep> sigma;
    for (std::size_t k = 0; k < count; ++k) {
      unsigned lhs = static_cast<unsigned>(testing::pick(rng, full + 1));
      unsigned rhs = 1 + static_cast<unsigned>(testing::pick(rng, full));
      fds.push_back({lhs, rhs});
      VarTuple x = tuple_of_mask(lhs, attrs), y = tuple_of_mask(rhs, attrs);
      sigma.push_back(PolyDep{x, y, x, y});
    }
    unsigned seed = static_cast<unsigned>(testing::pick(rng, full + 1));
    unsigned closure = testing::attribute_closure(seed, fds);
    VarTuple x = tuple_of_mask(seed, attrs);
    for (std::size_t k = 0; k < attrs; ++k) {
      VarTuple y{Sort{"S"}, {var("S", names[k])}};
      bool want = (closure >> k) & 1u;
      bool got = decide(sigma, PolyDep{x, y, x, y}).implied;
      ++queries;
      if (got != want) {
        ++mismatches;
        if (first.empty()) first = "mismatch on " + to_string(PolyDep{x, y, x, y});
      }
    }
  }
  o.pass = sets >= 1000 && mismatches == 0;
  o.note(std::to_string(sets) + " FD sets, " + std::to_string(queries) +
         " single-attribute goals compared with attribute closure, mismatches: " +
         std::to_string(mismatches));
  if (!first.empty()) o.note(first);
  return o;
}

Outcome criterion_4() {
  Outcome o;
  o.pass = true;
  auto t0 = Clock::now();
  struct Case {
    LemmaRule rule;
    const char *atom;
  };
  const Case cases[] = {
      {LemmaRule::e1, "pdep(S.x ; S.y | T.u ; T.v)"},
      {LemmaRule::e1, "pdep(@S ; S.x S.y | @T ; T.u T.v)"},
      {LemmaRule::e1, "dep(S.x ; S.y)"},
      {LemmaRule::e2, "pdep(S.x ; S.y | T.u ; T.v)"},
      {LemmaRule::e2, "pdep(@S ; S.x S.y | @T ; T.u T.v)"},
      {LemmaRule::e3, "pinc(S.x | T.u)"},
      {LemmaRule::e3, "pinc(S.x S.y | T.u T.v)"},
      {LemmaRule::e3, "pinc(S.x | S.y)"},
      {LemmaRule::e4, "pinc(S.x | T.u)"},
      {LemmaRule::e4, "pinc(S.x S.y | T.v T.u)"},
      {LemmaRule::e5, "pexc(S.x | T.u)"},
      {LemmaRule::e5, "pexc(S.x S.y | T.u T.v)"},
      {LemmaRule::e6, "pexc(S.x | T.u)"},
      {LemmaRule::e6, "pexc(S.x S.y | T.u T.v)"},
      {LemmaRule::e8, "pind(S.x , T.u / U.w ; S.y / U.z ; T.v / U.z)"},
      {LemmaRule::e8, "pind(S.x , T.v / U.z ; S.y / U.w ; T.u / U.w)"},
  };
  for (const auto &c : cases) {
    FormulaPtr lhs = parse_formula(c.atom);
    FreshNameSource fresh(*lhs);
    FormulaPtr rhs = translate_atom(*lhs->atom, c.rule, fresh);
    oracle::EquivalenceBounds b;
    b.domain_size = 2;
    b.max_rows = 2;
    b.left = oracle::Engine::reference;
    b.right = c.rule == LemmaRule::e8 ? oracle::Engine::fast : oracle::Engine::reference;
    auto r = oracle::equivalent(lhs, rhs, b);
    std::string line = to_string(c.rule) + " on " + c.atom + ": ";
    if (r.equivalent && r.inconclusive == 0) {
      o.note(line + "equivalent on " + std::to_string(r.checked) + " instances");
      continue;
    }
    o.pass = false;
    if (r.equivalent) {
      o.note(line + std::to_string(r.inconclusive) + " instances inconclusive");
      continue;
    }
    o.note(line + "NOT equivalent; atom " + (r.witness->left_value ? "true" : "false") +
           ", translation " + (r.witness->right_value ? "true" : "false") + " on " +
           describe(r.witness->polyteam, r.witness->structure));
    b.nonempty_only = true;
    auto ne = oracle::equivalent(lhs, rhs, b);
    o.note(std::string("    restricted to polyteams without empty teams: ") +
           (ne.equivalent ? "equivalent" : "still not equivalent") + " (" +
           std::to_string(ne.checked) + " instances)");
  }
  double secs = seconds_since(t0);
  if (secs >= 600) o.pass = false;
  o.note("time " + std::to_string(secs) + " s (limit 600 s)");
  return o;
}

bool has_global_or(const Formula &f) {
  if (f.kind == NodeKind::or_global) return true;
  if (f.kind == NodeKind::or_local && f.sorts.size() > 1) return true;
  return (f.left && has_global_or(*f.left)) || (f.right && has_global_or(*f.right));
}

Outcome criterion_5() {
  Outcome o;
  Rng rng(515);
  testing::FormulaShape shape;
  shape.vars = {{Sort{"S"}, {"x", "y"}}, {Sort{"T"}, {"u"}}};
  shape.depth = 3;
  shape.pdep = shape.pinc = shape.pexc = true;
  shape.wide_local_or = true;
  testing::FormulaGenerator gen(shape, rng);
  int tested = 0, with_or = 0, shape_failures = 0, inequivalent = 0;
  std::uint64_t inconclusive = 0;
  std::string first;
  while (tested < 120) {
    FormulaPtr phi = gen.generate();
    if (!has_global_or(*phi)) continue;
    ++with_or;
    FreshNameSource fresh(*phi);
    FormulaPtr psi = eliminate_global_disjunction(phi, fresh).formula;
    ++tested;
    if (has_global_or(*psi) || free_variables(*psi) != free_variables(*phi)) {
      ++shape_failures;
      if (first.empty()) first = "shape: " + to_string(phi);
      continue;
    }
    oracle::EquivalenceBounds b;
    b.domain_size = 2;
    b.max_rows = 2;
    b.left = oracle::Engine::reference;
    b.right = oracle::Engine::fast;
    auto r = oracle::equivalent(phi, psi, b);
    inconclusive += r.inconclusive;
    if (!r.equivalent) {
      ++inequivalent;
      if (first.empty()) first = "differs at |A|=2: " + to_string(phi);
    }
  }
  o.note(std::to_string(tested) + " formulas with global or multi-sort disjunction: shape failures " +
         std::to_string(shape_failures) + ", inequivalent at |A|=2: " + std::to_string(inequivalent) +
         ", inconclusive instances: " + std::to_string(inconclusive));
  if (!first.empty()) o.note(first);

  // The one-element caveat: the fresh pair can never differ.
  FormulaPtr phi = parse_formula("S.x = S.x \\/ S.x != S.x");
  FreshNameSource fresh(*phi);
  FormulaPtr psi = eliminate_global_disjunction(phi, fresh).formula;
  oracle::EquivalenceBounds one;
  one.domain_size = 1;
  auto r = oracle::equivalent(phi, psi, one);
  bool caveat_seen = !r.equivalent;
  if (caveat_seen) {
    o.note("|A|=1 separates " + to_string(phi) + " from its rewrite on " +
           describe(r.witness->polyteam, r.witness->structure) + "(expected)");
  } else {
    o.note("no |A|=1 separating instance found");
  }
  o.pass = tested >= 100 && shape_failures == 0 && inequivalent == 0 && inconclusive == 0 &&
           caveat_seen;
  return o;
}

Outcome criterion_6() {
  Outcome o;
  Rng rng(606);
  testing::FormulaShape shape;
  shape.vars = {{Sort{"S"}, {"x", "y"}}, {Sort{"T"}, {"u", "v"}}};
  shape.depth = 3;
  shape.pdep = shape.pinc = shape.pexc = true;
  shape.uni_atoms = true;
  shape.global_or = false;
  shape.wide_local_or = false;
  testing::FormulaGenerator gen(shape, rng);
  const std::map<Sort, std::vector<std::string>> doms = shape.vars;
  int formulas = 0, mismatches = 0;
  std::uint64_t instances = 0, skipped = 0;
  std::string first;
  auto t0 = Clock::now();
  for (; formulas < 200; ++formulas) {
    FormulaPtr phi = gen.generate();
    auto parts = decompose_uniatom_formula(phi);
    oracle::StructureEnumerator structures(2, relation_symbols(*phi));
    Structure a;
    while (structures.next(a)) {
      oracle::PolyteamEnumerator teams(doms, 2, 2);
      Polyteam x;
      while (teams.next(x)) {
        bool whole;
        try {
          whole = oracle::reference_eval(a, x, phi, nullptr, 5'000'000);
        } catch (const oracle::BudgetExceeded &) {
          ++skipped;
          continue;
        }
        bool split = true;
        for (const auto &[s, f] : parts) {
          Polyteam alone({x.at(s)});
          EvalOutcome e = eval(a, alone, f);
          if (e.exhausted()) throw Error("evaluator exhausted on a tiny instance");
          split = split && e.holds();
        }
        ++instances;
        if (whole != split) {
          ++mismatches;
          if (first.empty()) {
            first = to_string(phi) + " on " + describe(x, a) + (whole ? "(whole true)" : "(whole false)");
          }
        }
      }
    }
  }
  o.pass = formulas >= 200 && mismatches == 0 && skipped == 0;
  o.note(std::to_string(formulas) + " uni-atom formulas, " + std::to_string(instances) +
         " instances at |A|=2 with up to 2 rows per team, mismatches " + std::to_string(mismatches) +
         ", skipped " + std::to_string(skipped) + ", time " + std::to_string(seconds_since(t0)) + " s");
  if (!first.empty()) o.note(first);
  return o;
}

bool holds(const Structure &a, const Polyteam &x, const FormulaPtr &f) {
  EvalOutcome e = eval(a, x, f);
  if (e.exhausted()) throw Error("evaluator exhausted on a tiny instance: " + e.detail);
  return e.holds();
}

Outcome criterion_7() {
  Outcome o;
  const Sort P{"P"}, Q{"Q"};
  int flat_pairs = 0, flat_bad = 0;
  int local_pairs = 0, local_bad = 0;
  int down_pairs = 0, down_bad = 0;
  int union_pairs = 0, union_bad = 0;
  std::string first;
  auto fail = [&](int &counter, const std::string &what, const FormulaPtr &f) {
    ++counter;
    if (first.empty()) first = what + ": " + to_string(f);
  };

  {
    Rng rng(701);
    testing::FormulaShape shape;
    shape.vars = {{P, {"x", "y"}}};
    shape.single_sort = true;
    testing::FormulaGenerator gen(shape, rng);
    while (flat_pairs < 500) {
      FormulaPtr f = gen.generate();
      Structure a = testing::random_structure(rng, 3);
      Team t = testing::random_team(rng, P, {"x", "y"}, 3, 4);
      bool rows = true;
      for (std::size_t r = 0; r < t.size(); ++r) rows = rows && testing::tarski(a, t.assignment(r), *f);
      if (holds(a, Polyteam({t}), f) != rows) fail(flat_bad, "flatness", f);
      ++flat_pairs;
    }
  }
  {
    Rng rng(702);
    testing::FormulaShape shape;
    shape.vars = {{P, {"x", "y"}}, {Q, {"u"}}};
    shape.pdep = shape.pinc = shape.pexc = true;
    shape.wide_local_or = true;
    testing::FormulaGenerator gen(shape, rng);
    while (local_pairs < 500) {
      FormulaPtr f = gen.generate();
      Structure a = testing::random_structure(rng, 2);
      Polyteam wide = testing::random_polyteam(rng, {{P, {"x", "y", "z"}}, {Q, {"u", "w"}}}, 2, 4);
      Polyteam narrow = polyteam_restrict(wide, {{P, {"x", "y"}}, {Q, {"u"}}});
      if (holds(a, wide, f) != holds(a, narrow, f)) fail(local_bad, "locality", f);
      ++local_pairs;
    }
  }
  {
    Rng rng(703);
    testing::FormulaShape shape;
    shape.vars = {{P, {"x", "y"}}, {Q, {"u", "v"}}};
    shape.pdep = shape.pexc = true;
    shape.wide_local_or = true;
    testing::FormulaGenerator gen(shape, rng);
    int attempts = 0;
    while (down_pairs < 500 && attempts < 200000) {
      ++attempts;
      FormulaPtr f = gen.generate();
      Structure a = testing::random_structure(rng, 2);
      Polyteam x = testing::random_polyteam(rng, shape.vars, 2, 4);
      if (!holds(a, x, f)) continue;
      Polyteam y;
      for (const auto &[s, t] : x.teams()) y.set(testing::random_subteam(rng, t));
      if (!holds(a, y, f)) fail(down_bad, "downward closure", f);
      ++down_pairs;
    }
  }
  {
    Rng rng(704);
    testing::FormulaShape shape;
    shape.vars = {{P, {"x", "y"}}, {Q, {"u", "v"}}};
    shape.pinc = true;
    shape.wide_local_or = true;
    testing::FormulaGenerator gen(shape, rng);
    int attempts = 0;
    while (union_pairs < 500 && attempts < 200000) {
      ++attempts;
      FormulaPtr f = gen.generate();
      Structure a = testing::random_structure(rng, 2);
      Polyteam x = testing::random_polyteam(rng, shape.vars, 2, 3);
      Polyteam y = testing::random_polyteam(rng, shape.vars, 2, 3);
      if (!holds(a, x, f) || !holds(a, y, f)) continue;
      if (!holds(a, polyteam_union(x, y), f)) fail(union_bad, "union closure", f);
      ++union_pairs;
    }
  }
  o.pass = flat_pairs >= 500 && local_pairs >= 500 && down_pairs >= 500 && union_pairs >= 500 &&
           flat_bad + local_bad + down_bad + union_bad == 0;
  auto line = [](const char *name, int pairs, int bad) {
    return std::string(name) + ": " + std::to_string(pairs) + " pairs, violations " + std::to_string(bad);
  };
  o.note(line("flatness of first-order formulas", flat_pairs, flat_bad));
  o.note(line("locality", local_pairs, local_bad));
  o.note(line("downward closure (pdep, pexc)", down_pairs, down_bad));
  o.note(line("union closure (pinc)", union_pairs, union_bad));
  if (!first.empty()) o.note(first);
  return o;
}

int run_cli(const std::string &args) {
  std::string cmd = std::string("\"") + POLYTEAM_CLI + "\" " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

Outcome criterion_8() {
  Outcome o;
  const std::string f = POLYTEAM_FIXTURES;
  const std::string h = f + "/hospital";
  const std::string e1 = f + "/example1";
  const std::string e3 = f + "/example3";
  auto hospital = [&](const std::string &formula, const std::string &results) {
    return "check --structure " + h + "/structure.json --team " + h + "/Patient.csv --team " + h +
           "/Case.csv --team " + h + "/Test.csv --team Results=" + results + " --formula " + h +
           "/" + formula;
  };
  auto example1 = [&](const std::string &employees) {
    return "check --team " + e1 + "/P.csv --team " + e1 + "/T.csv --team E=" + employees +
           " --formula " + e1 + "/join.pf";
  };
  auto example3 = [&](const std::string &projects) {
    return "check --team P=" + projects + " --formula " + e3 + "/solution.pf";
  };
  struct Run {
    std::string name, args;
    int want;
  };
  const Run runs[] = {
      {"join inclusion, compliant", example1(e1 + "/E.csv"), 0},
      {"join inclusion, row removed", example1(e1 + "/mutations/E.csv"), 1},
      {"hospital positive rule, compliant", hospital("phi0.pf", h + "/Results.csv"), 0},
      {"hospital positive rule, mutated", hospital("phi0.pf", h + "/mutations/Results_phi0.csv"), 1},
      {"hospital negative rule, compliant", hospital("phi1.pf", h + "/Results.csv"), 0},
      {"hospital negative rule, mutated", hospital("phi1.pf", h + "/mutations/Results_phi1.csv"), 1},
      {"keyed employees, compliant", example3(e3 + "/P.csv"), 0},
      {"keyed employees, mutated", example3(e3 + "/mutations/P.csv"), 1},
      {"transitivity implication", "implies " + f + "/transitivity.imp", 0},
  };
  o.pass = true;
  for (const auto &r : runs) {
    auto t0 = Clock::now();
    int got = run_cli(r.args);
    bool ok = got == r.want;
    o.pass = o.pass && ok;
    o.note(r.name + ": exit " + std::to_string(got) + " (want " + std::to_string(r.want) + ") " +
           (ok ? "ok" : "WRONG") + ", " + std::to_string(seconds_since(t0)) + " s");
  }
  return o;
}

} // namespace

int main() {
  bool all = true;
  auto report = [&](int n, const std::string &title, const std::function<Outcome()> &fn) {
    Outcome o;
    auto t0 = Clock::now();
    try {
      o = fn();
    } catch (const std::exception &e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title << " ("
              << seconds_since(t0) << " s)\n";
    for (const auto &d : o.details) std::cout << "    " << d << '\n';
    std::cout.flush();
  };

  ImplicationBatch batch;
  report(1, "implication engine is sound against bounded semantics", [&] {
    batch = run_implication_batch(10000);
    return criterion_1(batch);
  });
  report(2, "refuted implications come with verified counterexamples", [&] { return criterion_2(batch); });
  report(3, "same-sort dependencies agree with attribute closure", criterion_3);
  report(4, "atom translations e1 to e8 are equivalences", criterion_4);
  report(5, "disjunction elimination", criterion_5);
  report(6, "uni-atom formulas decompose by sort", criterion_6);
  report(7, "flatness, locality and closure properties", criterion_7);
  report(8, "command line on the worked examples", criterion_8);
  return all ? 0 : 1;
}
