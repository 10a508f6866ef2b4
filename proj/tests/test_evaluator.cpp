#include "polyteam/evaluator.hpp"
#include "polyteam/oracle.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace polyteam;
using polyteam::testing::Rng;

namespace {

const Sort P{"P"}, Q{"Q"};

Team team(const Sort &s, std::vector<std::string> vars, std::vector<Tuple> rows) {
  return Team::from_rows(s, std::move(vars), rows);
}

bool holds(const Structure &a, const Polyteam &x, std::string_view text) {
  EvalOutcome o = eval(a, x, parse_formula(text));
  EXPECT_FALSE(o.exhausted()) << o.detail;
  return o.holds();
}

} // namespace

TEST(EvalSentence, Basics) {
  Structure a = Structure::with_domain_size(3);
  a.add_relation("R", 1);
  EXPECT_TRUE(eval_sentence(a, parse_formula("A P.x . E P.y . P.x = P.y")).holds());
  EXPECT_TRUE(eval_sentence(a, parse_formula("A P.x . P.x = P.x")).holds());
  EXPECT_FALSE(eval_sentence(a, parse_formula("E P.x . R(P.x)")).holds());
  EXPECT_THROW(eval_sentence(a, parse_formula("P.x = P.x")), Error);
}

TEST(Eval, LiteralsAreUniversalOverTheTeam) {
  Structure a = Structure::with_domain_size(2);
  a.add_tuple("R", {1});
  Polyteam x({team(P, {"x", "y"}, {{0, 0}, {1, 1}})});
  EXPECT_TRUE(holds(a, x, "P.x = P.y"));
  EXPECT_FALSE(holds(a, x, "R(P.x)"));
  EXPECT_TRUE(holds(a, x, "R(P.x) \\/ ~R(P.x)"));
  EXPECT_TRUE(holds(a, x, "R(P.x) \\/_{P} ~R(P.x)"));
}

TEST(Eval, LocalDisjunctionLeavesOtherTeamsWhole) {
  Structure a = Structure::with_domain_size(2);
  Polyteam x({team(P, {"x"}, {{0}, {1}}), team(Q, {"u"}, {{0}, {1}})});
  // Splitting only P cannot separate Q's rows.
  EXPECT_FALSE(holds(a, x, "(P.x = P.x /\\ dep(Q.u)) \\/_{P} (P.x = P.x /\\ dep(Q.u))"));
  EXPECT_TRUE(holds(a, x, "dep(Q.u) \\/_{Q} dep(Q.u)"));
  EXPECT_TRUE(holds(a, x, "dep(P.x) \\/ dep(P.x)"));
}

TEST(Eval, ExistentialPicksSetsPerRow) {
  Structure a = Structure::with_domain_size(3);
  Polyteam x({team(P, {"x"}, {{0}, {1}, {2}})});
  EXPECT_TRUE(holds(a, x, "E P.y . (P.y != P.x /\\ dep(P.x ; P.y))"));
  EXPECT_FALSE(holds(a, x, "E P.y . (P.y != P.x /\\ dep(P.y))"));
  EXPECT_TRUE(holds(a, x, "E P.y . pinc(P.y | P.x)"));
}

TEST(Eval, MissingVariablesAndRelationsAreErrors) {
  Structure a = Structure::with_domain_size(2);
  Polyteam x({team(P, {"x"}, {{0}})});
  EXPECT_THROW(eval(a, x, parse_formula("P.x = P.z")), SortedDomainError);
  EXPECT_THROW(eval(a, x, parse_formula("Q.u = Q.u")), SortedDomainError);
  EXPECT_THROW(eval(a, x, parse_formula("S(P.x)")), Error);
  // A sort without a table is fine when it has no free variables.
  EXPECT_TRUE(eval(a, x, parse_formula("E Q.u . Q.u = Q.u")).holds());
}

TEST(Eval, ConfigValidation) {
  EvalConfig c;
  c.max_split_assignments = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Eval, ResourceExhaustionIsItsOwnVerdict) {
  Structure a = Structure::with_domain_size(4);
  std::vector<Tuple> rows;
  for (ValueId i = 0; i < 4; ++i)
    for (ValueId j = 0; j < 4; ++j) rows.push_back({i, j});
  Polyteam x({team(P, {"x", "y"}, rows)});
  EvalConfig c;
  c.max_split_assignments = 3;
  // Neither side is row-wise, so the split has to enumerate covers.
  EvalOutcome o = eval(a, x, parse_formula("pinc(P.x | P.y) \\/ dep(P.x ; P.y)"), c);
  EXPECT_EQ(o.verdict, Verdict::resource_exhausted);
  EXPECT_EQ(to_string(o.verdict), "resource_exhausted");
  c = EvalConfig{};
  c.max_expanded_team_rows = 10;
  o = eval(a, x, parse_formula("A P.z . P.z = P.x"), c);
  EXPECT_EQ(o.verdict, Verdict::resource_exhausted);
}

TEST(Eval, HospitalConstraintSmallInstance) {
  Structure a;
  auto v = [&](const char *s) { return a.intern(s); };
  a.add_tuple("Pos", {v("positive")});
  Polyteam x({
      Team::from_rows(Sort{"Case"}, {"patient_id", "diagnosis_id", "confirmation"},
                      {{v("p1"), v("d1"), v("positive")}}),
      Team::from_rows(Sort{"Test"}, {"diagnosis_id", "test_id"},
                      {{v("d1"), v("t1")}, {v("d1"), v("t2")}}),
      Team::from_rows(Sort{"Results"}, {"patient_id", "test_id", "result"},
                      {{v("p1"), v("t1"), v("positive")}}),
  });
  const char *phi0 = R"(~Pos(Case.confirmation) \/_{Case}
      E Case.x1 . E Case.x2 . E Case.pos .
        (Pos(Case.pos) /\ Case.x1 != Case.x2
         /\ pinc(Case.diagnosis_id Case.x1 | Test.diagnosis_id Test.test_id)
         /\ pinc(Case.patient_id Case.x1 Case.pos | Results.patient_id Results.test_id Results.result)
         /\ pinc(Case.diagnosis_id Case.x2 | Test.diagnosis_id Test.test_id)
         /\ pinc(Case.patient_id Case.x2 Case.pos | Results.patient_id Results.test_id Results.result)))";
  EXPECT_FALSE(holds(a, x, phi0));
  x.set(Team::from_rows(Sort{"Results"}, {"patient_id", "test_id", "result"},
                        {{v("p1"), v("t1"), v("positive")}, {v("p1"), v("t2"), v("positive")}}));
  EXPECT_TRUE(holds(a, x, phi0));
}

TEST(Eval, ExistenceOfSolutionOneRow) {
  Structure a = Structure::with_domain_size(3);
  Polyteam x({team(P, {"name", "employee", "employee_position"}, {{0, 1, 2}})});
  const char *phi = R"(E E.x1 . E E.x2 . E E.x3 .
      ((pinc(P.employee P.name | E.x1 E.x2) \/_{P} pinc(P.employee P.name | E.x1 E.x3))
       /\ dep(E.x1 ; E.x2 E.x3)))";
  EXPECT_TRUE(holds(a, x, phi));
  EXPECT_TRUE(oracle::reference_eval(a, x, parse_formula(phi)));
}

TEST(CoverEnumerator, Counts) {
  for (std::size_t n : {0u, 1u, 2u, 3u}) {
    std::vector<Tuple> rows;
    for (ValueId i = 0; i < n; ++i) rows.push_back({i});
    Team t = team(P, {"x"}, rows);
    CoverEnumerator en(t, 10);
    Team l, r;
    std::set<std::pair<std::vector<ValueId>, std::vector<ValueId>>> seen;
    while (en.next(l, r)) {
      EXPECT_EQ(l.unite(r), t);
      seen.emplace(l.cells(), r.cells());
    }
    std::size_t expect = 1;
    for (std::size_t i = 0; i < n; ++i) expect *= 3;
    EXPECT_EQ(seen.size(), expect);
    EXPECT_EQ(en.total(), expect);
  }
  Team big = team(P, {"x"}, {{0}, {1}, {2}});
  EXPECT_THROW(CoverEnumerator(big, 2), Error);
}

TEST(Eval, Deterministic) {
  Structure a = Structure::with_domain_size(2);
  Polyteam x({team(P, {"x", "y"}, {{0, 1}, {1, 1}}), team(Q, {"u"}, {{0}})});
  auto phi = parse_formula("E P.z . (pinc(P.z | Q.u) \\/ pexc(P.x | Q.u))");
  EvalOutcome a1 = eval(a, x, phi), a2 = eval(a, x, phi);
  EXPECT_EQ(a1.verdict, a2.verdict);
  EXPECT_EQ(a1.stats.nodes_visited, a2.stats.nodes_visited);
  EXPECT_EQ(a1.stats.cache_hits, a2.stats.cache_hits);
}

/// The fast evaluator against the definition-level reference on random
/// formulas mixing every atom kind, both disjunctions and quantifiers.
class AgainstReference : public ::testing::TestWithParam<bool> {};

TEST_P(AgainstReference, RandomFormulas) {
  Rng rng(GetParam() ? 101 : 202);
  polyteam::testing::FormulaShape shape;
  shape.vars = {{P, {"x", "y"}}, {Q, {"u", "v"}}};
  shape.pdep = shape.pinc = shape.pexc = shape.pind = true;
  shape.wide_local_or = true;
  polyteam::testing::FormulaGenerator gen(shape, rng);
  EvalConfig cfg;
  cfg.memoization = GetParam();
  int compared = 0;
  for (int i = 0; i < 400; ++i) {
    FormulaPtr f = gen.generate();
    Structure a = polyteam::testing::random_structure(rng, 2);
    Polyteam x = polyteam::testing::random_polyteam(rng, {{P, {"x", "y"}}, {Q, {"u", "v"}}}, 2, 2);
    bool ref;
    try {
      ref = oracle::reference_eval(a, x, f, nullptr, 2'000'000);
    } catch (const oracle::BudgetExceeded &) {
      continue;
    }
    EvalOutcome o = eval(a, x, f, cfg);
    ASSERT_FALSE(o.exhausted());
    ASSERT_EQ(o.holds(), ref) << to_string(f);
    ++compared;
  }
  EXPECT_GT(compared, 300);
}

INSTANTIATE_TEST_SUITE_P(Memo, AgainstReference, ::testing::Bool());
