#include "polyteam/syntax.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace polyteam;

TEST(Parse, EqualityLiteral) {
  FormulaPtr f = parse_formula("P.x = P.y");
  ASSERT_EQ(f->kind, NodeKind::eq);
  EXPECT_EQ(f->x, var("P", "x"));
  EXPECT_EQ(f->y, var("P", "y"));
}

TEST(Parse, PolyDependenceAtom) {
  FormulaPtr f = parse_formula("pdep(E1.x ; E1.y | E2.u ; E2.v)");
  ASSERT_EQ(f->kind, NodeKind::atom);
  const auto &d = std::get<PolyDep>(*f->atom);
  EXPECT_EQ(d.x, tuple_of("E1", {"x"}));
  EXPECT_EQ(d.v, tuple_of("E2", {"v"}));
  EXPECT_TRUE(structurally_equal(*parse_formula(to_string(f)), *f));
}

TEST(Parse, SameSortShorthandRejected) {
  try {
    parse_formula("pdep(E1.x ; E1.y | E1.u ; E1.v)");
    FAIL() << "expected a parse error";
  } catch (const ParseError &e) {
    EXPECT_NE(e.message().find("shorthand"), std::string::npos);
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(Parse, SameSortEqualSidesIsDependence) {
  FormulaPtr f = parse_formula("pdep(P.x ; P.y | P.x ; P.y)");
  EXPECT_TRUE(structurally_equal(*f, *parse_formula("dep(P.x ; P.y)")));
}

TEST(Parse, ErrorsCarryPositions) {
  try {
    parse_formula("P.x = P.y /\\\n  Q.z = ");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_formula("P.x = Q.y"), ParseError);
  EXPECT_THROW(parse_formula("pinc(P.x P.y | Q.u)"), ParseError);
  EXPECT_THROW(parse_formula("P._fr0 = P.x"), ParseError);
  ParseOptions reserved;
  reserved.allow_reserved = true;
  EXPECT_NO_THROW(parse_formula("P._fr0 = P.x", reserved));
}

TEST(Parse, GeneralizedAtomsNeedSignatures) {
  ParseOptions opts;
  opts.signatures = SignatureTable{{"inc22", {2, 2}}};
  EXPECT_NO_THROW(parse_formula("atom inc22((P.x P.y)(Q.u Q.v))", opts));
  EXPECT_THROW(parse_formula("atom inc22((P.x)(Q.u Q.v))", opts), ParseError);
  EXPECT_THROW(parse_formula("atom other((P.x))", opts), ParseError);
}

TEST(Parse, LocalDisjunctionIndexSets) {
  FormulaPtr f = parse_formula("P.x = P.x \\/_{P,Q} Q.y = Q.y");
  ASSERT_EQ(f->kind, NodeKind::or_local);
  EXPECT_EQ(f->sorts, (std::set<Sort>{Sort{"P"}, Sort{"Q"}}));
}

TEST(Parse, RoundTripOnGeneratedFormulas) {
  polyteam::testing::Rng rng(7);
  polyteam::testing::FormulaShape shape;
  shape.vars = {{Sort{"S"}, {"x", "y"}}, {Sort{"T"}, {"u", "v"}}};
  shape.pdep = shape.pinc = shape.pexc = shape.pind = true;
  shape.wide_local_or = true;
  polyteam::testing::FormulaGenerator gen(shape, rng);
  for (int i = 0; i < 300; ++i) {
    FormulaPtr f = gen.generate();
    std::string text = to_string(f);
    FormulaPtr g = parse_formula(text);
    ASSERT_TRUE(structurally_equal(*f, *g)) << text << "\nreparsed as\n" << to_string(g);
  }
}

TEST(FreeVariables, Binders) {
  EXPECT_EQ(free_variables(*parse_formula("P.x = P.y")),
            (FreeVariableReport{{Sort{"P"}, {"x", "y"}}}));
  EXPECT_EQ(free_variables(*parse_formula("E P.x . P.x = P.y")),
            (FreeVariableReport{{Sort{"P"}, {"y"}}}));
}

TEST(FreeVariables, HospitalConstraintUsesSchemaAttributes) {
  FormulaPtr phi0 = parse_formula(R"(
    ~Pos(Case.confirmation) \/_{Case}
      E Case.x1 . E Case.x2 . E Case.pos .
        (Pos(Case.pos) /\ Case.x1 != Case.x2
         /\ pinc(Case.diagnosis_id Case.x1 | Test.diagnosis_id Test.test_id)
         /\ pinc(Case.patient_id Case.x1 Case.pos | Results.patient_id Results.test_id Results.result)
         /\ pinc(Case.diagnosis_id Case.x2 | Test.diagnosis_id Test.test_id)
         /\ pinc(Case.patient_id Case.x2 Case.pos | Results.patient_id Results.test_id Results.result)))");
  FreeVariableReport want{
      {Sort{"Case"}, {"confirmation", "diagnosis_id", "patient_id"}},
      {Sort{"Results"}, {"patient_id", "result", "test_id"}},
      {Sort{"Test"}, {"diagnosis_id", "test_id"}},
  };
  EXPECT_EQ(free_variables(*phi0), want);
}

TEST(WellSorted, Violations) {
  EXPECT_EQ(check_well_sorted(*make_eq(var("P", "x"), var("Q", "y"))).size(), 1u);
  PolyInd pure{VarTuple{Sort{"P"}, {}}, VarTuple{Sort{"Q"}, {}}, VarTuple{Sort{"R"}, {}},
               VarTuple{Sort{"P"}, {}}, VarTuple{Sort{"R"}, {}}, VarTuple{Sort{"Q"}, {}},
               VarTuple{Sort{"R"}, {}}};
  EXPECT_TRUE(check_well_sorted(*make_atom(pure)).empty());
  PolyInc bad{tuple_of("P", {"x", "y"}), tuple_of("Q", {"u"})};
  EXPECT_EQ(check_well_sorted(*make_atom(bad)).size(), 1u);
}

TEST(Syntax, MentionedSortsIncludeLocalIndices) {
  FormulaPtr f = parse_formula("P.x = P.x \\/_{Q} P.y = P.y");
  EXPECT_EQ(mentioned_sorts(*f), (std::set<Sort>{Sort{"P"}, Sort{"Q"}}));
}
