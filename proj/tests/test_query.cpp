#include <gtest/gtest.h>

#include <random>

#include "cpes/query.hpp"
#include "cpes/vocab.hpp"
#include "support.hpp"

using namespace cpes;
using namespace cpes::query;
using rdf::Graph;
using rdf::Term;

namespace {

Term ex(const std::string& local) { return Term::iri("http://example.org/" + local); }

Graph small_graph() {
  return rdf::parse_turtle(R"(@prefix e: <http://example.org/> .
e:a a errol:HouseHold .
e:b a errol:Bus .
e:u1 errol:p_mw "-0.5"^^xsd:decimal .
e:u2 errol:p_mw "0.0"^^xsd:decimal .
e:u3 errol:p_mw "0.3"^^xsd:decimal .
e:u4 errol:p_mw e:notanumber .)");
}

} // namespace

TEST(QueryParse, SimpleSelect) {
  auto q = parse_select("SELECT ?h WHERE { ?h rdf:type errol:HouseHold }");
  EXPECT_EQ(q.patterns.size(), 1u);
  ASSERT_EQ(q.projected.size(), 1u);
  EXPECT_EQ(q.projected[0].name, "h");
}

TEST(QueryParse, PatternWithFilter) {
  auto q = parse_select("SELECT ?u ?p WHERE { ?u errol:p_mw ?p . FILTER(?p > 0.0) }");
  EXPECT_EQ(q.patterns.size(), 1u);
  ASSERT_EQ(q.filters.size(), 1u);
  EXPECT_EQ(q.filters[0].op, CompareOp::Gt);
}

TEST(QueryParse, ContinuationsAndPrefixes) {
  auto q = parse_select(R"(PREFIX e: <http://example.org/>
SELECT DISTINCT * WHERE { ?s a e:C ; e:p ?o , e:k . FILTER(3 < ?o) })");
  EXPECT_EQ(q.patterns.size(), 3u);
  ASSERT_EQ(q.filters.size(), 1u);
  EXPECT_EQ(q.filters[0].left.name, "o");
  EXPECT_EQ(q.filters[0].op, CompareOp::Gt);
  EXPECT_EQ(q.projected.size(), 2u);
}

TEST(QueryParse, UnsupportedKeywordsAreNamed) {
  for (const char* kw : {"OPTIONAL", "UNION", "MINUS", "GRAPH", "BIND", "VALUES"}) {
    std::string text = std::string("SELECT ?x WHERE { ") + kw + " { ?x ?y ?z } }";
    try {
      parse_select(text);
      FAIL() << kw;
    } catch (const rdf::ParseError& e) {
      EXPECT_NE(std::string(e.what()).find(std::string(kw) + " unsupported"), std::string::npos) << e.what();
    }
  }
  EXPECT_THROW(parse_select("CONSTRUCT { ?s ?p ?o } WHERE { ?s ?p ?o }"), rdf::ParseError);
  EXPECT_THROW(parse_select("SELECT ?x WHERE { ?x ?p ?o } ORDER BY ?x"), rdf::ParseError);
}

TEST(QueryParse, StructuralErrors) {
  EXPECT_THROW(parse_select("SELECT ?x WHERE { ?y ?p ?o }"), rdf::ParseError);  // unbound projection
  EXPECT_THROW(parse_select("SELECT ?y WHERE { ?y ?p ?o . FILTER(?z = 1) }"), rdf::ParseError);
  EXPECT_THROW(parse_select("SELECT ?y WHERE { ?y ?p }"), rdf::ParseError);
  EXPECT_THROW(parse_select("SELECT ?y WHERE { ?y unknown:p ?o }"), rdf::ParseError);
  EXPECT_THROW(parse_select("SELECT ?y WHERE { ?y ?p ?o . FILTER(1 = 2) }"), rdf::ParseError);
  EXPECT_THROW(parse_select("SELECT ?y WHERE { ?y ?p ?o "), rdf::ParseError);
}

TEST(QueryEval, TypeSelection) {
  auto rows = evaluate(small_graph(), parse_select("SELECT ?h WHERE { ?h rdf:type errol:HouseHold }",
                                                   {{"e", "http://example.org/"}}));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].at("h"), ex("a"));
}

TEST(QueryEval, StrictGreaterExcludesBoundaryAndTypeErrors) {
  auto rows = evaluate(small_graph(), parse_select("SELECT ?u ?p WHERE { ?u errol:p_mw ?p . FILTER(?p > 0.0) }"));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].at("u"), ex("u3"));
}

TEST(QueryEval, NumericPromotionAndDecimalEquality) {
  Graph g = rdf::parse_turtle("@prefix e: <http://example.org/> . e:a e:v 3 . e:b e:v 3.0 . e:c e:v \"3\" .");
  auto rows = evaluate(g, parse_select("SELECT ?s WHERE { ?s <http://example.org/v> ?v . FILTER(?v = 3.00) }"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].at("s"), ex("a"));
  EXPECT_EQ(rows[1].at("s"), ex("b"));
}

TEST(QueryEval, IriFiltersOnlySupportEquality) {
  Graph g = small_graph();
  auto eq = evaluate(g, parse_select("SELECT ?s WHERE { ?s a ?c . FILTER(?c = errol:Bus) }"));
  ASSERT_EQ(eq.size(), 1u);
  EXPECT_EQ(eq[0].at("s"), ex("b"));
  auto lt = evaluate(g, parse_select("SELECT ?s WHERE { ?s a ?c . FILTER(?c < errol:Bus) }"));
  EXPECT_TRUE(lt.empty());
}

TEST(QueryEval, SetSemanticsAndOrdering) {
  Graph g = rdf::parse_turtle(
      "@prefix e: <http://example.org/> . e:z e:p e:o1 , e:o2 . e:a e:p e:o1 . e:m e:p e:o3 .");
  auto rows = evaluate(g, parse_select("SELECT ?s WHERE { ?s <http://example.org/p> ?o }"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].at("s"), ex("a"));
  EXPECT_EQ(rows[1].at("s"), ex("m"));
  EXPECT_EQ(rows[2].at("s"), ex("z"));
}

TEST(QueryEval, JoinMatchesBruteForceOnFixture) {
  Graph g = rdf::parse_turtle(R"(@prefix e: <http://example.org/> .
e:hems1 errol:hasFunctionBlock e:fb1 , e:fb2 .
e:hems2 errol:hasFunctionBlock e:fb3 .
e:backend errol:hasFunctionBlock e:fb0 .
e:flow1 errol:from e:fb0 ; errol:to e:fb1 .
e:flow2 errol:from e:fb0 ; errol:to e:fb3 .
e:flow3 errol:from e:fb1 ; errol:to e:fb2 .
e:flow4 errol:from e:fb3 ; errol:to e:fb0 .
e:hems1 a errol:FunctionalActor . e:hems2 a errol:FunctionalActor .)");
  auto q = parse_select("SELECT ?hems ?flow WHERE { ?hems errol:hasFunctionBlock ?fb . ?flow errol:from ?fb }");
  auto got = oracle::rows_of(evaluate(g, q), q);
  EXPECT_EQ(got, oracle::brute_force(g, q));
  EXPECT_EQ(got.size(), 4u);
}

TEST(QueryEval, RandomizedOracleEquivalence) {
  std::mt19937_64 rng(2024);
  int nonempty = 0;
  for (int i = 0; i < 250; ++i) {
    auto pools = oracle::make_pools(rng);
    Graph g = oracle::random_graph(rng, pools, 50);
    for (int k = 0; k < 4; ++k) {
      std::string text = oracle::random_query(rng, pools);
      auto q = parse_select(text);
      auto got = oracle::rows_of(evaluate(g, q), q);
      ASSERT_EQ(got, oracle::brute_force(g, q)) << text;
      nonempty += got.empty() ? 0 : 1;
    }
  }
  EXPECT_GT(nonempty, 30);
}

TEST(QueryEval, MonotoneWithoutFilters) {
  std::mt19937_64 rng(17);
  auto pools = oracle::make_pools(rng);
  for (int i = 0; i < 30; ++i) {
    Graph g = oracle::random_graph(rng, pools, 30);
    auto q = parse_select("SELECT ?a ?b WHERE { ?a <http://example.org/p0> ?b . ?b ?p ?c }");
    auto before = oracle::rows_of(evaluate(g, q), q);
    Graph bigger = g;
    bigger.insert(oracle::pick_one(rng, pools.iris), pools.predicates[0], oracle::pick_one(rng, pools.iris));
    auto after = oracle::rows_of(evaluate(bigger, q), q);
    for (const auto& row : before) EXPECT_TRUE(after.contains(row));
  }
}

TEST(QueryEval, Deterministic) {
  std::mt19937_64 rng(8);
  auto pools = oracle::make_pools(rng);
  Graph g = oracle::random_graph(rng, pools, 50);
  auto q = parse_select("SELECT ?s ?o WHERE { ?s ?p ?o }");
  auto a = evaluate(g, q);
  auto b = evaluate(g, q);
  EXPECT_EQ(a, b);
  for (std::size_t i = 1; i < a.size(); ++i)
    EXPECT_LE(std::tie(a[i - 1].at("s"), a[i - 1].at("o")), std::tie(a[i].at("s"), a[i].at("o")));
}
