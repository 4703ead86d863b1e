#include <gtest/gtest.h>

#include <random>

#include "cpes/fixtures.hpp"
#include "cpes/grid.hpp"
#include "cpes/shacl.hpp"
#include "cpes/vocab.hpp"
#include "support.hpp"

using namespace cpes;
using namespace cpes::grid;
using rdf::Term;
using vocab::errol;

namespace {

GridTables two_bus() {
  GridTables t;
  t.bus = {{0, "slack", 20.0}, {1, "load bus", 20.0}};
  t.line = {{0, 0, 1, 0.1, 0.2, 1.5, 0.3}};
  t.load = {{0, 1, 0.5, 0.1, "household", false, 0.5, 0.0}};
  t.sgen = {{0, 1, -0.2, 0.0, "PV", true, 0.0, -0.3}};
  t.ext_grid = {{0, 0, 1.0, 0.0}};
  return t;
}

} // namespace

TEST(GridJson, RoundTripIsExact) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    GridTables t = oracle::random_tables(rng);
    t.sort_by_id();
    EXPECT_EQ(tables_from_json(tables_to_json(t)), t);
  }
}

TEST(GridJson, DefaultsForOptionalFields) {
  auto t = tables_from_json(R"({
    "bus": [{"id": 0, "vn_kv": 0.4}],
    "load": [{"id": 1, "bus": 0, "p_mw": 0.004, "type": "household"}],
    "sgen": [{"id": 2, "bus": 0, "p_mw": -0.003, "type": "PV"}],
    "storage": [{"id": 3, "bus": 0, "p_mw": 0.0, "sn_mva": 0.005}],
    "ext_grid": [{"id": 4, "bus": 0}]
  })");
  ASSERT_EQ(t.load.size(), 1u);
  EXPECT_EQ(t.load[0].q_mvar, 0.0);
  EXPECT_FALSE(t.load[0].controllable);
  EXPECT_EQ(t.load[0].max_p_mw, 0.004);
  EXPECT_EQ(t.load[0].min_p_mw, 0.0);
  EXPECT_EQ(t.sgen[0].max_p_mw, 0.0);
  EXPECT_EQ(t.sgen[0].min_p_mw, -0.003);
  EXPECT_EQ(t.storage[0].max_p_mw, 0.005);
  EXPECT_EQ(t.storage[0].min_p_mw, -0.005);
  EXPECT_EQ(t.storage[0].soc_percent, 50.0);
  EXPECT_EQ(t.ext_grid[0].vm_pu, 1.0);
  EXPECT_EQ(t.bus[0].name, "");
}

TEST(GridJson, GeneratorSignConventionIsNegated) {
  auto t = tables_from_json(R"({"sgen_sign_convention": "generator",
    "bus": [{"id": 0, "vn_kv": 0.4}],
    "sgen": [{"id": 0, "bus": 0, "p_mw": 0.5, "q_mvar": 0.1, "type": "PV", "max_p_mw": 0.6, "min_p_mw": 0.0}]})");
  ASSERT_EQ(t.sgen.size(), 1u);
  EXPECT_EQ(t.sgen[0].p_mw, -0.5);
  EXPECT_EQ(t.sgen[0].q_mvar, -0.1);
  EXPECT_EQ(t.sgen[0].min_p_mw, -0.6);
  EXPECT_EQ(t.sgen[0].max_p_mw, 0.0);
  EXPECT_THROW(tables_from_json(R"({"sgen_sign_convention": "upside-down"})"), GridError);
}

TEST(GridJson, MalformedInputs) {
  EXPECT_THROW(tables_from_json("[1, 2]"), GridError);
  EXPECT_THROW(tables_from_json("{"), GridError);
  EXPECT_THROW(tables_from_json(R"({"bus": [{"id": 0}]})"), GridError);
  EXPECT_THROW(tables_from_json(R"({"bus": [{"id": "zero", "vn_kv": 1}]})"), GridError);
  EXPECT_THROW(tables_from_json(R"({"bus": {"id": 0}})"), GridError);
  EXPECT_THROW(tables_from_json(R"({"bus": [{"id": 0, "vn_kv": 1}], "storage": [{"id": 0, "bus": 0, "p_mw": 0}]})"),
               GridError);
}

TEST(GridInvariants, ValidTablesHaveNone) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) EXPECT_TRUE(invariant_violations(oracle::random_tables(rng)).empty());
  EXPECT_NO_THROW(validate_tables(fixtures::demo_feeder()));
}

TEST(GridInvariants, EachBrokenFieldIsReported) {
  GridTables t = two_bus();
  t.bus[1].vn_kv = 0;
  t.sgen[0].p_mw = 0.1;
  auto v = invariant_violations(t);
  EXPECT_GE(v.size(), 2u);
  EXPECT_THROW(validate_tables(t), GridError);
}

TEST(GridImport, ElementIris) {
  EXPECT_EQ(element_iri("bus", 7), errol("bus_7"));
  EXPECT_EQ(element_iri("sgen", 0), errol("sgen_0"));
}

TEST(GridImport, TwoBusGraphContents) {
  auto g = import_grid(two_bus());
  EXPECT_TRUE(g.contains({errol("bus_0"), vocab::type(), errol("Bus")}));
  EXPECT_TRUE(g.contains({errol("line_0"), errol("fromBus"), errol("bus_0")}));
  EXPECT_TRUE(g.contains({errol("load_0"), errol("connectedTo"), errol("bus_1")}));
  EXPECT_TRUE(g.contains({errol("sgen_0"), errol("p_mw"), Term::decimal(-0.2)}));
  EXPECT_TRUE(g.contains({errol("sgen_0"), errol("controllable"), Term::boolean(true)}));
  EXPECT_TRUE(g.contains({errol("load_0"), errol("type"), Term::string("household")}));
}

TEST(GridImport, DanglingReferenceNamesTheBus) {
  GridTables t = two_bus();
  t.load[0].bus = 99;
  try {
    import_grid(t);
    FAIL();
  } catch (const RefError& e) {
    EXPECT_EQ(e.bus(), 99);
    EXPECT_NE(std::string(e.what()).find("99"), std::string::npos);
  }
}

TEST(GridImport, RoundTripThroughGraphAndTurtle) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 50; ++i) {
    GridTables t = oracle::random_tables(rng);
    t.sort_by_id();
    auto g = import_grid(t);
    EXPECT_EQ(export_grid(g), t);
    EXPECT_EQ(export_grid(rdf::parse_turtle(rdf::serialize_turtle(g))), t);
  }
}

TEST(GridImport, ImportedGraphsConformToShipped) {
  auto shapes = shacl::ShapeSet::load(oracle::data_path("shapes/power_system.ttl"));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    auto report = shacl::validate(import_grid(oracle::random_tables(rng)), shapes);
    EXPECT_TRUE(report.conforms) << shacl::report_table(report);
  }
  EXPECT_TRUE(shacl::validate(import_grid(fixtures::demo_feeder()), shapes).conforms);
}

TEST(GridExport, MissingPropertyNamesTheNode) {
  auto g = import_grid(two_bus());
  g.remove(errol("bus_1"), errol("vn_kv"), std::nullopt);
  try {
    export_grid(g);
    FAIL();
  } catch (const ValidationError& e) {
    ASSERT_EQ(e.problems().size(), 1u);
    EXPECT_NE(e.problems()[0].find(errol("bus_1").value()), std::string::npos);
    EXPECT_NE(e.problems()[0].find("vn_kv"), std::string::npos);
  }
}

TEST(GridExport, IgnoresUnrelatedTriples) {
  auto g = import_grid(two_bus());
  g.insert(errol("hems_1"), vocab::type(), errol("FunctionalActor"));
  g.insert(errol("sgen_0"), errol("note"), Term::string("extra"));
  GridTables expected = two_bus();
  expected.sort_by_id();
  EXPECT_EQ(export_grid(g), expected);
}

TEST(GridFixtures, DemoFeederShape) {
  auto t = fixtures::demo_feeder();
  int households = 0;
  for (const auto& l : t.load) households += l.type == "household";
  EXPECT_EQ(households, 20);
  EXPECT_EQ(t.trafo.size(), 4u);
  EXPECT_EQ(t.ext_grid.size(), 1u);
  auto big = fixtures::thousand_household_feeder();
  households = 0;
  for (const auto& l : big.load) households += l.type == "household";
  EXPECT_EQ(households, 1000);
  EXPECT_TRUE(invariant_violations(big).empty());
}

TEST(GridFixtures, BundledDemoMatchesGenerator) {
  auto bundled = load_tables(oracle::data_path("demo/grid.json"));
  auto generated = fixtures::demo_feeder();
  generated.sort_by_id();
  EXPECT_EQ(bundled, generated);
}
