#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpes/fixtures.hpp"
#include "cpes/pipeline.hpp"
#include "cpes/vocab.hpp"
#include "support.hpp"

using namespace cpes;
using namespace cpes::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("cpes_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

PipelineConfig demo_config(const fs::path& out) {
  auto cfg = load_config(oracle::data_path("demo/pipeline.json"));
  cfg.output_dir = out.string();
  return cfg;
}

struct Run {
  int code;
  std::string output;
};

Run run_cli(const std::string& args) {
  std::string cmd = std::string(CPES_CLI) + " " + args + " 2>&1";
  Run r{-1, ""};
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
  int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

} // namespace

TEST(Config, PathsResolveAgainstConfigDirectory) {
  auto cfg = load_config(oracle::data_path("demo/pipeline.json"));
  EXPECT_TRUE(fs::exists(cfg.grid_file));
  EXPECT_TRUE(fs::exists(cfg.rules_file));
  EXPECT_EQ(cfg.seed, 42u);
  ASSERT_EQ(cfg.scenarios.size(), 6u);
  EXPECT_EQ(cfg.scenarios[3].objective, attack::Objective::MinimizeLoad);
  EXPECT_EQ(label_slug("Max. 1"), "Max_1");
  EXPECT_EQ(resolve_actor("errol:backend_m1"), vocab::errol("backend_m1"));
  EXPECT_EQ(resolve_actor("<http://x/y>"), rdf::Term::iri("http://x/y"));
  EXPECT_THROW(config_from_json(R"({"grid_file": "g.json"})", "/tmp"), Error);
  EXPECT_THROW(config_from_json(R"({"grid_file": "g", "rules_file": "r", "shapes_power": "a", "shapes_cpes": "b",
    "output_dir": "o", "scenarios": [{"actor": "errol:x", "objective": "max", "label": "A"},
                                     {"actor": "errol:y", "objective": "min", "label": "A"}]})",
                                "/tmp"),
               Error);
}

TEST(Pipeline, DemoRunProducesArtifactsAndSigns) {
  auto dir = scratch("demo");
  auto outcome = run_pipeline(demo_config(dir / "out"));
  ASSERT_EQ(outcome.exit_code, 0) << outcome.message;
  for (const char* f : {"model.ttl", "cpes.ttl", "log.json", "baseline/result.json", "report.csv", "report.json",
                        "summary.txt", "scenarios/Max_1/attacked.ttl", "scenarios/Min_3/result.json"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  ASSERT_EQ(outcome.scenarios.size(), 6u);
  for (const auto& s : outcome.scenarios) {
    ASSERT_TRUE(s.report) << s.label;
    EXPECT_EQ(s.report->trafos.size(), 4u);
    bool max = s.label.starts_with("Max");
    for (const auto& d : s.report->trafos) {
      if (max) EXPECT_GE(d.delta_p_mw, -1e-9) << s.label;
      else EXPECT_LE(d.delta_p_mw, 1e-9) << s.label;
    }
    EXPECT_TRUE(s.report->violations.empty());
  }
  auto csv = slurp(dir / "out" / "report.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6 * 4);
  EXPECT_NE(outcome.summary.find("no problematic grid states"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Pipeline, ByteIdenticalAcrossRunsAndJobCounts) {
  auto dir = scratch("determinism");
  ASSERT_EQ(run_pipeline(demo_config(dir / "a"), 1).exit_code, 0);
  ASSERT_EQ(run_pipeline(demo_config(dir / "b"), 1).exit_code, 0);
  ASSERT_EQ(run_pipeline(demo_config(dir / "c"), 4).exit_code, 0);
  auto a = tree(dir / "a");
  EXPECT_GT(a.size(), 10u);
  EXPECT_EQ(a, tree(dir / "b"));
  EXPECT_EQ(a, tree(dir / "c"));
  fs::remove_all(dir);
}

TEST(Pipeline, MissingRulesFileNamesPath) {
  auto dir = scratch("missing");
  auto cfg = demo_config(dir / "out");
  cfg.rules_file = (dir / "nope.ttl").string();
  auto outcome = run_pipeline(cfg);
  EXPECT_EQ(outcome.exit_code, 1);
  EXPECT_NE(outcome.message.find(cfg.rules_file), std::string::npos) << outcome.message;
  fs::remove_all(dir);
}

TEST(Pipeline, PositiveGenerationIsNonConforming) {
  auto dir = scratch("sgen");
  auto tables = fixtures::demo_feeder();
  tables.sgen[0].p_mw = 0.5;
  grid::save_tables((dir / "grid.json").string(), tables);
  auto cfg = demo_config(dir / "out");
  cfg.grid_file = (dir / "grid.json").string();
  auto outcome = run_pipeline(cfg);
  EXPECT_EQ(outcome.exit_code, 2);
  EXPECT_NE(outcome.message.find("MaxInclusive"), std::string::npos) << outcome.message;
  EXPECT_TRUE(fs::exists(dir / "out" / "validation_power.json"));
  fs::remove_all(dir);
}

TEST(Pipeline, ScenarioFailuresAreIsolated) {
  auto dir = scratch("isolation");
  auto cfg = demo_config(dir / "good");
  ASSERT_EQ(run_pipeline(cfg).exit_code, 0);
  auto bad = demo_config(dir / "bad");
  bad.scenarios.insert(bad.scenarios.begin() + 2, ScenarioConfig{"errol:nobody", attack::Objective::MaximizeLoad,
                                                                 "Broken", std::nullopt, std::nullopt});
  auto outcome = run_pipeline(bad, 3);
  EXPECT_EQ(outcome.exit_code, 1);
  EXPECT_EQ(outcome.scenarios[2].status, Status::Failed);
  for (const auto& s : cfg.scenarios) {
    auto rel = fs::path("scenarios") / label_slug(s.label);
    for (const char* f : {"attacked.ttl", "targets.json", "result.json"})
      EXPECT_EQ(slurp(dir / "good" / rel / f), slurp(dir / "bad" / rel / f)) << s.label << f;
  }
  fs::remove_all(dir);
}

TEST(Pipeline, DivergentScenarioFlaggedOthersContinue) {
  auto dir = scratch("diverge");
  auto tables = fixtures::demo_feeder();
  for (auto& l : tables.load)
    if (l.controllable) l.max_p_mw = 40.0;  // far beyond what one LV feeder can carry
  grid::save_tables((dir / "grid.json").string(), tables);
  auto cfg = demo_config(dir / "out");
  cfg.grid_file = (dir / "grid.json").string();
  auto outcome = run_pipeline(cfg, 2);
  EXPECT_EQ(outcome.exit_code, 3) << outcome.message;
  int diverged = 0, ok = 0;
  for (const auto& s : outcome.scenarios) {
    diverged += s.status == Status::NotConverged;
    ok += s.status == Status::Ok;
  }
  EXPECT_GT(diverged, 0);
  EXPECT_GE(ok, 3);  // the Min scenarios are unaffected
  EXPECT_TRUE(fs::exists(dir / "out" / "report.csv"));
  fs::remove_all(dir);
}

TEST(Cli, ImportSolveValidateQuery) {
  auto dir = scratch("cli");
  auto grid_json = oracle::data_path("demo/grid.json");
  auto model = (dir / "model.ttl").string();
  EXPECT_EQ(run_cli("import " + grid_json + " -o " + model).code, 0);
  auto ok = run_cli("validate " + model + " --shapes " + oracle::data_path("shapes/power_system.ttl"));
  EXPECT_EQ(ok.code, 0) << ok.output;
  auto q = run_cli("query " + model + " 'SELECT ?t WHERE { ?t a errol:Transformer }'");
  EXPECT_EQ(q.code, 0);
  EXPECT_EQ(std::count(q.output.begin(), q.output.end(), '\n'), 5);
  auto result = (dir / "result.json").string();
  EXPECT_EQ(run_cli("solve " + grid_json + " -o " + result).code, 0);
  EXPECT_EQ(run_cli("solve " + model + " -o " + (dir / "r2.json").string()).code, 0);
  EXPECT_EQ(slurp(result), slurp(dir / "r2.json"));
  auto exported = (dir / "grid.json").string();
  EXPECT_EQ(run_cli("export " + model + " -o " + exported).code, 0);
  EXPECT_EQ(grid::load_tables(exported), grid::load_tables(grid_json));
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  auto dir = scratch("cli_codes");
  auto tables = fixtures::demo_feeder();
  tables.sgen[0].p_mw = 0.5;
  grid::save_tables((dir / "bad.json").string(), tables);
  ASSERT_EQ(run_cli("import " + (dir / "bad.json").string() + " -o " + (dir / "bad.ttl").string()).code, 0);
  auto v = run_cli("validate " + (dir / "bad.ttl").string() + " --shapes " +
                   oracle::data_path("shapes/power_system.ttl"));
  EXPECT_EQ(v.code, 2);
  EXPECT_NE(v.output.find("MaxInclusive"), std::string::npos) << v.output;

  grid::GridTables heavy;
  heavy.bus = {{0, "slack", 1.0}, {1, "load", 1.0}};
  heavy.line = {{0, 0, 1, 0.0, 0.1, 1.0, 100.0}};
  heavy.load = {{0, 1, 30.0, 0.0, "commercial", false, 30.0, 0.0}};
  heavy.ext_grid = {{0, 0, 1.0, 0.0}};
  grid::save_tables((dir / "heavy.json").string(), heavy);
  EXPECT_EQ(run_cli("solve " + (dir / "heavy.json").string()).code, 3);

  auto missing = run_cli("solve " + (dir / "absent.json").string());
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.output.find("absent.json"), std::string::npos);
  EXPECT_NE(run_cli("frobnicate").code, 0);
  fs::remove_all(dir);
}

TEST(Cli, AugmentAttackReport) {
  auto dir = scratch("cli_chain");
  auto model = (dir / "model.ttl").string(), cpes_ttl = (dir / "cpes.ttl").string();
  ASSERT_EQ(run_cli("import " + oracle::data_path("demo/grid.json") + " -o " + model).code, 0);
  auto aug = run_cli("augment " + model + " --rules " + oracle::data_path("rules/case_study.ttl") +
                     " --seed 42 --shapes " + oracle::data_path("shapes/cyber_physical.ttl") + " -o " + cpes_ttl +
                     " --log " + (dir / "log.json").string());
  ASSERT_EQ(aug.code, 0) << aug.output;
  auto attacked = (dir / "attacked.ttl").string();
  auto atk = run_cli("attack " + cpes_ttl + " --actor errol:backend_m1 --objective max -o " + attacked +
                     " --targets " + (dir / "targets.json").string());
  ASSERT_EQ(atk.code, 0) << atk.output;
  ASSERT_EQ(run_cli("solve " + model + " -o " + (dir / "base.json").string()).code, 0);
  ASSERT_EQ(run_cli("solve " + attacked + " -o " + (dir / "max1.json").string()).code, 0);
  auto rep = run_cli("report --baseline " + (dir / "base.json").string() + " --attacked " +
                     (dir / "max1.json").string() + " --grid " + model + " -o " + (dir / "report.csv").string());
  ASSERT_EQ(rep.code, 0) << rep.output;
  EXPECT_NE(rep.output.find("no problematic grid states"), std::string::npos) << rep.output;
  auto csv = slurp(dir / "report.csv");
  EXPECT_NE(csv.find("max1,"), std::string::npos);
  fs::remove_all(dir);
}
