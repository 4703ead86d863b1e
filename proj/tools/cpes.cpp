#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "cpes/attack.hpp"
#include "cpes/augment.hpp"
#include "cpes/grid.hpp"
#include "cpes/impact.hpp"
#include "cpes/ontology.hpp"
#include "cpes/pipeline.hpp"
#include "cpes/powerflow.hpp"
#include "cpes/query.hpp"
#include "cpes/shacl.hpp"

namespace fs = std::filesystem;
using namespace cpes;

namespace {

// Exit codes shared by all subcommands.
constexpr int exit_error = 1;
constexpr int exit_nonconforming = 2;
constexpr int exit_not_converged = 3;

struct Globals {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool verbose = false;
};

void note(const Globals& g, const std::string& msg) {
  if (g.verbose) std::cerr << msg << '\n';
}

bool is_turtle(const std::string& path) {
  auto ext = fs::path(path).extension().string();
  return ext == ".ttl" || ext == ".turtle";
}

grid::GridTables read_grid(const std::string& path) {
  return is_turtle(path) ? grid::export_grid(rdf::read_turtle_file(path)) : grid::load_tables(path);
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") std::cout << content;
  else rdf::write_text_file(path, content);
}

// Trafo and bus tables reconstructed from a result when no grid is given.
grid::GridTables tables_from_result(const powerflow::PowerFlowResult& r) {
  grid::GridTables t;
  for (const auto& b : r.bus) t.bus.push_back({b.id, "", b.vn_kv});
  for (const auto& tr : r.trafo) t.trafo.push_back({tr.id, 0, 0, 0, 0, 0, 0, 0});
  return t;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"cpes: cyber-physical energy system modelling and attack impact analysis"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed for augmentation (default 0)");
  app.add_option("--jobs", g.jobs, "Maximum concurrent scenarios")->check(CLI::PositiveNumber);
  app.add_flag("--verbose,-v", g.verbose, "Progress output on stderr");

  std::string in, out, aux, aux2;
  std::vector<std::string> many;
  std::optional<std::uint64_t> local_seed;

  auto* imp = app.add_subcommand("import", "grid.json -> Turtle knowledge graph");
  imp->add_option("grid", in, "grid.json")->required();
  imp->add_option("-o,--output", out, "Output Turtle file (stdout if omitted)");

  auto* exp = app.add_subcommand("export", "Turtle knowledge graph -> grid.json");
  exp->add_option("graph", in, "Turtle file")->required();
  exp->add_option("-o,--output", out, "Output grid.json (stdout if omitted)");

  auto* val = app.add_subcommand("validate", "Validate a graph against a shapes file");
  val->add_option("data", in, "Turtle data graph")->required();
  val->add_option("--shapes", aux, "Turtle shapes graph")->required();
  val->add_option("--json", out, "Also write the report as JSON");

  auto* qry = app.add_subcommand("query", "Run a SELECT query against a graph");
  qry->add_option("data", in, "Turtle data graph")->required();
  auto* qtext = qry->add_option("query", aux, "Query text");
  auto* qfile = qry->add_option("--file,-f", aux2, "Read the query from a file");
  qtext->excludes(qfile);

  auto* aug = app.add_subcommand("augment", "Apply augmentation rules");
  aug->add_option("model", in, "Turtle model")->required();
  aug->add_option("--rules", aux, "Turtle rules file")->required();
  aug->add_option("--seed", local_seed, "Master seed (overrides the global --seed)");
  aug->add_option("--shapes", aux2, "Shapes the augmented graph must conform to");
  aug->add_option("-o,--output", out, "Output Turtle file (stdout if omitted)");
  std::string log_path;
  aug->add_option("--log", log_path, "Write the applied-rule log as JSON");

  auto* atk = app.add_subcommand("attack", "Apply a worst-case setpoint attack");
  atk->add_option("graph", in, "Augmented Turtle graph")->required();
  std::string actor, objective, manufacturer, firmware, targets_path;
  atk->add_option("--actor", actor, "Compromised functional actor (IRI or errol:name)")->required();
  atk->add_option("--objective", objective, "max or min")->required()->check(CLI::IsMember({"max", "min"}));
  atk->add_option("--manufacturer", manufacturer, "Only HEMS hosts of this manufacturer");
  atk->add_option("--firmware", firmware, "Only HEMS hosts with this firmware");
  atk->add_option("-o,--output", out, "Output Turtle file (stdout if omitted)");
  atk->add_option("--targets", targets_path, "Write the affected control targets as JSON");

  auto* slv = app.add_subcommand("solve", "AC power flow");
  slv->add_option("grid", in, "grid.json or Turtle graph")->required();
  slv->add_option("-o,--output", out, "Output result.json (stdout if omitted)");

  auto* rep = app.add_subcommand("report", "Compare baseline and attacked power flow results");
  rep->add_option("--baseline", in, "Baseline result.json")->required();
  rep->add_option("--attacked", many, "Attacked result.json files")->required();
  rep->add_option("--grid", aux, "grid.json or Turtle graph (for topology checks)");
  rep->add_option("-o,--output", out, "Output CSV (stdout if omitted)");
  rep->add_option("--json", aux2, "Also write a JSON report");

  auto* pip = app.add_subcommand("pipeline", "Run the full study from a JSON config");
  pip->add_option("config", in, "Pipeline config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*imp) {
      emit(out, rdf::serialize_turtle(grid::import_grid(grid::load_tables(in))));
      return 0;
    }
    if (*exp) {
      emit(out, grid::tables_to_json(grid::export_grid(rdf::read_turtle_file(in))));
      return 0;
    }
    if (*val) {
      auto report = shacl::validate(rdf::read_turtle_file(in), shacl::ShapeSet::load(aux));
      std::cout << shacl::report_table(report);
      if (!out.empty()) rdf::write_text_file(out, shacl::report_json(report));
      return report.conforms ? 0 : exit_nonconforming;
    }
    if (*qry) {
      auto graph = rdf::read_turtle_file(in);
      std::string text = aux2.empty() ? aux : rdf::read_text_file(aux2);
      if (text.empty()) throw Error("no query given");
      auto q = query::parse_select(text, graph.prefixes());
      auto rows = query::evaluate(graph, q);
      std::string header;
      for (const auto& v : q.projected) header += (header.empty() ? "?" : "\t?") + v.name;
      std::cout << header << '\n';
      for (const auto& row : rows) {
        std::string line;
        for (const auto& v : q.projected) line += (line.empty() ? "" : "\t") + row.at(v.name).to_string();
        std::cout << line << '\n';
      }
      note(g, std::to_string(rows.size()) + " rows");
      return 0;
    }
    if (*aug) {
      auto model = ontology::derive_households(rdf::read_turtle_file(in));
      auto rules = augment::parse_rules(rdf::read_turtle_file(aux));
      std::optional<shacl::ShapeSet> shapes;
      if (!aux2.empty()) shapes = shacl::ShapeSet::load(aux2);
      try {
        auto [graph, logs] = augment::apply_all(model, rules, local_seed.value_or(g.seed), shapes ? &*shapes : nullptr);
        emit(out, rdf::serialize_turtle(graph));
        if (!log_path.empty()) rdf::write_text_file(log_path, augment::logs_json(logs, rules));
        std::size_t fired = 0;
        for (const auto& l : logs) fired += l.entries.size();
        note(g, std::to_string(rules.size()) + " rules, " + std::to_string(fired) + " applications");
      } catch (const augment::PostValidationError& e) {
        std::cerr << e.what() << '\n' << shacl::report_table(e.report());
        return exit_nonconforming;
      }
      return 0;
    }
    if (*atk) {
      attack::AttackScenario s;
      s.compromised_actor = pipeline::resolve_actor(actor);
      s.objective = attack::parse_objective(objective);
      s.label = objective;
      if (!manufacturer.empty()) s.manufacturer = manufacturer;
      if (!firmware.empty()) s.firmware = firmware;
      auto [graph, targets] = attack::apply_attack(rdf::read_turtle_file(in), s);
      emit(out, rdf::serialize_turtle(graph));
      if (!targets_path.empty()) rdf::write_text_file(targets_path, attack::targets_json(s, targets));
      note(g, std::to_string(targets.size()) + " control targets");
      return 0;
    }
    if (*slv) {
      try {
        auto result = powerflow::solve(read_grid(in));
        emit(out, powerflow::result_to_json(result));
        note(g, "converged in " + std::to_string(result.iterations) + " iterations");
      } catch (const powerflow::NonConvergence& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_not_converged;
      }
      return 0;
    }
    if (*rep) {
      auto baseline = powerflow::load_result(in);
      grid::GridTables tables = aux.empty() ? tables_from_result(baseline) : read_grid(aux);
      std::vector<impact::ImpactReport> reports;
      std::vector<impact::VoltageStats> stats;
      std::map<std::string, int> seen;
      for (const auto& path : many) {
        std::string label = fs::path(path).stem().string();
        if (label == "result") label = fs::path(path).parent_path().filename().string();
        if (int n = seen[label]++; n > 0) label += "_" + std::to_string(n + 1);
        auto attacked = powerflow::load_result(path);
        reports.push_back(impact::compare(baseline, attacked, tables, label));
        stats.push_back(impact::voltage_stats(attacked, tables));
      }
      emit(out, impact::reports_csv(reports));
      if (!aux2.empty()) rdf::write_text_file(aux2, impact::reports_json(reports, stats));
      if (!out.empty() && out != "-") std::cout << impact::summary_table(reports);
      return 0;
    }
    if (*pip) {
      auto cfg = pipeline::load_config(in);
      if (app.count("--seed")) cfg.seed = g.seed;
      auto outcome = pipeline::run_pipeline(cfg, g.jobs, g.verbose ? &std::cerr : nullptr);
      std::cout << outcome.summary;
      if (!outcome.message.empty()) std::cerr << (outcome.exit_code ? "error: " : "") << outcome.message << '\n';
      return outcome.exit_code;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  }
  return 0;
}
