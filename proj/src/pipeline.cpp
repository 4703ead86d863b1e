#include "cpes/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "cpes/augment.hpp"
#include "cpes/grid.hpp"
#include "cpes/ontology.hpp"
#include "cpes/powerflow.hpp"
#include "cpes/shacl.hpp"
#include "cpes/vocab.hpp"

namespace cpes::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;

PipelineConfig config_from_json(const std::string& text, const std::string& base_dir) {
  PipelineConfig c;
  auto path = [&](const json& j, const char* key) {
    fs::path p = j.at(key).get<std::string>();
    if (p.is_relative()) p = fs::path(base_dir) / p;
    return p.lexically_normal().string();
  };
  try {
    json j = json::parse(text);
    c.grid_file = path(j, "grid_file");
    c.rules_file = path(j, "rules_file");
    c.shapes_power = path(j, "shapes_power");
    c.shapes_cpes = path(j, "shapes_cpes");
    c.output_dir = path(j, "output_dir");
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("limits")) {
      const auto& l = j.at("limits");
      c.limits.vm_min_pu = l.value("vm_min_pu", c.limits.vm_min_pu);
      c.limits.vm_max_pu = l.value("vm_max_pu", c.limits.vm_max_pu);
      c.limits.loading_max_percent = l.value("loading_max_percent", c.limits.loading_max_percent);
    }
    std::set<std::string> labels;
    for (const auto& s : j.at("scenarios")) {
      ScenarioConfig sc;
      sc.actor = s.at("actor").get<std::string>();
      sc.objective = attack::parse_objective(s.at("objective").get<std::string>());
      sc.label = s.at("label").get<std::string>();
      if (s.contains("manufacturer")) sc.manufacturer = s.at("manufacturer").get<std::string>();
      if (s.contains("firmware")) sc.firmware = s.at("firmware").get<std::string>();
      if (!labels.insert(label_slug(sc.label)).second)
        throw Error("duplicate scenario label '" + sc.label + "'");
      c.scenarios.push_back(std::move(sc));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed pipeline config: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::string& path) {
  auto base = fs::absolute(fs::path(path)).parent_path().string();
  return config_from_json(rdf::read_text_file(path), base);
}

rdf::Term resolve_actor(const std::string& text) {
  if (text.size() > 2 && text.front() == '<' && text.back() == '>')
    return rdf::Term::iri(text.substr(1, text.size() - 2));
  if (text.starts_with("errol:")) return vocab::errol(text.substr(6));
  return rdf::Term::iri(text);
}

std::string label_slug(const std::string& label) {
  std::string out;
  for (char c : label) {
    bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-';
    if (keep) out += c;
    else if (!out.empty() && out.back() != '_') out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "scenario" : out;
}

namespace {

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw Error(std::string(what) + " not found: " + path);
}

ScenarioOutcome run_scenario(const ScenarioConfig& sc, const rdf::Graph& cpes_graph,
                             const powerflow::PowerFlowResult& baseline, const PipelineConfig& cfg) {
  ScenarioOutcome out;
  out.label = sc.label;
  fs::path dir = fs::path(cfg.output_dir) / "scenarios" / label_slug(sc.label);
  try {
    fs::create_directories(dir);
    attack::AttackScenario scenario{resolve_actor(sc.actor), sc.objective, sc.label, sc.manufacturer, sc.firmware};
    auto [attacked, targets] = attack::apply_attack(cpes_graph, scenario);
    out.targets = targets.size();
    rdf::write_text_file((dir / "attacked.ttl").string(), rdf::serialize_turtle(attacked));
    rdf::write_text_file((dir / "targets.json").string(), attack::targets_json(scenario, targets));
    auto tables = grid::export_grid(attacked);
    auto result = powerflow::solve(tables);
    powerflow::save_result((dir / "result.json").string(), result);
    out.report = impact::compare(baseline, result, tables, sc.label, cfg.limits);
  } catch (const powerflow::NonConvergence& e) {
    out.status = Status::NotConverged;
    out.message = e.what();
  } catch (const std::exception& e) {
    out.status = Status::Failed;
    out.message = e.what();
  }
  return out;
}

} // namespace

PipelineOutcome run_pipeline(const PipelineConfig& cfg, unsigned jobs, std::ostream* log) {
  PipelineOutcome outcome;
  std::mutex log_mutex;
  auto say = [&](const std::string& line) {
    if (!log) return;
    std::lock_guard lock(log_mutex);
    *log << line << '\n';
  };
  auto fail = [&](int code, std::string message) {
    outcome.exit_code = code;
    outcome.message = std::move(message);
    return outcome;
  };
  const fs::path out_dir = cfg.output_dir;

  rdf::Graph model, cpes_graph;
  std::vector<augment::AugmentationRule> rules;
  shacl::ShapeSet power_shapes, cpes_shapes;
  try {
    require_file(cfg.grid_file, "grid file");
    require_file(cfg.rules_file, "rules file");
    require_file(cfg.shapes_power, "power system shapes");
    require_file(cfg.shapes_cpes, "cyber-physical shapes");
    fs::create_directories(out_dir);
    auto tables = grid::load_tables(cfg.grid_file);
    model = grid::import_grid(tables);
    power_shapes = shacl::ShapeSet::load(cfg.shapes_power);
    cpes_shapes = shacl::ShapeSet::load(cfg.shapes_cpes);
    rules = augment::parse_rules(rdf::read_turtle_file(cfg.rules_file));
  } catch (const std::exception& e) {
    return fail(1, e.what());
  }
  say("imported " + std::to_string(model.size()) + " triples from " + cfg.grid_file);

  try {
    rdf::write_text_file((out_dir / "model.ttl").string(), rdf::serialize_turtle(model));
    auto report = shacl::validate(model, power_shapes);
    if (!report.conforms) {
      rdf::write_text_file((out_dir / "validation_power.json").string(), shacl::report_json(report));
      return fail(2, "power system model does not conform:\n" + shacl::report_table(report));
    }
    say("power system model conforms");

    auto derived = ontology::derive_households(model);
    try {
      auto [graph, logs] = augment::apply_all(derived, rules, cfg.seed, &cpes_shapes);
      cpes_graph = std::move(graph);
      rdf::write_text_file((out_dir / "log.json").string(), augment::logs_json(logs, rules));
    } catch (const augment::PostValidationError& e) {
      rdf::write_text_file((out_dir / "validation_cpes.json").string(), shacl::report_json(e.report()));
      return fail(2, std::string(e.what()) + "\n" + shacl::report_table(e.report()));
    }
    rdf::write_text_file((out_dir / "cpes.ttl").string(), rdf::serialize_turtle(cpes_graph));
    say("augmented model has " + std::to_string(cpes_graph.size()) + " triples");
  } catch (const std::exception& e) {
    return fail(1, e.what());
  }

  powerflow::PowerFlowResult baseline;
  grid::GridTables baseline_tables;
  try {
    baseline_tables = grid::export_grid(cpes_graph);
    baseline = powerflow::solve(baseline_tables);
    fs::create_directories(out_dir / "baseline");
    powerflow::save_result((out_dir / "baseline" / "result.json").string(), baseline);
  } catch (const powerflow::NonConvergence& e) {
    return fail(3, std::string("baseline: ") + e.what());
  } catch (const std::exception& e) {
    return fail(1, std::string("baseline: ") + e.what());
  }
  say("baseline converged in " + std::to_string(baseline.iterations) + " iterations");

  outcome.scenarios.resize(cfg.scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.scenarios.size(); i = next++) {
      outcome.scenarios[i] = run_scenario(cfg.scenarios[i], cpes_graph, baseline, cfg);
      const auto& s = outcome.scenarios[i];
      say("scenario " + s.label + ": " +
          (s.status == Status::Ok ? std::to_string(s.targets) + " targets" : s.message));
    }
  };
  unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cfg.scenarios.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<impact::ImpactReport> reports;
  std::vector<impact::VoltageStats> stats;
  bool failed = false, diverged = false;
  std::string problems;
  for (const auto& s : outcome.scenarios) {
    if (s.report) {
      reports.push_back(*s.report);
      auto result = powerflow::load_result((out_dir / "scenarios" / label_slug(s.label) / "result.json").string());
      stats.push_back(impact::voltage_stats(result, baseline_tables));
    }
    if (s.status == Status::Failed) failed = true;
    if (s.status == Status::NotConverged) diverged = true;
    if (s.status != Status::Ok) problems += "scenario " + s.label + ": " + s.message + "\n";
  }
  try {
    rdf::write_text_file((out_dir / "report.csv").string(), impact::reports_csv(reports));
    rdf::write_text_file((out_dir / "report.json").string(), impact::reports_json(reports, stats));
    outcome.summary = impact::summary_table(reports);
    rdf::write_text_file((out_dir / "summary.txt").string(), outcome.summary);
  } catch (const std::exception& e) {
    return fail(1, e.what());
  }
  if (failed) outcome.exit_code = 1;
  else if (diverged) outcome.exit_code = 3;
  outcome.message = problems;
  return outcome;
}

} // namespace cpes::pipeline
