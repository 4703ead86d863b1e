#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cpes/attack.hpp"
#include "cpes/impact.hpp"

namespace cpes::pipeline {

struct ScenarioConfig {
  std::string actor; // full IRI, <IRI> or errol:local
  attack::Objective objective = attack::Objective::MaximizeLoad;
  std::string label;
  std::optional<std::string> manufacturer;
  std::optional<std::string> firmware;
};

/// Paths are absolute after load_config (resolved against the config file's
/// directory).
struct PipelineConfig {
  std::string grid_file;
  std::string rules_file;
  std::string shapes_power;
  std::string shapes_cpes;
  std::uint64_t seed = 0;
  std::vector<ScenarioConfig> scenarios;
  std::string output_dir;
  impact::Limits limits;
};

PipelineConfig config_from_json(const std::string& text, const std::string& base_dir);
PipelineConfig load_config(const std::string& path);

/// Expands errol:local and <IRI> forms into a plain IRI term.
rdf::Term resolve_actor(const std::string& text);

/// Directory-safe form of a scenario label ("Max. 1" -> "Max_1").
std::string label_slug(const std::string& label);

enum class Status { Ok, NotConverged, Failed };

struct ScenarioOutcome {
  std::string label;
  Status status = Status::Ok;
  std::string message;
  std::size_t targets = 0;
  std::optional<impact::ImpactReport> report;
};

struct PipelineOutcome {
  int exit_code = 0; // 0 ok, 1 I/O or parse, 2 non-conformance, 3 non-convergence
  std::string message;
  std::vector<ScenarioOutcome> scenarios;
  std::string summary;
};

/// Runs import, validation, augmentation, baseline solve and every scenario
/// (at most `jobs` concurrently), writing artifacts into output_dir.
/// Progress lines go to `log` when given.
PipelineOutcome run_pipeline(const PipelineConfig& config, unsigned jobs = 1, std::ostream* log = nullptr);

} // namespace cpes::pipeline
