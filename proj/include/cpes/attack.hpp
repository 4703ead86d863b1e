#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpes/rdf.hpp"

namespace cpes::attack {

enum class Objective { MaximizeLoad, MinimizeLoad };

/// Parses "max"/"min" (also "MaximizeLoad"/"MinimizeLoad").
Objective parse_objective(const std::string& text);
std::string to_string(Objective objective);

struct AttackScenario {
  rdf::Term compromised_actor;
  Objective objective = Objective::MaximizeLoad;
  std::string label;
  // Optional scope: only control values delivered to blocks whose actor runs
  // on a host with this manufacturer / firmware.
  std::optional<std::string> manufacturer;
  std::optional<std::string> firmware;
};

struct ControlTarget {
  rdf::Term control_value;
  rdf::Term unit;
  double min_p_mw = 0.0;
  double max_p_mw = 0.0;
  double current_p_mw = 0.0;

  friend bool operator==(const ControlTarget&, const ControlTarget&) = default;
};

class DanglingRefError : public Error {
public:
  using Error::Error;
};

/// Control values carried by flows reachable from the actor's function
/// blocks (following errol:from -> errol:to transitively), ordered by unit
/// then control value. Throws Error if the actor is not a FunctionalActor.
std::vector<ControlTarget> enumerate_controllables(const rdf::Graph& graph, const rdf::Term& actor);
std::vector<ControlTarget> enumerate_controllables(const rdf::Graph& graph, const AttackScenario& scenario);

/// Sets each target's errol:p_mw to its max (MaximizeLoad) or min
/// (MinimizeLoad) bound through generated change rules.
std::pair<rdf::Graph, std::vector<ControlTarget>> apply_attack(const rdf::Graph& graph,
                                                               const AttackScenario& scenario);

std::string targets_json(const AttackScenario& scenario, const std::vector<ControlTarget>& targets);

} // namespace cpes::attack
