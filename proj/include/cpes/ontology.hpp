#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpes/rdf.hpp"

// Control-infrastructure vocabulary: asset groups and households, hosts,
// functional actors, function blocks, information object flows and control
// values. ControlValue -> errol:referencesUnit is the only edge from the
// function layer to a physical element.
namespace cpes::ontology {

/// Creates one errol:HouseHold per bus that has at least one household load
/// and links it (errol:owns) to every load, static generator and storage at
/// that bus. Idempotent.
rdf::Graph derive_households(const rdf::Graph& graph);

/// Deterministic household IRI for a PCC bus.
rdf::Term household_iri(const rdf::Term& pcc_bus);

std::vector<rdf::Term> households(const rdf::Graph& graph);

struct ControllableUnit {
  rdf::Term unit;
  double min_p_mw = 0.0;
  double max_p_mw = 0.0;
};

/// Owned units flagged controllable, ordered by unit IRI.
std::vector<ControllableUnit> controllable_units(const rdf::Graph& graph, const rdf::Term& household);

void add_host(rdf::Graph& g, const rdf::Term& host, const std::string& manufacturer, const std::string& firmware);
void add_actor(rdf::Graph& g, const rdf::Term& actor, const std::string& label,
               const std::optional<rdf::Term>& host = std::nullopt);
void add_function_block(rdf::Graph& g, const rdf::Term& block, const rdf::Term& actor,
                        const std::string& capability);
/// Directed flow; throws if from == to.
void add_flow(rdf::Graph& g, const rdf::Term& flow, const rdf::Term& from_block, const rdf::Term& to_block);
/// ControlValue for the unit's active power, transmitted by `flow`. The unit
/// must exist and be controllable.
void add_control_value(rdf::Graph& g, const rdf::Term& control_value, const rdf::Term& unit,
                       const rdf::Term& flow);

/// The unique actor holding `block`, if any.
std::optional<rdf::Term> parent_actor(const rdf::Graph& g, const rdf::Term& block);

} // namespace cpes::ontology
