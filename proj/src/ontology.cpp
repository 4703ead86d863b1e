#include "cpes/ontology.hpp"

#include <algorithm>
#include <set>

#include "cpes/vocab.hpp"

namespace cpes::ontology {

using rdf::Term;
using vocab::errol;

namespace {

std::string local_name(const Term& t) {
  const auto& v = t.value();
  auto cut = v.find_last_of("#/");
  return cut == std::string::npos ? v : v.substr(cut + 1);
}

bool has_type(const rdf::Graph& g, const Term& node, const Term& cls) {
  return g.contains(rdf::Triple{node, vocab::type(), cls});
}

bool is_unit(const rdf::Graph& g, const Term& node) {
  return has_type(g, node, errol("Load")) || has_type(g, node, errol("StaticGenerator")) ||
         has_type(g, node, errol("Storage"));
}

} // namespace

Term household_iri(const Term& pcc_bus) { return errol("household_" + local_name(pcc_bus)); }

rdf::Graph derive_households(const rdf::Graph& graph) {
  rdf::Graph out = graph;
  std::set<Term> pccs;
  for (const auto& load : graph.subjects(vocab::type(), errol("Load"))) {
    auto types = graph.objects(load, errol("type"));
    bool household = std::any_of(types.begin(), types.end(), [](const Term& t) { return t == Term::string("household"); });
    if (!household) continue;
    for (const auto& bus : graph.objects(load, errol("connectedTo"))) pccs.insert(bus);
  }
  for (const auto& bus : pccs) {
    Term hh = household_iri(bus);
    out.insert(hh, vocab::type(), errol("HouseHold"));
    out.insert(hh, errol("pccBus"), bus);
    for (const auto& unit : graph.subjects(errol("connectedTo"), bus))
      if (is_unit(graph, unit)) out.insert(hh, errol("owns"), unit);
  }
  return out;
}

std::vector<Term> households(const rdf::Graph& graph) { return graph.subjects(vocab::type(), errol("HouseHold")); }

std::vector<ControllableUnit> controllable_units(const rdf::Graph& graph, const Term& household) {
  std::vector<ControllableUnit> out;
  for (const auto& unit : graph.objects(household, errol("owns"))) {
    auto flag = graph.object(unit, errol("controllable"));
    if (!flag || flag->as_boolean() != true) continue;
    ControllableUnit cu{unit};
    if (auto v = graph.object(unit, errol("min_p_mw")); v && v->as_double()) cu.min_p_mw = *v->as_double();
    if (auto v = graph.object(unit, errol("max_p_mw")); v && v->as_double()) cu.max_p_mw = *v->as_double();
    out.push_back(std::move(cu));
  }
  return out;
}

void add_host(rdf::Graph& g, const Term& host, const std::string& manufacturer, const std::string& firmware) {
  g.insert(host, vocab::type(), errol("Host"));
  g.insert(host, errol("manufacturer"), Term::string(manufacturer));
  g.insert(host, errol("firmware"), Term::string(firmware));
}

void add_actor(rdf::Graph& g, const Term& actor, const std::string& label, const std::optional<Term>& host) {
  g.insert(actor, vocab::type(), errol("FunctionalActor"));
  g.insert(actor, vocab::rdfs("label"), Term::string(label));
  if (host) g.insert(actor, errol("realizedOn"), *host);
}

void add_function_block(rdf::Graph& g, const Term& block, const Term& actor, const std::string& capability) {
  if (auto parent = parent_actor(g, block); parent && *parent != actor)
    throw Error(block.to_string() + " already belongs to " + parent->to_string());
  g.insert(block, vocab::type(), errol("FunctionBlock"));
  g.insert(block, errol("capability"), Term::string(capability));
  g.insert(actor, errol("hasFunctionBlock"), block);
}

void add_flow(rdf::Graph& g, const Term& flow, const Term& from_block, const Term& to_block) {
  if (from_block == to_block) throw Error("information object flow " + flow.to_string() + " must connect two blocks");
  g.insert(flow, vocab::type(), errol("InformationObjectFlow"));
  g.insert(flow, errol("from"), from_block);
  g.insert(flow, errol("to"), to_block);
}

void add_control_value(rdf::Graph& g, const Term& cv, const Term& unit, const Term& flow) {
  if (!is_unit(g, unit)) throw Error(unit.to_string() + " is not a physical unit in the graph");
  auto flag = g.object(unit, errol("controllable"));
  if (!flag || flag->as_boolean() != true) throw Error(unit.to_string() + " is not controllable");
  g.insert(cv, vocab::type(), errol("ControlValue"));
  g.insert(cv, errol("referencesUnit"), unit);
  g.insert(cv, errol("controlsProperty"), errol("p_mw"));
  g.insert(flow, errol("transmits"), cv);
}

std::optional<Term> parent_actor(const rdf::Graph& g, const Term& block) {
  auto parents = g.subjects(errol("hasFunctionBlock"), block);
  if (parents.size() != 1) return std::nullopt;
  return parents.front();
}

} // namespace cpes::ontology
