#include "cpes/attack.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include <json.hpp>

#include "cpes/augment.hpp"
#include "cpes/vocab.hpp"

namespace cpes::attack {

using rdf::Term;
using vocab::errol;

Objective parse_objective(const std::string& text) {
  if (text == "max" || text == "MaximizeLoad") return Objective::MaximizeLoad;
  if (text == "min" || text == "MinimizeLoad") return Objective::MinimizeLoad;
  throw Error("unknown attack objective '" + text + "' (expected max or min)");
}

std::string to_string(Objective objective) {
  return objective == Objective::MaximizeLoad ? "MaximizeLoad" : "MinimizeLoad";
}

namespace {

double number(const rdf::Graph& g, const Term& node, const char* property) {
  auto v = g.object(node, errol(property));
  auto d = v ? v->as_double() : std::nullopt;
  if (!d) throw DanglingRefError(node.to_string() + " has no numeric errol:" + std::string(property));
  return *d;
}

bool host_matches(const rdf::Graph& g, const Term& block, const AttackScenario& s) {
  if (!s.manufacturer && !s.firmware) return true;
  for (const auto& actor : g.subjects(errol("hasFunctionBlock"), block))
    for (const auto& host : g.objects(actor, errol("realizedOn"))) {
      auto m = g.object(host, errol("manufacturer"));
      auto f = g.object(host, errol("firmware"));
      bool ok_m = !s.manufacturer || (m && m->is_literal() && m->value() == *s.manufacturer);
      bool ok_f = !s.firmware || (f && f->is_literal() && f->value() == *s.firmware);
      if (ok_m && ok_f) return true;
    }
  return false;
}

std::vector<ControlTarget> enumerate(const rdf::Graph& g, const AttackScenario& s) {
  const Term& actor = s.compromised_actor;
  if (!g.contains(rdf::Triple{actor, vocab::type(), errol("FunctionalActor")}))
    throw Error(actor.to_string() + " is not a FunctionalActor");

  std::set<Term> reached;
  std::deque<Term> frontier;
  for (const auto& b : g.objects(actor, errol("hasFunctionBlock")))
    if (reached.insert(b).second) frontier.push_back(b);

  // control value -> destination blocks of the flows carrying it
  std::map<Term, std::set<Term>> carried;
  while (!frontier.empty()) {
    Term block = frontier.front();
    frontier.pop_front();
    for (const auto& flow : g.subjects(errol("from"), block)) {
      auto destinations = g.objects(flow, errol("to"));
      for (const auto& cv : g.objects(flow, errol("transmits")))
        carried[cv].insert(destinations.begin(), destinations.end());
      for (const auto& next : destinations)
        if (reached.insert(next).second) frontier.push_back(next);
    }
  }

  std::vector<ControlTarget> out;
  for (const auto& [cv, destinations] : carried) {
    if (!std::any_of(destinations.begin(), destinations.end(),
                     [&](const Term& b) { return host_matches(g, b, s); }))
      continue;
    for (const auto& unit : g.objects(cv, errol("referencesUnit"))) {
      if (g.match(unit, vocab::type(), std::nullopt).empty())
        throw DanglingRefError(cv.to_string() + " references missing unit " + unit.to_string());
      ControlTarget t{cv, unit, number(g, unit, "min_p_mw"), number(g, unit, "max_p_mw"), number(g, unit, "p_mw")};
      out.push_back(std::move(t));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.unit, a.control_value) < std::tie(b.unit, b.control_value);
  });
  return out;
}

} // namespace

std::vector<ControlTarget> enumerate_controllables(const rdf::Graph& graph, const Term& actor) {
  AttackScenario s;
  s.compromised_actor = actor;
  return enumerate(graph, s);
}

std::vector<ControlTarget> enumerate_controllables(const rdf::Graph& graph, const AttackScenario& scenario) {
  return enumerate(graph, scenario);
}

std::pair<rdf::Graph, std::vector<ControlTarget>> apply_attack(const rdf::Graph& graph,
                                                               const AttackScenario& scenario) {
  auto targets = enumerate(graph, scenario);
  std::vector<augment::AugmentationRule> rules;
  std::set<Term> seen;
  for (const auto& t : targets) {
    if (!seen.insert(t.unit).second) continue;
    augment::ValueSource value;
    value.constant = Term::decimal(scenario.objective == Objective::MaximizeLoad ? t.max_p_mw : t.min_p_mw);
    std::string selector =
        "SELECT ?u WHERE { ?u <" + errol("p_mw").value() + "> ?p . FILTER(?u = " + t.unit.to_string() + ") }";
    Term iri = vocab::rule("attack/" + std::to_string(rules.size()));
    rules.push_back(augment::make_change_rule(iri, selector, "u", errol("p_mw"), std::move(value), 1.0));
  }
  auto [attacked, logs] = augment::apply_all(graph, std::move(rules), 0);
  return {std::move(attacked), std::move(targets)};
}

std::string targets_json(const AttackScenario& scenario, const std::vector<ControlTarget>& targets) {
  using json = nlohmann::ordered_json;
  json out;
  out["actor"] = scenario.compromised_actor.value();
  out["objective"] = to_string(scenario.objective);
  out["label"] = scenario.label;
  if (scenario.manufacturer) out["manufacturer"] = *scenario.manufacturer;
  if (scenario.firmware) out["firmware"] = *scenario.firmware;
  json arr = json::array();
  for (const auto& t : targets) {
    double next = scenario.objective == Objective::MaximizeLoad ? t.max_p_mw : t.min_p_mw;
    arr.push_back({{"control_value", t.control_value.value()},
                   {"unit", t.unit.value()},
                   {"min_p_mw", t.min_p_mw},
                   {"max_p_mw", t.max_p_mw},
                   {"current_p_mw", t.current_p_mw},
                   {"attacked_p_mw", next}});
  }
  out["targets"] = std::move(arr);
  return out.dump(2) + "\n";
}

} // namespace cpes::attack
