#include "cpes/shacl.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cpes/vocab.hpp"

namespace cpes::shacl {

using rdf::Term;
using vocab::sh;

std::string_view to_string(Constraint c) {
  switch (c) {
  case Constraint::Datatype: return "Datatype";
  case Constraint::MinCount: return "MinCount";
  case Constraint::MaxCount: return "MaxCount";
  case Constraint::MinInclusive: return "MinInclusive";
  case Constraint::MaxInclusive: return "MaxInclusive";
  }
  return "";
}

std::size_t ValidationReport::count(Constraint c) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [c](const Violation& v) { return v.constraint == c; }));
}

namespace {

std::string local_name(const Term& t) {
  const auto& v = t.value();
  auto cut = v.find_last_of("#/");
  return cut == std::string::npos ? v : v.substr(cut + 1);
}

const Term& single(const rdf::Graph& g, const Term& node, const Term& pred, std::vector<Term>& storage) {
  storage = g.objects(node, pred);
  if (storage.size() != 1)
    throw ShapeError(node.to_string() + " must have exactly one " + pred.to_string());
  return storage.front();
}

long long count_value(const rdf::Graph& g, const Term& node, const Term& pred) {
  std::vector<Term> tmp;
  const Term& v = single(g, node, pred, tmp);
  auto n = v.as_integer();
  if (!n || *n < 0) throw ShapeError(pred.to_string() + " of " + node.to_string() + " must be a non-negative xsd:integer");
  return *n;
}

Decimal bound_value(const rdf::Graph& g, const Term& node, const Term& pred) {
  std::vector<Term> tmp;
  const Term& v = single(g, node, pred, tmp);
  auto d = v.as_decimal();
  if (!d) throw ShapeError(pred.to_string() + " of " + node.to_string() + " must be a numeric literal");
  return *d;
}

std::string string_value(const rdf::Graph& g, const Term& node, const Term& pred) {
  std::vector<Term> tmp;
  const Term& v = single(g, node, pred, tmp);
  if (!v.is_literal() || v.datatype() != rdf::Datatype::String)
    throw ShapeError(pred.to_string() + " of " + node.to_string() + " must be a string");
  return v.value();
}

bool is_sh(const Term& t) { return t.is_iri() && t.value().starts_with(vocab::sh_ns); }

PropertyShape parse_property(const rdf::Graph& g, const Term& node) {
  static const std::set<std::string> allowed = {"path",         "datatype",     "minCount", "maxCount",
                                                "minInclusive", "maxInclusive", "name",     "description"};
  for (const auto& t : g.match(node, std::nullopt, std::nullopt)) {
    if (is_sh(t.predicate) && !allowed.contains(t.predicate.value().substr(vocab::sh_ns.size())))
      throw ShapeError("unsupported constraint " + t.predicate.to_string() + " on " + node.to_string());
  }
  PropertyShape ps;
  auto paths = g.objects(node, sh("path"));
  if (paths.empty()) throw ShapeError("property shape " + node.to_string() + " lacks sh:path");
  if (paths.size() > 1 || !paths.front().is_iri())
    throw ShapeError("property shape " + node.to_string() + " must have a single IRI sh:path");
  ps.path = paths.front();

  if (g.object(node, sh("datatype"))) {
    std::vector<Term> tmp;
    const Term& dt = single(g, node, sh("datatype"), tmp);
    auto parsed = dt.is_iri() ? rdf::datatype_from_iri(dt.value()) : std::nullopt;
    if (!parsed) throw ShapeError("unsupported sh:datatype " + dt.to_string());
    ps.datatype = parsed;
  }
  if (g.object(node, sh("minCount"))) ps.min_count = count_value(g, node, sh("minCount"));
  if (g.object(node, sh("maxCount"))) ps.max_count = count_value(g, node, sh("maxCount"));
  if (g.object(node, sh("minInclusive"))) ps.min_inclusive = bound_value(g, node, sh("minInclusive"));
  if (g.object(node, sh("maxInclusive"))) ps.max_inclusive = bound_value(g, node, sh("maxInclusive"));
  if (g.object(node, sh("name"))) ps.name = string_value(g, node, sh("name"));
  if (g.object(node, sh("description"))) ps.description = string_value(g, node, sh("description"));

  if (ps.min_count && ps.max_count && *ps.min_count > *ps.max_count)
    throw ShapeError("sh:minCount exceeds sh:maxCount on " + node.to_string());
  if (ps.min_inclusive && ps.max_inclusive && *ps.min_inclusive > *ps.max_inclusive)
    throw ShapeError("sh:minInclusive exceeds sh:maxInclusive on " + node.to_string());
  return ps;
}

std::string label_of(const PropertyShape& ps) {
  std::string label = ps.name ? "\"" + *ps.name + "\"" : local_name(ps.path);
  if (ps.description) label += " (" + *ps.description + ")";
  return label;
}

void check_property(const rdf::Graph& data, const Term& focus, const PropertyShape& ps,
                    std::vector<Violation>& out) {
  auto values = data.objects(focus, ps.path);
  auto n = static_cast<long long>(values.size());
  auto add = [&](Constraint c, std::string actual, std::string detail) {
    out.push_back(Violation{focus, ps.path, c, std::move(actual), label_of(ps) + ": " + detail});
  };
  if (ps.min_count && n < *ps.min_count)
    add(Constraint::MinCount, std::to_string(n),
        "expected at least " + std::to_string(*ps.min_count) + " value(s), found " + std::to_string(n));
  if (ps.max_count && n > *ps.max_count)
    add(Constraint::MaxCount, std::to_string(n),
        "expected at most " + std::to_string(*ps.max_count) + " value(s), found " + std::to_string(n));
  for (const auto& v : values) {
    if (ps.datatype && !(v.is_literal() && v.datatype() == *ps.datatype))
      add(Constraint::Datatype, v.to_string(), "value " + v.to_string() + " is not of datatype " +
                                                   std::string(rdf::datatype_iri(*ps.datatype)));
    auto num = v.as_decimal();
    if (ps.min_inclusive && !(num && *num >= *ps.min_inclusive))
      add(Constraint::MinInclusive, v.to_string(),
          "value " + v.to_string() + " is below the minimum " + ps.min_inclusive->canonical());
    if (ps.max_inclusive && !(num && *num <= *ps.max_inclusive))
      add(Constraint::MaxInclusive, v.to_string(),
          "value " + v.to_string() + " exceeds the maximum " + ps.max_inclusive->canonical());
  }
}

} // namespace

std::vector<NodeShape> parse_shapes(const rdf::Graph& g) {
  static const std::set<std::string> allowed = {"targetClass", "property", "and", "name", "description"};
  std::vector<NodeShape> shapes;
  for (const auto& subject : g.subjects(vocab::type(), sh("NodeShape"))) {
    for (const auto& t : g.match(subject, std::nullopt, std::nullopt))
      if (is_sh(t.predicate) && !allowed.contains(t.predicate.value().substr(vocab::sh_ns.size())))
        throw ShapeError("unsupported constraint " + t.predicate.to_string() + " on " + subject.to_string());
    NodeShape ns;
    ns.shape = subject;
    std::vector<Term> tmp;
    auto targets = g.objects(subject, sh("targetClass"));
    if (targets.size() != 1 || !targets.front().is_iri())
      throw ShapeError("node shape " + subject.to_string() + " needs exactly one IRI sh:targetClass");
    ns.target_class = targets.front();
    for (const auto& p : g.objects(subject, sh("property"))) ns.properties.push_back(parse_property(g, p));
    for (const auto& head : g.objects(subject, sh("and"))) {
      std::vector<Term> members;
      try {
        members = rdf::read_list(g, head);
      } catch (const Error& e) {
        throw ShapeError(std::string("sh:and of ") + subject.to_string() + ": " + e.what());
      }
      for (const auto& m : members) ns.and_constraints.push_back(parse_property(g, m));
    }
    shapes.push_back(std::move(ns));
  }
  std::sort(shapes.begin(), shapes.end(), [](const NodeShape& a, const NodeShape& b) { return a.shape < b.shape; });
  return shapes;
}

std::vector<Term> target_nodes(const rdf::Graph& data, const NodeShape& shape, const rdf::Graph& hierarchy) {
  // Depth-first over subclasses; a class met again on the current path is a cycle.
  std::set<Term> done, on_path;
  std::vector<Term> classes;
  auto visit = [&](auto&& self, const Term& c) -> void {
    if (on_path.contains(c)) throw CycleError("rdfs:subClassOf cycle through " + c.to_string());
    if (done.contains(c)) return;
    on_path.insert(c);
    for (const auto& sub : hierarchy.subjects(vocab::sub_class_of(), c))
      if (sub != c) self(self, sub);
    on_path.erase(c);
    done.insert(c);
    classes.push_back(c);
  };
  visit(visit, shape.target_class);

  std::set<Term> nodes;
  for (const auto& c : classes)
    for (const auto& n : data.subjects(vocab::type(), c)) nodes.insert(n);
  return {nodes.begin(), nodes.end()};
}

ValidationReport validate(const rdf::Graph& data, const std::vector<NodeShape>& shapes, const rdf::Graph& hierarchy) {
  ValidationReport report;
  for (const auto& shape : shapes) {
    for (const auto& focus : target_nodes(data, shape, hierarchy)) {
      for (const auto& ps : shape.properties) check_property(data, focus, ps, report.violations);
      for (const auto& ps : shape.and_constraints) check_property(data, focus, ps, report.violations);
    }
  }
  std::sort(report.violations.begin(), report.violations.end());
  report.conforms = report.violations.empty();
  return report;
}

ShapeSet ShapeSet::from_graph(const rdf::Graph& g) {
  ShapeSet set;
  set.shapes = parse_shapes(g);
  for (const auto& t : g.match(std::nullopt, vocab::sub_class_of(), std::nullopt)) set.hierarchy.insert(t);
  return set;
}

ShapeSet ShapeSet::load(const std::string& path) { return from_graph(rdf::read_turtle_file(path)); }

ValidationReport validate(const rdf::Graph& data, const ShapeSet& shapes) {
  rdf::Graph hierarchy = shapes.hierarchy;
  for (const auto& t : data.match(std::nullopt, vocab::sub_class_of(), std::nullopt)) hierarchy.insert(t);
  return validate(data, shapes.shapes, hierarchy);
}

std::string report_json(const ValidationReport& report) {
  nlohmann::ordered_json j;
  j["conforms"] = report.conforms;
  j["violation_count"] = report.violations.size();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& v : report.violations) {
    nlohmann::ordered_json e;
    e["focus_node"] = v.focus_node.value();
    e["path"] = v.path.value();
    e["constraint"] = std::string(to_string(v.constraint));
    e["actual"] = v.actual;
    e["message"] = v.message;
    arr.push_back(std::move(e));
  }
  j["violations"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string report_table(const ValidationReport& report) {
  std::ostringstream out;
  if (report.conforms) {
    out << "Conforms: yes (0 violations)\n";
    return out.str();
  }
  out << "Conforms: no (" << report.violations.size() << " violations)\n";
  for (const auto& v : report.violations)
    out << "  " << v.focus_node.value() << "  " << local_name(v.path) << "  " << to_string(v.constraint) << "  "
        << v.message << "\n";
  return out.str();
}

} // namespace cpes::shacl
