#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpes/decimal.hpp"
#include "cpes/rdf.hpp"

// Closed-world validation with the SHACL subset: targetClass, property
// shapes (path, datatype, minCount, maxCount, minInclusive, maxInclusive)
// and sh:and lists of value-range shapes.
namespace cpes::shacl {

struct PropertyShape {
  rdf::Term path;
  std::optional<rdf::Datatype> datatype;
  std::optional<long long> min_count;
  std::optional<long long> max_count;
  std::optional<Decimal> min_inclusive;
  std::optional<Decimal> max_inclusive;
  std::optional<std::string> name;
  std::optional<std::string> description;
};

struct NodeShape {
  rdf::Term shape;
  rdf::Term target_class;
  std::vector<PropertyShape> properties;
  std::vector<PropertyShape> and_constraints;
};

enum class Constraint { Datatype, MinCount, MaxCount, MinInclusive, MaxInclusive };

std::string_view to_string(Constraint c);

struct Violation {
  rdf::Term focus_node;
  rdf::Term path;
  Constraint constraint = Constraint::MinCount;
  std::string actual;
  std::string message;

  friend auto operator<=>(const Violation&, const Violation&) = default;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  bool conforms = true;
  std::vector<Violation> violations; // sorted by focus node, path, constraint

  std::size_t count(Constraint c) const;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

class CycleError : public Error {
public:
  using Error::Error;
};

/// Every sh:NodeShape subject becomes a NodeShape, ordered by shape IRI.
std::vector<NodeShape> parse_shapes(const rdf::Graph& shapes_graph);

/// Nodes typed with the target class or any transitive subclass of it, per
/// the rdfs:subClassOf triples in `class_hierarchy`. Types are not inferred.
std::vector<rdf::Term> target_nodes(const rdf::Graph& data_graph, const NodeShape& shape,
                                    const rdf::Graph& class_hierarchy);

/// Checks every shape against every target node and collects all violations.
ValidationReport validate(const rdf::Graph& data_graph, const std::vector<NodeShape>& shapes,
                          const rdf::Graph& class_hierarchy);

/// Parsed shapes together with the class hierarchy declared next to them.
struct ShapeSet {
  std::vector<NodeShape> shapes;
  rdf::Graph hierarchy;

  static ShapeSet from_graph(const rdf::Graph& shapes_graph);
  static ShapeSet load(const std::string& path);
};

/// Validates with the set's hierarchy plus any rdfs:subClassOf in the data.
ValidationReport validate(const rdf::Graph& data_graph, const ShapeSet& shapes);

std::string report_json(const ValidationReport& report);
std::string report_table(const ValidationReport& report);

} // namespace cpes::shacl
