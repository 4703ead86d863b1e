#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cpes/rdf.hpp"

// Tabular power-system model and its lossless mapping to the knowledge graph.
//
// Sign convention is the load reference frame throughout: consumption is
// positive, production negative. grid.json may declare
// "sgen_sign_convention": "generator", in which case static generator powers
// and bounds are negated on read.
namespace cpes::grid {

using ElementId = std::int64_t;

struct BusRecord {
  ElementId id = 0;
  std::string name;
  double vn_kv = 0.0;

  friend bool operator==(const BusRecord&, const BusRecord&) = default;
};

struct LineRecord {
  ElementId id = 0;
  ElementId from_bus = 0;
  ElementId to_bus = 0;
  double r_ohm_per_km = 0.0;
  double x_ohm_per_km = 0.0;
  double length_km = 0.0;
  double max_i_ka = 0.0;

  friend bool operator==(const LineRecord&, const LineRecord&) = default;
};

struct TrafoRecord {
  ElementId id = 0;
  ElementId hv_bus = 0;
  ElementId lv_bus = 0;
  double sn_mva = 0.0;
  double vn_hv_kv = 0.0;
  double vn_lv_kv = 0.0;
  double vk_percent = 0.0;
  double vkr_percent = 0.0;

  friend bool operator==(const TrafoRecord&, const TrafoRecord&) = default;
};

// type is one of household, commercial, heatpump, ev.
struct LoadRecord {
  ElementId id = 0;
  ElementId bus = 0;
  double p_mw = 0.0;
  double q_mvar = 0.0;
  std::string type;
  bool controllable = false;
  double max_p_mw = 0.0;
  double min_p_mw = 0.0;

  friend bool operator==(const LoadRecord&, const LoadRecord&) = default;
};

struct SgenRecord {
  ElementId id = 0;
  ElementId bus = 0;
  double p_mw = 0.0;
  double q_mvar = 0.0;
  std::string type;
  bool controllable = false;
  double max_p_mw = 0.0;
  double min_p_mw = 0.0;

  friend bool operator==(const SgenRecord&, const SgenRecord&) = default;
};

struct StorageRecord {
  ElementId id = 0;
  ElementId bus = 0;
  double p_mw = 0.0; // positive while charging
  double q_mvar = 0.0;
  bool controllable = false;
  double max_p_mw = 0.0;
  double min_p_mw = 0.0;
  double soc_percent = 0.0;

  friend bool operator==(const StorageRecord&, const StorageRecord&) = default;
};

struct ExtGridRecord {
  ElementId id = 0;
  ElementId bus = 0;
  double vm_pu = 1.0;
  double va_deg = 0.0;

  friend bool operator==(const ExtGridRecord&, const ExtGridRecord&) = default;
};

struct GridTables {
  std::vector<BusRecord> bus;
  std::vector<LineRecord> line;
  std::vector<TrafoRecord> trafo;
  std::vector<LoadRecord> load;
  std::vector<SgenRecord> sgen;
  std::vector<StorageRecord> storage;
  std::vector<ExtGridRecord> ext_grid;

  void sort_by_id();
  const BusRecord* find_bus(ElementId id) const;

  friend bool operator==(const GridTables&, const GridTables&) = default;
};

class GridError : public Error {
public:
  using Error::Error;
};

/// An element references a bus id absent from the bus table.
class RefError : public GridError {
public:
  RefError(std::string element, ElementId bus);
  ElementId bus() const { return bus_; }

private:
  ElementId bus_;
};

/// The graph lacks properties needed to rebuild the tables.
class ValidationError : public Error {
public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

private:
  std::vector<std::string> problems_;
};

/// Every record invariant that does not hold, as readable messages.
std::vector<std::string> invariant_violations(const GridTables& tables);
/// Throws GridError listing all invariant violations, if any.
void validate_tables(const GridTables& tables);
/// Throws RefError for the first dangling bus reference.
void check_references(const GridTables& tables);

/// IRI of a grid element, e.g. errol:bus_7. `table` is the grid.json table name.
rdf::Term element_iri(std::string_view table, ElementId id);

/// One typed node per record, literal-valued fields, bus references as
/// object properties. Throws RefError on dangling bus references.
rdf::Graph import_grid(const GridTables& tables);

/// Inverse of import_grid; other triples in the graph are ignored.
/// Throws ValidationError listing every missing or malformed property.
GridTables export_grid(const rdf::Graph& graph);

GridTables tables_from_json(std::string_view text);
std::string tables_to_json(const GridTables& tables);
GridTables load_tables(const std::string& path);
void save_tables(const std::string& path, const GridTables& tables);

} // namespace cpes::grid
