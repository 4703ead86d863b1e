#include "cpes/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <variant>

#include <json.hpp>

#include "cpes/vocab.hpp"

namespace cpes::grid {

using rdf::Term;
using json = nlohmann::ordered_json;

namespace {

template <class R>
using Member = std::variant<double R::*, ElementId R::*, std::string R::*, bool R::*>;

template <class R>
struct Field {
  std::string_view name;      // json column and errol predicate for literal fields
  std::string_view predicate; // errol predicate
  Member<R> member;
  bool bus_ref = false;
  bool optional_in_json = false;
};

template <class R>
struct Table {
  std::string_view name;
  std::string_view cls;
  std::vector<R> GridTables::*rows;
  std::vector<Field<R>> fields;
};

auto table_defs() {
  return std::make_tuple(
      Table<BusRecord>{"bus", "Bus", &GridTables::bus,
                       {{"id", "id", &BusRecord::id},
                        {"name", "name", &BusRecord::name, false, true},
                        {"vn_kv", "vn_kv", &BusRecord::vn_kv}}},
      Table<LineRecord>{"line", "Line", &GridTables::line,
                        {{"id", "id", &LineRecord::id},
                         {"from_bus", "fromBus", &LineRecord::from_bus, true},
                         {"to_bus", "toBus", &LineRecord::to_bus, true},
                         {"r_ohm_per_km", "r_ohm_per_km", &LineRecord::r_ohm_per_km},
                         {"x_ohm_per_km", "x_ohm_per_km", &LineRecord::x_ohm_per_km},
                         {"length_km", "length_km", &LineRecord::length_km},
                         {"max_i_ka", "max_i_ka", &LineRecord::max_i_ka}}},
      Table<TrafoRecord>{"trafo", "Transformer", &GridTables::trafo,
                         {{"id", "id", &TrafoRecord::id},
                          {"hv_bus", "hvBus", &TrafoRecord::hv_bus, true},
                          {"lv_bus", "lvBus", &TrafoRecord::lv_bus, true},
                          {"sn_mva", "sn_mva", &TrafoRecord::sn_mva},
                          {"vn_hv_kv", "vn_hv_kv", &TrafoRecord::vn_hv_kv},
                          {"vn_lv_kv", "vn_lv_kv", &TrafoRecord::vn_lv_kv},
                          {"vk_percent", "vk_percent", &TrafoRecord::vk_percent},
                          {"vkr_percent", "vkr_percent", &TrafoRecord::vkr_percent}}},
      Table<LoadRecord>{"load", "Load", &GridTables::load,
                        {{"id", "id", &LoadRecord::id},
                         {"bus", "connectedTo", &LoadRecord::bus, true},
                         {"p_mw", "p_mw", &LoadRecord::p_mw},
                         {"q_mvar", "q_mvar", &LoadRecord::q_mvar, false, true},
                         {"type", "type", &LoadRecord::type},
                         {"controllable", "controllable", &LoadRecord::controllable, false, true},
                         {"max_p_mw", "max_p_mw", &LoadRecord::max_p_mw, false, true},
                         {"min_p_mw", "min_p_mw", &LoadRecord::min_p_mw, false, true}}},
      Table<SgenRecord>{"sgen", "StaticGenerator", &GridTables::sgen,
                        {{"id", "id", &SgenRecord::id},
                         {"bus", "connectedTo", &SgenRecord::bus, true},
                         {"p_mw", "p_mw", &SgenRecord::p_mw},
                         {"q_mvar", "q_mvar", &SgenRecord::q_mvar, false, true},
                         {"type", "type", &SgenRecord::type},
                         {"controllable", "controllable", &SgenRecord::controllable, false, true},
                         {"max_p_mw", "max_p_mw", &SgenRecord::max_p_mw, false, true},
                         {"min_p_mw", "min_p_mw", &SgenRecord::min_p_mw, false, true}}},
      Table<StorageRecord>{"storage", "Storage", &GridTables::storage,
                           {{"id", "id", &StorageRecord::id},
                            {"bus", "connectedTo", &StorageRecord::bus, true},
                            {"p_mw", "p_mw", &StorageRecord::p_mw},
                            {"q_mvar", "q_mvar", &StorageRecord::q_mvar, false, true},
                            {"controllable", "controllable", &StorageRecord::controllable, false, true},
                            {"max_p_mw", "max_p_mw", &StorageRecord::max_p_mw, false, true},
                            {"min_p_mw", "min_p_mw", &StorageRecord::min_p_mw, false, true},
                            {"soc_percent", "soc_percent", &StorageRecord::soc_percent, false, true}}},
      Table<ExtGridRecord>{"ext_grid", "ExternalGrid", &GridTables::ext_grid,
                           {{"id", "id", &ExtGridRecord::id},
                            {"bus", "connectedTo", &ExtGridRecord::bus, true},
                            {"vm_pu", "vm_pu", &ExtGridRecord::vm_pu, false, true},
                            {"va_deg", "va_deg", &ExtGridRecord::va_deg, false, true}}});
}

template <class F>
void for_each_table(F&& f) {
  static const auto defs = table_defs();
  std::apply([&](const auto&... t) { (f(t), ...); }, defs);
}

template <class R>
void sort_rows(std::vector<R>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const R& a, const R& b) { return a.id < b.id; });
}

std::string fmt(double v) { return Decimal::format(v); }

} // namespace

void GridTables::sort_by_id() {
  sort_rows(bus);
  sort_rows(line);
  sort_rows(trafo);
  sort_rows(load);
  sort_rows(sgen);
  sort_rows(storage);
  sort_rows(ext_grid);
}

const BusRecord* GridTables::find_bus(ElementId id) const {
  for (const auto& b : bus)
    if (b.id == id) return &b;
  return nullptr;
}

RefError::RefError(std::string element, ElementId bus)
    : GridError(element + " references missing bus " + std::to_string(bus)), bus_(bus) {}

namespace {
std::string join_problems(const std::vector<std::string>& problems) {
  std::string msg = "graph cannot be exported:";
  for (const auto& p : problems) msg += "\n  " + p;
  return msg;
}
} // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error(join_problems(problems)), problems_(std::move(problems)) {}

Term element_iri(std::string_view table, ElementId id) {
  return vocab::errol(std::string(table) + "_" + std::to_string(id));
}

void check_references(const GridTables& t) {
  std::set<ElementId> buses;
  for (const auto& b : t.bus) buses.insert(b.id);
  for_each_table([&](const auto& table) {
    using R = typename std::remove_cvref_t<decltype(t.*(table.rows))>::value_type;
    for (const auto& row : t.*(table.rows))
      for (const auto& f : table.fields)
        if (f.bus_ref) {
          ElementId bus = row.*std::get<ElementId R::*>(f.member);
          if (!buses.contains(bus))
            throw RefError(std::string(table.name) + " " + std::to_string(row.id), bus);
        }
  });
}

std::vector<std::string> invariant_violations(const GridTables& t) {
  std::vector<std::string> out;
  auto bad = [&](std::string_view table, ElementId id, const std::string& what) {
    out.push_back(std::string(table) + " " + std::to_string(id) + ": " + what);
  };
  for_each_table([&](const auto& table) {
    using R = typename std::remove_cvref_t<decltype(t.*(table.rows))>::value_type;
    std::set<ElementId> ids;
    for (const auto& row : t.*(table.rows)) {
      if (!ids.insert(row.id).second) bad(table.name, row.id, "duplicate id");
      for (const auto& f : table.fields) {
        if (auto m = std::get_if<double R::*>(&f.member); m && !std::isfinite(row.**m))
          bad(table.name, row.id, std::string(f.name) + " is not finite");
      }
    }
  });
  try {
    check_references(t);
  } catch (const RefError& e) {
    out.push_back(e.what());
  }
  for (const auto& b : t.bus)
    if (!(b.vn_kv > 0)) bad("bus", b.id, "vn_kv must be positive");
  for (const auto& l : t.line) {
    if (!(l.length_km > 0)) bad("line", l.id, "length_km must be positive");
    if (l.r_ohm_per_km < 0 || l.x_ohm_per_km < 0 || !(l.r_ohm_per_km > 0 || l.x_ohm_per_km > 0))
      bad("line", l.id, "needs non-negative r/x with r > 0 or x > 0");
    if (!(l.max_i_ka > 0)) bad("line", l.id, "max_i_ka must be positive");
    if (l.from_bus == l.to_bus) bad("line", l.id, "from_bus equals to_bus");
  }
  for (const auto& tr : t.trafo) {
    if (!(tr.sn_mva > 0)) bad("trafo", tr.id, "sn_mva must be positive");
    if (!(tr.vkr_percent >= 0 && tr.vkr_percent <= tr.vk_percent && tr.vk_percent > 0))
      bad("trafo", tr.id, "requires 0 <= vkr_percent <= vk_percent and vk_percent > 0");
    if (!(tr.vn_hv_kv > tr.vn_lv_kv && tr.vn_lv_kv > 0)) bad("trafo", tr.id, "requires vn_hv_kv > vn_lv_kv > 0");
    if (tr.hv_bus == tr.lv_bus) bad("trafo", tr.id, "hv_bus equals lv_bus");
  }
  static const std::set<std::string> load_types = {"household", "commercial", "heatpump", "ev"};
  for (const auto& l : t.load) {
    if (!load_types.contains(l.type)) bad("load", l.id, "unknown type '" + l.type + "'");
    if (l.p_mw < 0) bad("load", l.id, "p_mw must be >= 0 (consumption)");
    if (l.controllable && !(l.min_p_mw <= l.p_mw && l.p_mw <= l.max_p_mw))
      bad("load", l.id, "requires min_p_mw <= p_mw <= max_p_mw");
  }
  for (const auto& s : t.sgen) {
    if (s.p_mw > 0) bad("sgen", s.id, "p_mw must be <= 0 (production)");
    if (!(s.min_p_mw <= s.p_mw && s.p_mw <= s.max_p_mw && s.max_p_mw <= 0))
      bad("sgen", s.id, "requires min_p_mw <= p_mw <= max_p_mw <= 0");
  }
  for (const auto& s : t.storage) {
    if (!(s.max_p_mw > 0 && s.min_p_mw < 0)) bad("storage", s.id, "requires max_p_mw > 0 > min_p_mw");
    if (!(s.min_p_mw <= s.p_mw && s.p_mw <= s.max_p_mw)) bad("storage", s.id, "requires min_p_mw <= p_mw <= max_p_mw");
  }
  for (const auto& e : t.ext_grid)
    if (!(e.vm_pu > 0)) bad("ext_grid", e.id, "vm_pu must be positive");
  if (t.ext_grid.empty()) out.push_back("at least one ext_grid is required");
  return out;
}

void validate_tables(const GridTables& t) {
  auto problems = invariant_violations(t);
  if (problems.empty()) return;
  std::string msg = "invalid grid tables:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw GridError(msg);
}

rdf::Graph import_grid(const GridTables& t) {
  check_references(t);
  rdf::Graph g;
  for_each_table([&](const auto& table) {
    for (const auto& row : t.*(table.rows)) {
      Term node = element_iri(table.name, row.id);
      g.insert(node, vocab::type(), vocab::errol(table.cls));
      for (const auto& f : table.fields) {
        Term pred = vocab::errol(f.predicate);
        std::visit(
            [&](auto member) {
              using V = std::remove_cvref_t<decltype(row.*member)>;
              const V& v = row.*member;
              if constexpr (std::is_same_v<V, double>) {
                g.insert(node, pred, Term::literal(fmt(v), rdf::Datatype::Decimal));
              } else if constexpr (std::is_same_v<V, ElementId>) {
                g.insert(node, pred, f.bus_ref ? element_iri("bus", v) : Term::integer(v));
              } else if constexpr (std::is_same_v<V, std::string>) {
                g.insert(node, pred, Term::string(v));
              } else {
                g.insert(node, pred, Term::boolean(v));
              }
            },
            f.member);
      }
    }
  });
  return g;
}

GridTables export_grid(const rdf::Graph& g) {
  GridTables t;
  std::vector<std::string> problems;

  // Bus IRIs resolve to the bus's errol:id.
  std::map<Term, ElementId> bus_ids;
  for (const auto& bus : g.subjects(vocab::type(), vocab::errol("Bus"))) {
    auto ids = g.objects(bus, vocab::errol("id"));
    if (ids.size() == 1 && ids.front().as_integer()) bus_ids[bus] = *ids.front().as_integer();
  }

  for_each_table([&](const auto& table) {
    for (const auto& node : g.subjects(vocab::type(), vocab::errol(table.cls))) {
      std::remove_cvref_t<decltype((t.*(table.rows)).front())> row{};
      bool ok = true;
      for (const auto& f : table.fields) {
        Term pred = vocab::errol(f.predicate);
        auto values = g.objects(node, pred);
        std::string where = node.value() + " errol:" + std::string(f.predicate);
        if (values.size() != 1) {
          problems.push_back(where + (values.empty() ? " is missing" : " has multiple values"));
          ok = false;
          continue;
        }
        const Term& v = values.front();
        std::visit(
            [&](auto member) {
              using V = std::remove_cvref_t<decltype(row.*member)>;
              if constexpr (std::is_same_v<V, double>) {
                if (auto d = v.as_double()) row.*member = *d;
                else problems.push_back(where + " is not numeric"), ok = false;
              } else if constexpr (std::is_same_v<V, ElementId>) {
                if (f.bus_ref) {
                  auto it = bus_ids.find(v);
                  if (it != bus_ids.end()) row.*member = it->second;
                  else problems.push_back(where + " does not reference a bus"), ok = false;
                } else if (auto n = v.as_integer()) {
                  row.*member = *n;
                } else {
                  problems.push_back(where + " is not an integer"), ok = false;
                }
              } else if constexpr (std::is_same_v<V, std::string>) {
                if (v.is_literal() && v.datatype() == rdf::Datatype::String) row.*member = v.value();
                else problems.push_back(where + " is not a string"), ok = false;
              } else {
                if (auto b = v.as_boolean()) row.*member = *b;
                else problems.push_back(where + " is not a boolean"), ok = false;
              }
            },
            f.member);
      }
      if (ok) (t.*(table.rows)).push_back(std::move(row));
    }
  });
  if (!problems.empty()) throw ValidationError(std::move(problems));
  t.sort_by_id();
  return t;
}

GridTables tables_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw GridError(std::string("grid.json: ") + e.what());
  }
  if (!doc.is_object()) throw GridError("grid.json: top level must be an object");
  std::string convention = doc.value("sgen_sign_convention", std::string("load"));
  if (convention != "load" && convention != "generator")
    throw GridError("grid.json: sgen_sign_convention must be 'load' or 'generator'");

  GridTables t;
  for_each_table([&](const auto& table) {
    if (!doc.contains(table.name)) return;
    const json& rows = doc.at(std::string(table.name));
    if (!rows.is_array()) throw GridError("grid.json: '" + std::string(table.name) + "' must be an array");
    for (const json& r : rows) {
      std::remove_cvref_t<decltype((t.*(table.rows)).front())> row{};
      std::set<std::string_view> present;
      for (const auto& f : table.fields) {
        std::string key(f.name);
        if (!r.contains(key)) {
          if (!f.optional_in_json)
            throw GridError("grid.json: " + std::string(table.name) + " row lacks '" + key + "'");
          continue;
        }
        present.insert(f.name);
        const json& v = r.at(key);
        try {
          std::visit([&](auto member) { row.*member = v.get<std::remove_cvref_t<decltype(row.*member)>>(); },
                     f.member);
        } catch (const json::exception& e) {
          throw GridError("grid.json: " + std::string(table.name) + "." + key + ": " + e.what());
        }
      }
      using R = std::remove_cvref_t<decltype(row)>;
      if constexpr (std::is_same_v<R, LoadRecord>) {
        if (!present.contains("max_p_mw")) row.max_p_mw = row.p_mw;
        if (!present.contains("min_p_mw")) row.min_p_mw = 0.0;
      } else if constexpr (std::is_same_v<R, SgenRecord>) {
        if (convention == "generator") {
          row.p_mw = -row.p_mw;
          row.q_mvar = -row.q_mvar;
          double lo = -row.max_p_mw, hi = -row.min_p_mw;
          if (present.contains("max_p_mw")) row.min_p_mw = lo;
          if (present.contains("min_p_mw")) row.max_p_mw = hi;
          if (!present.contains("max_p_mw")) row.min_p_mw = row.p_mw;
          if (!present.contains("min_p_mw")) row.max_p_mw = 0.0;
        } else {
          if (!present.contains("min_p_mw")) row.min_p_mw = row.p_mw;
          if (!present.contains("max_p_mw")) row.max_p_mw = 0.0;
        }
      } else if constexpr (std::is_same_v<R, StorageRecord>) {
        if (!present.contains("max_p_mw") || !present.contains("min_p_mw")) {
          double rated = 0.0;
          if (r.contains("sn_mva")) rated = r.at("sn_mva").get<double>();
          else if (present.contains("max_p_mw")) rated = row.max_p_mw;
          else throw GridError("grid.json: storage " + std::to_string(row.id) + " needs max_p_mw or sn_mva");
          if (!present.contains("max_p_mw")) row.max_p_mw = rated;
          if (!present.contains("min_p_mw")) row.min_p_mw = -rated;
        }
        if (!present.contains("soc_percent")) row.soc_percent = 50.0;
      } else if constexpr (std::is_same_v<R, ExtGridRecord>) {
        if (!present.contains("vm_pu")) row.vm_pu = 1.0;
      }
      (t.*(table.rows)).push_back(std::move(row));
    }
  });
  t.sort_by_id();
  return t;
}

std::string tables_to_json(const GridTables& input) {
  GridTables t = input;
  t.sort_by_id();
  json doc = json::object();
  for_each_table([&](const auto& table) {
    json rows = json::array();
    for (const auto& row : t.*(table.rows)) {
      json r = json::object();
      for (const auto& f : table.fields)
        std::visit([&](auto member) { r[std::string(f.name)] = row.*member; }, f.member);
      rows.push_back(std::move(r));
    }
    doc[std::string(table.name)] = std::move(rows);
  });
  return doc.dump(2) + "\n";
}

GridTables load_tables(const std::string& path) { return tables_from_json(rdf::read_text_file(path)); }

void save_tables(const std::string& path, const GridTables& tables) {
  rdf::write_text_file(path, tables_to_json(tables));
}

} // namespace cpes::grid
