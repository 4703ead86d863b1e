#include "cpes/impact.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cpes/decimal.hpp"

namespace cpes::impact {

double ImpactReport::max_abs_delta_mw() const {
  double m = 0.0;
  for (const auto& t : trafos) m = std::max(m, std::abs(t.delta_p_mw));
  return m;
}

namespace {

std::map<ElementId, const powerflow::TrafoResult*> trafo_index(const powerflow::PowerFlowResult& r) {
  std::map<ElementId, const powerflow::TrafoResult*> out;
  for (const auto& t : r.trafo) out[t.id] = &t;
  return out;
}

std::set<ElementId> keys(const std::map<ElementId, const powerflow::TrafoResult*>& m) {
  std::set<ElementId> out;
  for (const auto& [id, _] : m) out.insert(id);
  return out;
}

} // namespace

ImpactReport compare(const powerflow::PowerFlowResult& baseline, const powerflow::PowerFlowResult& attacked,
                     const grid::GridTables& tables, const std::string& label, const Limits& limits) {
  if (!baseline.converged || !attacked.converged) throw Error("compare needs two converged power flow results");
  auto base = trafo_index(baseline);
  auto att = trafo_index(attacked);
  std::set<ElementId> declared;
  for (const auto& t : tables.trafo) declared.insert(t.id);
  if (keys(base) != keys(att) || keys(base) != declared)
    throw TopologyMismatch("transformer sets of the baseline, attacked result and grid differ");

  ImpactReport report;
  report.label = label;
  for (const auto& [id, b] : base) {
    const auto* a = att.at(id);
    report.trafos.push_back({id, b->p_hv_mw, a->p_hv_mw, a->p_hv_mw - b->p_hv_mw, a->loading_percent});
  }
  report.violations = check_limits(attacked, tables, limits);
  return report;
}

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw Error("quantile of an empty sample");
  const double n = static_cast<double>(sorted.size());
  double h = std::clamp((n + 1.0) * p, 1.0, n);
  auto lo = static_cast<std::size_t>(std::floor(h));
  double frac = h - static_cast<double>(lo);
  if (lo >= sorted.size()) return sorted.back();
  return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

VoltageStats voltage_stats(const powerflow::PowerFlowResult& result, const grid::GridTables& tables) {
  std::map<double, std::vector<double>, std::greater<>> groups;
  for (const auto& b : result.bus) {
    const auto* rec = tables.find_bus(b.id);
    groups[rec ? rec->vn_kv : b.vn_kv].push_back(b.vm_pu);
  }
  VoltageStats out;
  for (auto& [vn, values] : groups) {
    std::sort(values.begin(), values.end());
    out.levels.push_back({vn, values.size(), values.front(), quantile(values, 0.25), quantile(values, 0.5),
                          quantile(values, 0.75), values.back()});
  }
  return out;
}

std::vector<Violation> check_limits(const powerflow::PowerFlowResult& result, const grid::GridTables&,
                                    const Limits& limits) {
  std::vector<Violation> out;
  for (const auto& b : result.bus) {
    if (b.vm_pu < limits.vm_min_pu) out.push_back({"bus", b.id, "vm_pu", b.vm_pu, limits.vm_min_pu});
    if (b.vm_pu > limits.vm_max_pu) out.push_back({"bus", b.id, "vm_pu", b.vm_pu, limits.vm_max_pu});
  }
  for (const auto& l : result.line)
    if (l.loading_percent > limits.loading_max_percent)
      out.push_back({"line", l.id, "loading_percent", l.loading_percent, limits.loading_max_percent});
  for (const auto& t : result.trafo)
    if (t.loading_percent > limits.loading_max_percent)
      out.push_back({"trafo", t.id, "loading_percent", t.loading_percent, limits.loading_max_percent});
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

} // namespace

std::string reports_csv(const std::vector<ImpactReport>& reports) {
  std::string out = "scenario,trafo_id,p_baseline_mw,p_attacked_mw,delta_p_mw,loading_percent_attacked\n";
  for (const auto& r : reports)
    for (const auto& t : r.trafos) {
      out += csv_field(r.label) + ',' + std::to_string(t.trafo_id) + ',' + Decimal::format(t.p_baseline_mw) + ',' +
             Decimal::format(t.p_attacked_mw) + ',' + Decimal::format(t.delta_p_mw) + ',' +
             Decimal::format(t.loading_percent_attacked) + '\n';
    }
  return out;
}

std::string reports_json(const std::vector<ImpactReport>& reports, const std::vector<VoltageStats>& stats) {
  using json = nlohmann::ordered_json;
  json out = json::array();
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    json jr;
    jr["scenario"] = r.label;
    jr["max_abs_delta_p_mw"] = r.max_abs_delta_mw();
    json trafos = json::array();
    for (const auto& t : r.trafos)
      trafos.push_back({{"trafo_id", t.trafo_id}, {"p_baseline_mw", t.p_baseline_mw},
                        {"p_attacked_mw", t.p_attacked_mw}, {"delta_p_mw", t.delta_p_mw},
                        {"loading_percent_attacked", t.loading_percent_attacked}});
    jr["trafos"] = std::move(trafos);
    json violations = json::array();
    for (const auto& v : r.violations)
      violations.push_back({{"element", v.element}, {"id", v.id}, {"quantity", v.quantity}, {"value", v.value},
                            {"limit", v.limit}});
    jr["violations"] = std::move(violations);
    if (k < stats.size()) {
      json levels = json::array();
      for (const auto& l : stats[k].levels)
        levels.push_back({{"vn_kv", l.vn_kv}, {"count", l.count}, {"min", l.min}, {"q1", l.q1},
                          {"median", l.median}, {"q3", l.q3}, {"max", l.max}});
      jr["voltage_stats"] = std::move(levels);
    }
    out.push_back(std::move(jr));
  }
  return out.dump(2) + "\n";
}

std::string summary_table(const std::vector<ImpactReport>& reports) {
  std::size_t width = 8;
  for (const auto& r : reports) width = std::max(width, r.label.size());
  std::ostringstream s;
  s << std::left << std::setw(static_cast<int>(width)) << "scenario" << "  " << std::right << std::setw(16)
    << "max |dP| [MW]" << "  " << std::setw(10) << "violations" << '\n';
  std::size_t total = 0;
  for (const auto& r : reports) {
    s << std::left << std::setw(static_cast<int>(width)) << r.label << "  " << std::right << std::setw(16)
      << std::fixed << std::setprecision(6) << r.max_abs_delta_mw() << "  " << std::setw(10) << r.violations.size()
      << '\n';
    total += r.violations.size();
  }
  if (total == 0) s << "no problematic grid states\n";
  else s << total << " limit violations\n";
  return s.str();
}

} // namespace cpes::impact
