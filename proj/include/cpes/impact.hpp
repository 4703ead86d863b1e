#pragma once

#include <string>
#include <vector>

#include "cpes/grid.hpp"
#include "cpes/powerflow.hpp"

namespace cpes::impact {

using grid::ElementId;

struct TrafoDelta {
  ElementId trafo_id = 0;
  double p_baseline_mw = 0.0; // hv side
  double p_attacked_mw = 0.0;
  double delta_p_mw = 0.0; // attacked - baseline
  double loading_percent_attacked = 0.0;
};

struct Violation {
  std::string element; // "bus", "line" or "trafo"
  ElementId id = 0;
  std::string quantity; // "vm_pu" or "loading_percent"
  double value = 0.0;
  double limit = 0.0;
};

struct ImpactReport {
  std::string label;
  std::vector<TrafoDelta> trafos; // ordered by trafo id
  std::vector<Violation> violations;

  double max_abs_delta_mw() const;
};

struct Limits {
  double vm_min_pu = 0.9;
  double vm_max_pu = 1.1;
  double loading_max_percent = 100.0;
};

struct LevelStats {
  double vn_kv = 0.0;
  std::size_t count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct VoltageStats {
  std::vector<LevelStats> levels; // ordered by vn_kv, highest first
};

class TopologyMismatch : public Error {
public:
  using Error::Error;
};

/// Per-transformer hv-side active power difference. The attacked result's
/// limit violations are attached.
ImpactReport compare(const powerflow::PowerFlowResult& baseline, const powerflow::PowerFlowResult& attacked,
                     const grid::GridTables& tables, const std::string& label, const Limits& limits = {});

/// Quantile of sorted data using linear interpolation on rank h = (n+1)p,
/// clamped to the first and last observation.
double quantile(const std::vector<double>& sorted, double p);

VoltageStats voltage_stats(const powerflow::PowerFlowResult& result, const grid::GridTables& tables);

std::vector<Violation> check_limits(const powerflow::PowerFlowResult& result, const grid::GridTables& tables,
                                    const Limits& limits = {});

/// One row per transformer per report.
std::string reports_csv(const std::vector<ImpactReport>& reports);
std::string reports_json(const std::vector<ImpactReport>& reports,
                         const std::vector<VoltageStats>& stats = {});
/// Human-readable summary: max delta and violation count per scenario.
std::string summary_table(const std::vector<ImpactReport>& reports);

} // namespace cpes::impact
