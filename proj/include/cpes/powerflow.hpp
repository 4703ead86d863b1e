#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "cpes/grid.hpp"

// Balanced AC power flow, Newton-Raphson in polar coordinates.
//
// Per-unit system: one S_base for the whole network, voltage base per bus
// from vn_kv. Line charging, transformer magnetizing branches and taps are
// not modelled. Every ext_grid bus is a slack bus; all other buses are PQ.
namespace cpes::powerflow {

using grid::ElementId;

struct Options {
  double tol = 1e-8; // per-unit power mismatch
  int max_iter = 30;
  double s_base_mva = 1.0;
};

class AdmittanceMatrix {
public:
  explicit AdmittanceMatrix(std::vector<ElementId> bus_ids);

  std::size_t size() const { return ids_.size(); }
  const std::vector<ElementId>& bus_ids() const { return ids_; }
  std::size_t index_of(ElementId bus) const;
  std::complex<double> at(std::size_t i, std::size_t j) const;
  void add(std::size_t i, std::size_t j, std::complex<double> y);
  /// Adds series admittance y between i and j.
  void add_branch(std::size_t i, std::size_t j, std::complex<double> y);
  /// Nonzero entries of row i, ordered by column.
  const std::map<std::size_t, std::complex<double>>& row(std::size_t i) const { return rows_[i]; }

private:
  std::vector<ElementId> ids_;
  std::map<ElementId, std::size_t> index_;
  std::vector<std::map<std::size_t, std::complex<double>>> rows_;
};

class SingularityError : public Error {
public:
  using Error::Error;
};

class NonConvergence : public Error {
public:
  NonConvergence(int iterations, double final_mismatch);
  int iterations() const { return iterations_; }
  double final_mismatch() const { return final_mismatch_; }

private:
  int iterations_;
  double final_mismatch_;
};

/// Series impedance of a line in per unit on the from-bus voltage base.
std::complex<double> line_impedance_pu(const grid::LineRecord& line, double vn_kv, double s_base_mva);
/// Series impedance of a transformer in per unit on the system base.
std::complex<double> trafo_impedance_pu(const grid::TrafoRecord& trafo, double s_base_mva);

/// Throws SingularityError if any island has no ext_grid.
AdmittanceMatrix build_ybus(const grid::GridTables& tables, double s_base_mva = 1.0);

struct BusResult {
  ElementId id = 0;
  double vn_kv = 0.0;
  double vm_pu = 0.0;
  double va_deg = 0.0;
  double p_mw = 0.0; // net consumption at the bus, load reference frame
  double q_mvar = 0.0;
};

struct LineResult {
  ElementId id = 0;
  double p_from_mw = 0.0, q_from_mvar = 0.0;
  double p_to_mw = 0.0, q_to_mvar = 0.0;
  double pl_mw = 0.0, ql_mvar = 0.0;
  double i_ka = 0.0;
  double loading_percent = 0.0;
};

struct TrafoResult {
  ElementId id = 0;
  double p_hv_mw = 0.0, q_hv_mvar = 0.0;
  double p_lv_mw = 0.0, q_lv_mvar = 0.0;
  double pl_mw = 0.0, ql_mvar = 0.0;
  double loading_percent = 0.0;
};

struct ExtGridResult {
  ElementId id = 0;
  double p_mw = 0.0; // power drawn from the external grid
  double q_mvar = 0.0;
};

struct PowerFlowResult {
  bool converged = false;
  int iterations = 0;
  double max_mismatch = 0.0; // per unit
  std::vector<BusResult> bus;
  std::vector<LineResult> line;
  std::vector<TrafoResult> trafo;
  std::vector<ExtGridResult> ext_grid;

  const BusResult* find_bus(ElementId id) const;
  const TrafoResult* find_trafo(ElementId id) const;
};

/// Throws SingularityError, NonConvergence, or GridError for invalid tables.
PowerFlowResult solve(const grid::GridTables& tables, const Options& options = {});

/// Specified complex injection per bus (order of build_ybus), per unit.
std::vector<std::complex<double>> specified_injections(const grid::GridTables& tables, const AdmittanceMatrix& y,
                                                       double s_base_mva);

std::string result_to_json(const PowerFlowResult& result);
PowerFlowResult result_from_json(const std::string& text);
PowerFlowResult load_result(const std::string& path);
void save_result(const std::string& path, const PowerFlowResult& result);

} // namespace cpes::powerflow
