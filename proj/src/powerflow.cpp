#include "cpes/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <json.hpp>

namespace cpes::powerflow {

using cd = std::complex<double>;

AdmittanceMatrix::AdmittanceMatrix(std::vector<ElementId> bus_ids) : ids_(std::move(bus_ids)), rows_(ids_.size()) {
  for (std::size_t i = 0; i < ids_.size(); ++i) index_[ids_[i]] = i;
}

std::size_t AdmittanceMatrix::index_of(ElementId bus) const {
  auto it = index_.find(bus);
  if (it == index_.end()) throw grid::GridError("bus " + std::to_string(bus) + " is not in the admittance matrix");
  return it->second;
}

cd AdmittanceMatrix::at(std::size_t i, std::size_t j) const {
  auto it = rows_[i].find(j);
  return it == rows_[i].end() ? cd{} : it->second;
}

void AdmittanceMatrix::add(std::size_t i, std::size_t j, cd y) { rows_[i][j] += y; }

void AdmittanceMatrix::add_branch(std::size_t i, std::size_t j, cd y) {
  add(i, i, y);
  add(j, j, y);
  add(i, j, -y);
  add(j, i, -y);
}

NonConvergence::NonConvergence(int iterations, double final_mismatch)
    : Error("power flow did not converge after " + std::to_string(iterations) +
            " iterations (max mismatch " + std::to_string(final_mismatch) + " pu)"),
      iterations_(iterations), final_mismatch_(final_mismatch) {}

cd line_impedance_pu(const grid::LineRecord& line, double vn_kv, double s_base_mva) {
  double z_base = vn_kv * vn_kv / s_base_mva;
  return cd{line.r_ohm_per_km * line.length_km, line.x_ohm_per_km * line.length_km} / z_base;
}

cd trafo_impedance_pu(const grid::TrafoRecord& t, double s_base_mva) {
  double scale = s_base_mva / t.sn_mva;
  double z = t.vk_percent / 100.0 * scale;
  double r = t.vkr_percent / 100.0 * scale;
  return {r, std::sqrt(std::max(0.0, z * z - r * r))};
}

namespace {

cd branch_admittance(cd z, const std::string& what) {
  if (std::abs(z) == 0.0) throw grid::GridError(what + " has zero impedance");
  return 1.0 / z;
}

std::vector<ElementId> sorted_bus_ids(const grid::GridTables& t) {
  std::vector<ElementId> ids;
  for (const auto& b : t.bus) ids.push_back(b.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Disjoint-set forest over bus indexes.
struct Islands {
  std::vector<std::size_t> parent;
  explicit Islands(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void join(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

void check_slacks(const grid::GridTables& t, const AdmittanceMatrix& y) {
  Islands isl(y.size());
  for (const auto& l : t.line) isl.join(y.index_of(l.from_bus), y.index_of(l.to_bus));
  for (const auto& tr : t.trafo) isl.join(y.index_of(tr.hv_bus), y.index_of(tr.lv_bus));
  std::vector<bool> has_slack(y.size(), false);
  for (const auto& e : t.ext_grid) has_slack[isl.find(y.index_of(e.bus))] = true;
  std::map<std::size_t, std::vector<ElementId>> orphaned;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!has_slack[isl.find(i)]) orphaned[isl.find(i)].push_back(y.bus_ids()[i]);
  if (orphaned.empty()) return;
  const auto& buses = orphaned.begin()->second;
  std::ostringstream msg;
  msg << "island without ext_grid (buses";
  for (std::size_t k = 0; k < buses.size() && k < 10; ++k) msg << ' ' << buses[k];
  if (buses.size() > 10) msg << " ... " << buses.size() << " total";
  msg << ')';
  throw SingularityError(msg.str());
}

double bus_vn(const grid::GridTables& t, ElementId id) {
  const auto* b = t.find_bus(id);
  if (!b) throw grid::RefError("bus lookup", id);
  return b->vn_kv;
}

} // namespace

AdmittanceMatrix build_ybus(const grid::GridTables& tables, double s_base_mva) {
  grid::check_references(tables);
  AdmittanceMatrix y(sorted_bus_ids(tables));
  for (const auto& l : tables.line) {
    cd ys = branch_admittance(line_impedance_pu(l, bus_vn(tables, l.from_bus), s_base_mva),
                              "line " + std::to_string(l.id));
    y.add_branch(y.index_of(l.from_bus), y.index_of(l.to_bus), ys);
  }
  for (const auto& t : tables.trafo) {
    cd ys = branch_admittance(trafo_impedance_pu(t, s_base_mva), "trafo " + std::to_string(t.id));
    y.add_branch(y.index_of(t.hv_bus), y.index_of(t.lv_bus), ys);
  }
  check_slacks(tables, y);
  return y;
}

std::vector<cd> specified_injections(const grid::GridTables& t, const AdmittanceMatrix& y, double s_base_mva) {
  std::vector<cd> s(y.size());
  auto consume = [&](ElementId bus, double p, double q) { s[y.index_of(bus)] -= cd{p, q} / s_base_mva; };
  for (const auto& e : t.load) consume(e.bus, e.p_mw, e.q_mvar);
  for (const auto& e : t.sgen) consume(e.bus, e.p_mw, e.q_mvar);
  for (const auto& e : t.storage) consume(e.bus, e.p_mw, e.q_mvar);
  return s;
}

namespace {

std::vector<cd> calculated_injections(const AdmittanceMatrix& y, const std::vector<cd>& v) {
  std::vector<cd> s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    cd current{};
    for (const auto& [j, yij] : y.row(i)) current += yij * v[j];
    s[i] = v[i] * std::conj(current);
  }
  return s;
}

struct Newton {
  const AdmittanceMatrix& y;
  const std::vector<cd>& spec;
  std::vector<bool> slack;
  std::vector<long> pos; // column of a PQ bus angle; voltage column = pos + npq
  long npq = 0;

  double mismatch(const std::vector<cd>& v, Eigen::VectorXd* f) const {
    auto s = calculated_injections(y, v);
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (slack[i]) continue;
      cd d = spec[i] - s[i];
      if (f) {
        (*f)(pos[i]) = d.real();
        (*f)(pos[i] + npq) = d.imag();
      }
      worst = std::max({worst, std::abs(d.real()), std::abs(d.imag())});
    }
    return worst;
  }

  // Jacobian of [P; Q] with respect to [theta; |V|] over PQ buses.
  Eigen::SparseMatrix<double> jacobian(const std::vector<cd>& v) const {
    auto s = calculated_injections(y, v);
    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (slack[i]) continue;
      double vi = std::abs(v[i]);
      double ti = std::arg(v[i]);
      double pi = s[i].real(), qi = s[i].imag();
      for (const auto& [k, yik] : y.row(i)) {
        double g = yik.real(), b = yik.imag();
        if (k == i) {
          entries.emplace_back(pos[i], pos[i], -qi - b * vi * vi);
          entries.emplace_back(pos[i], pos[i] + npq, pi / vi + g * vi);
          entries.emplace_back(pos[i] + npq, pos[i], pi - g * vi * vi);
          entries.emplace_back(pos[i] + npq, pos[i] + npq, qi / vi - b * vi);
          continue;
        }
        if (slack[k]) continue;
        double vk = std::abs(v[k]);
        double tik = ti - std::arg(v[k]);
        double c = std::cos(tik), sn = std::sin(tik);
        entries.emplace_back(pos[i], pos[k], vi * vk * (g * sn - b * c));
        entries.emplace_back(pos[i], pos[k] + npq, vi * (g * c + b * sn));
        entries.emplace_back(pos[i] + npq, pos[k], -vi * vk * (g * c + b * sn));
        entries.emplace_back(pos[i] + npq, pos[k] + npq, vi * (g * sn - b * c));
      }
    }
    Eigen::SparseMatrix<double> j(2 * npq, 2 * npq);
    j.setFromTriplets(entries.begin(), entries.end());
    return j;
  }
};

} // namespace

PowerFlowResult solve(const grid::GridTables& input, const Options& opt) {
  grid::GridTables t = input;
  t.sort_by_id();
  grid::validate_tables(t);
  if (t.ext_grid.empty()) throw SingularityError("no ext_grid: the network has no slack bus");
  if (!(opt.s_base_mva > 0.0) || !(opt.tol > 0.0) || opt.max_iter < 0)
    throw Error("invalid power flow options");

  AdmittanceMatrix y = build_ybus(t, opt.s_base_mva);
  auto spec = specified_injections(t, y, opt.s_base_mva);
  const std::size_t n = y.size();

  Newton nr{y, spec, std::vector<bool>(n, false), std::vector<long>(n, -1), 0};
  std::vector<cd> v(n);
  std::vector<cd> slack_v(n);
  for (const auto& e : t.ext_grid) {
    std::size_t i = y.index_of(e.bus);
    nr.slack[i] = true;
    slack_v[i] = std::polar(e.vm_pu, e.va_deg * std::numbers::pi / 180.0);
  }
  // Start every PQ bus at the voltage of its island's slack.
  {
    Islands isl(n);
    for (const auto& l : t.line) isl.join(y.index_of(l.from_bus), y.index_of(l.to_bus));
    for (const auto& tr : t.trafo) isl.join(y.index_of(tr.hv_bus), y.index_of(tr.lv_bus));
    std::map<std::size_t, cd> island_v;
    for (std::size_t i = 0; i < n; ++i)
      if (nr.slack[i]) island_v.emplace(isl.find(i), slack_v[i]);
    for (std::size_t i = 0; i < n; ++i) v[i] = nr.slack[i] ? slack_v[i] : island_v.at(isl.find(i));
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!nr.slack[i]) nr.pos[i] = nr.npq++;

  PowerFlowResult res;
  Eigen::VectorXd f(2 * nr.npq);
  int it = 0;
  double worst = nr.mismatch(v, &f);
  while (!(worst <= opt.tol)) {
    if (it >= opt.max_iter || !std::isfinite(worst)) throw NonConvergence(it, worst);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    auto jac = nr.jacobian(v);
    lu.compute(jac);
    if (lu.info() != Eigen::Success) throw NonConvergence(it, worst);
    Eigen::VectorXd dx = lu.solve(f);
    if (lu.info() != Eigen::Success || !dx.allFinite()) throw NonConvergence(it, worst);
    for (std::size_t i = 0; i < n; ++i) {
      if (nr.slack[i]) continue;
      double theta = std::arg(v[i]) + dx(nr.pos[i]);
      double mag = std::abs(v[i]) + dx(nr.pos[i] + nr.npq);
      v[i] = std::polar(mag, theta);
      if (!(mag > 0.0)) throw NonConvergence(it + 1, worst);
    }
    ++it;
    worst = nr.mismatch(v, &f);
  }
  res.converged = true;
  res.iterations = it;
  res.max_mismatch = worst;

  const double sb = opt.s_base_mva;
  auto s_calc = calculated_injections(y, v);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* b = t.find_bus(y.bus_ids()[i]);
    res.bus.push_back({b->id, b->vn_kv, std::abs(v[i]), std::arg(v[i]) * 180.0 / std::numbers::pi,
                       -s_calc[i].real() * sb, -s_calc[i].imag() * sb});
  }
  auto flows = [&](std::size_t a, std::size_t b, cd ys) {
    cd current = ys * (v[a] - v[b]);
    cd sa = v[a] * std::conj(current) * sb;
    cd sbb = v[b] * std::conj(-current) * sb;
    return std::tuple{current, sa, sbb};
  };
  for (const auto& l : t.line) {
    std::size_t a = y.index_of(l.from_bus), b = y.index_of(l.to_bus);
    double vn = bus_vn(t, l.from_bus);
    auto [current, sa, sbb] = flows(a, b, 1.0 / line_impedance_pu(l, vn, sb));
    double i_base_ka = sb / (std::sqrt(3.0) * vn);
    LineResult r{l.id, sa.real(), sa.imag(), sbb.real(), sbb.imag(), (sa + sbb).real(), (sa + sbb).imag(),
                 std::abs(current) * i_base_ka, 0.0};
    r.loading_percent = l.max_i_ka > 0.0 ? r.i_ka / l.max_i_ka * 100.0 : 0.0;
    res.line.push_back(r);
  }
  for (const auto& tr : t.trafo) {
    std::size_t a = y.index_of(tr.hv_bus), b = y.index_of(tr.lv_bus);
    auto [current, sa, sbb] = flows(a, b, 1.0 / trafo_impedance_pu(tr, sb));
    (void)current;
    TrafoResult r{tr.id, sa.real(), sa.imag(), sbb.real(), sbb.imag(), (sa + sbb).real(), (sa + sbb).imag(),
                  std::abs(sa) / tr.sn_mva * 100.0};
    res.trafo.push_back(r);
  }
  // Slack power at a bus is the calculated injection plus local consumption,
  // shared evenly when several ext_grids sit on one bus.
  std::map<std::size_t, int> per_bus;
  for (const auto& e : t.ext_grid) ++per_bus[y.index_of(e.bus)];
  for (const auto& e : t.ext_grid) {
    std::size_t i = y.index_of(e.bus);
    cd supplied = (s_calc[i] - spec[i]) * sb / static_cast<double>(per_bus[i]);
    res.ext_grid.push_back({e.id, supplied.real(), supplied.imag()});
  }
  return res;
}

const BusResult* PowerFlowResult::find_bus(ElementId id) const {
  for (const auto& b : bus)
    if (b.id == id) return &b;
  return nullptr;
}

const TrafoResult* PowerFlowResult::find_trafo(ElementId id) const {
  for (const auto& t : trafo)
    if (t.id == id) return &t;
  return nullptr;
}

using json = nlohmann::ordered_json;

std::string result_to_json(const PowerFlowResult& r) {
  json out;
  out["converged"] = r.converged;
  out["iterations"] = r.iterations;
  out["max_mismatch_pu"] = r.max_mismatch;
  json buses = json::array(), lines = json::array(), trafos = json::array(), ext = json::array();
  for (const auto& b : r.bus)
    buses.push_back({{"id", b.id}, {"vn_kv", b.vn_kv}, {"vm_pu", b.vm_pu}, {"va_deg", b.va_deg},
                     {"p_mw", b.p_mw}, {"q_mvar", b.q_mvar}});
  for (const auto& l : r.line)
    lines.push_back({{"id", l.id}, {"p_from_mw", l.p_from_mw}, {"q_from_mvar", l.q_from_mvar},
                     {"p_to_mw", l.p_to_mw}, {"q_to_mvar", l.q_to_mvar}, {"pl_mw", l.pl_mw},
                     {"ql_mvar", l.ql_mvar}, {"i_ka", l.i_ka}, {"loading_percent", l.loading_percent}});
  for (const auto& t : r.trafo)
    trafos.push_back({{"id", t.id}, {"p_hv_mw", t.p_hv_mw}, {"q_hv_mvar", t.q_hv_mvar},
                      {"p_lv_mw", t.p_lv_mw}, {"q_lv_mvar", t.q_lv_mvar}, {"pl_mw", t.pl_mw},
                      {"ql_mvar", t.ql_mvar}, {"loading_percent", t.loading_percent}});
  for (const auto& e : r.ext_grid) ext.push_back({{"id", e.id}, {"p_mw", e.p_mw}, {"q_mvar", e.q_mvar}});
  out["bus_results"] = std::move(buses);
  out["line_results"] = std::move(lines);
  out["trafo_results"] = std::move(trafos);
  out["ext_grid_results"] = std::move(ext);
  return out.dump(2) + "\n";
}

PowerFlowResult result_from_json(const std::string& text) {
  PowerFlowResult r;
  try {
    json in = json::parse(text);
    r.converged = in.at("converged").get<bool>();
    r.iterations = in.at("iterations").get<int>();
    r.max_mismatch = in.value("max_mismatch_pu", 0.0);
    for (const auto& b : in.at("bus_results"))
      r.bus.push_back({b.at("id").get<ElementId>(), b.at("vn_kv").get<double>(), b.at("vm_pu").get<double>(),
                       b.at("va_deg").get<double>(), b.value("p_mw", 0.0), b.value("q_mvar", 0.0)});
    for (const auto& l : in.at("line_results"))
      r.line.push_back({l.at("id").get<ElementId>(), l.value("p_from_mw", 0.0), l.value("q_from_mvar", 0.0),
                        l.value("p_to_mw", 0.0), l.value("q_to_mvar", 0.0), l.value("pl_mw", 0.0),
                        l.value("ql_mvar", 0.0), l.value("i_ka", 0.0), l.at("loading_percent").get<double>()});
    for (const auto& t : in.at("trafo_results"))
      r.trafo.push_back({t.at("id").get<ElementId>(), t.at("p_hv_mw").get<double>(), t.value("q_hv_mvar", 0.0),
                         t.value("p_lv_mw", 0.0), t.value("q_lv_mvar", 0.0), t.value("pl_mw", 0.0),
                         t.value("ql_mvar", 0.0), t.at("loading_percent").get<double>()});
    if (in.contains("ext_grid_results"))
      for (const auto& e : in.at("ext_grid_results"))
        r.ext_grid.push_back({e.at("id").get<ElementId>(), e.value("p_mw", 0.0), e.value("q_mvar", 0.0)});
  } catch (const json::exception& e) {
    throw Error(std::string("malformed power flow result: ") + e.what());
  }
  return r;
}

PowerFlowResult load_result(const std::string& path) { return result_from_json(rdf::read_text_file(path)); }

void save_result(const std::string& path, const PowerFlowResult& result) {
  rdf::write_text_file(path, result_to_json(result));
}

} // namespace cpes::powerflow
