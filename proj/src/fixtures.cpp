#include "cpes/fixtures.hpp"

#include <algorithm>

namespace cpes::fixtures {

using grid::ElementId;

namespace {

struct Counters {
  ElementId bus = 0, line = 0, load = 0, sgen = 0, storage = 0;
};

// NA2XS2Y 1x185 and NAYY 4x150 cable parameters.
constexpr double mv_r = 0.161, mv_x = 0.117, mv_imax = 0.319;
constexpr double lv_r = 0.208, lv_x = 0.080, lv_imax = 0.270;

void add_household(grid::GridTables& t, Counters& c, ElementId bus, long k) {
  t.load.push_back({c.load++, bus, 0.003, 0.0006, "household", false, 0.003, 0.0});
  if (k % 5 != 4) t.sgen.push_back({c.sgen++, bus, -0.004, 0.0, "PV", true, 0.0, -0.006});
  if (k % 3 == 0) t.load.push_back({c.load++, bus, 0.002, 0.0, "heatpump", true, 0.008, 0.0});
  if (k % 4 == 1) t.load.push_back({c.load++, bus, 0.0, 0.0, "ev", true, 0.011, 0.0});
  if (k % 6 == 2) t.storage.push_back({c.storage++, bus, 0.0, 0.0, true, 0.005, -0.005, 50.0});
}

} // namespace

grid::GridTables synthetic_feeder(const FeederSpec& spec) {
  grid::GridTables t;
  Counters c;
  ElementId slack = c.bus++;
  t.bus.push_back({slack, "MV slack", 20.0});
  t.ext_grid.push_back({0, slack, 1.0, 0.0});

  const double sn = std::max(0.4, 0.04 * spec.households_per_substation);
  ElementId upstream = slack;
  long k = 0;
  for (int s = 0; s < spec.substations; ++s) {
    ElementId mv = c.bus++;
    t.bus.push_back({mv, "MV " + std::to_string(s + 1), 20.0});
    t.line.push_back({c.line++, upstream, mv, mv_r, mv_x, spec.mv_segment_km, mv_imax});
    upstream = mv;

    ElementId lv = c.bus++;
    t.bus.push_back({lv, "LV busbar " + std::to_string(s + 1), 0.4});
    t.trafo.push_back({s, mv, lv, sn, 20.0, 0.4, 4.0, 1.0});

    ElementId previous = lv;
    for (int h = 0; h < spec.households_per_substation; ++h, ++k) {
      ElementId pcc = c.bus++;
      t.bus.push_back({pcc, "household " + std::to_string(k + 1), 0.4});
      t.line.push_back({c.line++, previous, pcc, lv_r, lv_x, spec.lv_segment_km, lv_imax});
      add_household(t, c, pcc, k);
      previous = pcc;
    }
  }
  return t;
}

grid::GridTables demo_feeder() { return synthetic_feeder({}); }

grid::GridTables thousand_household_feeder() {
  FeederSpec spec;
  spec.substations = 20;
  spec.households_per_substation = 50;
  return synthetic_feeder(spec);
}

} // namespace cpes::fixtures
