#pragma once

#include "cpes/grid.hpp"

// Synthetic MV/LV feeders for demos and tests.
//
// A 20 kV slack bus feeds a chain of MV nodes; each MV node has one
// 20/0.4 kV secondary substation whose LV busbar feeds a radial chain of
// household connection buses. Household k (0-based, feeder-wide) has a
// household load plus, by a fixed pattern, PV (k % 5 != 4), a heat pump
// (k % 3 == 0), an EV charger (k % 4 == 1) and a battery (k % 6 == 2). All
// assets except the household base load are controllable.
namespace cpes::fixtures {

struct FeederSpec {
  int substations = 4;
  int households_per_substation = 5;
  double mv_segment_km = 1.0;
  double lv_segment_km = 0.05;
};

grid::GridTables synthetic_feeder(const FeederSpec& spec);

/// 4 substations x 5 households; the bundled data/demo/grid.json.
grid::GridTables demo_feeder();

/// 20 substations x 50 households.
grid::GridTables thousand_household_feeder();

} // namespace cpes::fixtures
