#pragma once

#include "fleetplan/instance.hpp"

#include <cmath>
#include <vector>

namespace fixtures {

using fleetplan::Instance;
using fleetplan::ZoneMatrix;

/// Zones on a line, `spacing` km apart, `diagonal` km inside a zone; uniform request
/// destinations, uniform intensities, constant demand.
inline Instance line_instance(int zones, double demand, double diagonal = 1.0, double spacing = 1.0) {
    Instance inst;
    inst.name = "line";
    inst.zones = zones;
    inst.distance_km = ZoneMatrix(zones);
    for (int i = 0; i < zones; ++i)
        for (int j = 0; j < zones; ++j) inst.distance_km(i, j) = i == j ? diagonal : spacing * std::abs(i - j);
    inst.speed_kmh = 19.0;
    inst.request_pattern = ZoneMatrix(zones, 1.0 / zones);
    inst.demand_weights.assign(zones, 1.0 / zones);
    inst.demand.kind = fleetplan::DemandCurve::Kind::constant;
    inst.demand.level = demand;
    inst.demand.growth = 1.0;
    inst.gw = {std::vector<double>(zones, 1.0 / zones), 1.0, ZoneMatrix(zones, 1.0 / zones)};
    inst.od = {std::vector<double>(zones, 1.0 / zones), 1.0, ZoneMatrix(zones, 1.0 / zones)};
    inst.strategic.horizon = 3;
    inst.strategic.cap_fd = inst.strategic.cap_gw = inst.strategic.cap_od = 4;
    inst.initial = {0, 0, 0, 0};
    return inst;
}

/// One zone, r = 1 km, v = 19 km/h.
inline Instance single_zone(double demand) { return line_instance(1, demand); }

/// Two zones, caps 4 x 4 x 4, T = 3, turnover strong enough to matter.
inline Instance tiny_instance() {
    Instance inst = line_instance(2, 12.0, 1.0, 2.0);
    inst.speed_kmh = 4.0;
    inst.name = "tiny";
    inst.request_pattern(0, 0) = 0.7;
    inst.request_pattern(0, 1) = 0.3;
    inst.request_pattern(1, 0) = 0.6;
    inst.request_pattern(1, 1) = 0.4;
    inst.demand_weights = {0.65, 0.35};
    inst.gw.active_share = 1.0;
    inst.od.active_share = 1.0;
    inst.costs.od_per_request = 3.0;
    inst.gw.intensity = {0.5, 0.5};
    inst.turnover = {0.1, 0.15, 0.2, 0.3, 0.25, false, 1.0, 0.01};
    inst.strategic.c_fix_per_hour = 8.0;
    inst.strategic.hours_per_ops_horizon = 1.0;
    inst.strategic.no_firing = false;
    inst.strategic.c_sev = 2.5;
    inst.strategic.gamma = 0.95;
    inst.initial = {1, 2, 1, 0};
    return inst;
}

inline double binomial(int n, int k, double p) {
    if (k < 0 || k > n) return 0.0;
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

}  // namespace fixtures
