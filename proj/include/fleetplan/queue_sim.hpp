#pragma once

#include "fleetplan/fluid.hpp"
#include "fleetplan/instance.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace fleetplan {

/// Q(i, j): chance that an FD finishing a delivery at i relocates to j; Q(i, i) means it waits at i.
struct RoutingMatrix {
    ZoneMatrix q;
};

RoutingMatrix derive_routing(const Instance& inst, const FluidSolution& sol);

struct SimOptions {
    double hours = 200.0;
    double slot_minutes = 1.0;
    double warmup_share = 0.2;
    int batches = 20;
    int cd_lifetime_slots = 1;  // unmatched CDs leave after this many slots
    bool exponential_travel = false;
};

struct SimStats {
    double measured_hours = 0.0;
    // request counts per route over the measured window
    ZoneMatrix requests, by_fd, by_gw, by_od, penalized;
    double relocation_km = 0.0;
    double cost_rate = 0.0;   // $/h, batch mean
    double half_width = 0.0;  // 95% batch-means interval
    std::vector<double> idle_share;  // per zone, share of FD time spent idle there
};

SimStats simulate(const Instance& inst, int n_fd, int n_gw, int n_od, int t, const RoutingMatrix& routing,
                  const SimOptions& opts, std::uint64_t seed);

struct BoundCheck {
    bool holds = false;
    double margin = 0.0;  // simulated minus LP rate, $/h
};
BoundCheck fluid_bound_check(const SimStats& sim, double lp_rate);

/// Per-route counts over the measured window.
void write_sim_csv(std::ostream& out, const SimStats& sim);

}  // namespace fleetplan
