#pragma once

#include "fleetplan/fluid.hpp"
#include "fleetplan/instance.hpp"
#include "fleetplan/mdp.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace fleetplan {

class IndexOutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

struct AggregatedFleet {
    int gw = 0, od = 0;
    auto operator<=>(const AggregatedFleet&) const = default;
};
AggregatedFleet aggregate(int n_gw, int n_od, int k_gw, int k_od);

/// Post-decision value slopes v(t, w, k) = V(k) - V(k - 1) for k = 1..cap_fd.
/// Absent rows read as zero.
struct SlopeTable {
    using Key = std::tuple<int, int, int>;  // t, aggregated gw, aggregated od

    int horizon = 0;
    int cap_fd = 0;
    int k_gw = 1, k_od = 1;
    double alpha = 0.01;
    std::map<Key, std::vector<double>> rows;

    static SlopeTable empty_for(const Instance& inst, int k_gw, int k_od, double alpha);
    Key key(const FleetState& s) const;
    /// Entry k-1 holds v(k).
    const std::vector<double>* row(const FleetState& s) const;
    std::vector<double>& row_for_update(const FleetState& s);
    double slope(const FleetState& s, int k) const;
    /// Sum of v(1..n) at the state's (t, w).
    double cumulative(const FleetState& s, int n) const;
    bool operator==(const SlopeTable&) const = default;
};

/// Caps entries left of idx at z[idx] and floors entries right of idx+1 at z[idx+1].
std::vector<double> conv_project(std::vector<double> z, int idx);

struct GreedyChoice {
    int action = 0;
    double value = 0.0;  // C_tot + gamma * sum of slopes
};
GreedyChoice plvfa_greedy_action(OpsCostCache& cache, const FleetState& s, const SlopeTable& slopes);

struct PlvfaConfig {
    enum class Start { uniform, point };
    enum class Rate { constant, harmonic };

    int episodes = 1000;
    double alpha = 0.01;
    Rate rate = Rate::constant;
    int k_gw = 1, k_od = 1;
    Start start = Start::uniform;
    FleetState start_state;  // used with Start::point
    double epsilon = 0.05;   // exploration at episode 0, decays linearly to 0
    std::uint64_t seed = 1;
};

struct TrainResult {
    SlopeTable table;
    std::vector<double> episode_costs;  // discounted cost of each training trajectory
    int pair_repairs = 0;               // updates whose two slopes came out inverted
};
TrainResult plvfa_train(OpsCostCache& cache, const PlvfaConfig& cfg);

void save_slope_table(const SlopeTable& table, std::ostream& out);
SlopeTable load_slope_table(std::istream& in);

}  // namespace fleetplan
