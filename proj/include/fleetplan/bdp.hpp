#pragma once

#include "fleetplan/fluid.hpp"
#include "fleetplan/instance.hpp"

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace fleetplan {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense enumeration of in-cap states over all steps.
struct StateGrid {
    int cap_fd = 0, cap_gw = 0, cap_od = 0;
    int horizon = 0;

    static StateGrid of(const Instance& inst);
    std::size_t layer_size() const;
    std::size_t size() const { return layer_size() * (horizon + 1); }
    bool contains(const FleetState& s) const;
    std::size_t index(const FleetState& s) const;
    bool operator==(const StateGrid&) const = default;
};

struct ValueTable {
    StateGrid grid;
    std::vector<double> values;
    std::vector<int> actions;

    double value(const FleetState& s) const { return values.at(grid.index(s)); }
    int action(const FleetState& s) const { return actions.at(grid.index(s)); }
};

struct BdpOptions {
    std::size_t max_states = 5'000'000;
    bool parallel = true;
    /// Scan every action instead of the convex search. Forced on in matching-sensitive mode.
    bool exhaustive_actions = false;
    /// Receives every tabulated operational cost.
    OpsCostCache* share = nullptr;
};

/// Backward induction over the full state grid with exact expectations.
ValueTable bdp_solve(const Instance& inst, const BdpOptions& opts = {});

/// Straightforward serial recursion over transition_pmf; slow, for cross-checking.
ValueTable bdp_reference(OpsCostCache& cache, std::size_t max_states = 200'000);

void save_value_table(const ValueTable& table, std::ostream& out);
ValueTable load_value_table(std::istream& in);

}  // namespace fleetplan
