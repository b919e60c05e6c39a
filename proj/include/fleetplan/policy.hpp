#pragma once

#include "fleetplan/bdp.hpp"
#include "fleetplan/fluid.hpp"
#include "fleetplan/mdp.hpp"
#include "fleetplan/plvfa.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fleetplan {

/// One-step cost argmin.
int myopic_action(OpsCostCache& cache, const FleetState& s);

struct Policy {
    enum class Kind { myopic, bdp, plvfa, fd_only };
    Kind kind = Kind::myopic;
    std::shared_ptr<const ValueTable> table;
    std::shared_ptr<const SlopeTable> slopes;

    static Policy myopic() { return {}; }
    /// Myopic hiring on a fleet whose CD counts are held at zero.
    static Policy fd_only() { return {Kind::fd_only, nullptr, nullptr}; }
    static Policy from_table(ValueTable t);
    static Policy from_slopes(SlopeTable s);

    std::string name() const;
    int action(OpsCostCache& cache, const FleetState& s) const;
};

struct StepRecord {
    FleetState state;  // pre-decision
    int action = 0;
    StepCost cost;
    // operational cost split, $ per step
    double fd_variable = 0.0, gw = 0.0, od = 0.0, penalty = 0.0;
    double service_level = 1.0;
    UnmatchedShares unmatched;
    double discount = 1.0;
    int fd_after() const { return state.n_fd + action; }
};

struct Trajectory {
    std::vector<StepRecord> steps;
    double total = 0.0;       // undiscounted
    double discounted = 0.0;  // with gamma^t
};

/// Seed for rollout `index` under a master seed; identical across compared policies.
std::uint64_t rollout_seed(std::uint64_t master, std::uint64_t index);

Trajectory rollout(OpsCostCache& cache, const Policy& policy, FleetState s0, std::uint64_t seed);

/// n_fd after the decision minus the full-service FD count at each step.
std::vector<int> hiring_gap_series(OpsCostCache& cache, const Trajectory& traj);

struct CostShares {
    double fd_fixed = 0.0, fd_variable = 0.0, gw = 0.0, od = 0.0, penalty = 0.0, severance = 0.0;
    double sum() const { return fd_fixed + fd_variable + gw + od + penalty + severance; }
};
/// Shares of the pooled cumulative cost; all zero when nothing was spent.
CostShares cost_breakdown(const std::vector<Trajectory>& trajectories);

struct EvalOptions {
    int rollouts = 50;
    std::uint64_t seed = 1;
    int jobs = 1;  // 0 uses the OpenMP default
    bool compare_myopic = true;
    bool compare_fd_only = true;
    bool hiring_gap = false;
    std::optional<double> oracle;  // e.g. V_0(s0) from BDP
};

struct PolicyStats {
    std::string name;
    int rollouts = 0;
    double mean = 0.0, stddev = 0.0;                        // undiscounted cumulative cost
    double discounted_mean = 0.0, discounted_stddev = 0.0;  // objective actually optimized
    CostShares shares;
    std::vector<double> mean_fd, mean_gw, mean_od;  // per step, after the decision
    std::vector<double> service_level;
    std::vector<double> hiring_gap;  // per step mean, filled on request
    std::vector<Trajectory> trajectories;
    double terminal_gap() const { return hiring_gap.empty() ? 0.0 : hiring_gap.back(); }
};

PolicyStats run_policy(OpsCostCache& cache, const Policy& policy, const FleetState& s0, const EvalOptions& opts);

/// Relative measures use discounted means; with gamma = 1 they equal the undiscounted ones.
struct EvalReport {
    PolicyStats policy;
    std::optional<PolicyStats> myopic, fd_only;
    std::optional<double> delta;     // % above the oracle
    std::optional<double> delta_my;  // % above myopic
    std::optional<double> h, h_bar;  // % of FD-only cost, and the saving
};

EvalReport evaluate(OpsCostCache& cache, const Policy& policy, const FleetState& s0, const EvalOptions& opts);

double gap_percent(double cost, double reference);

/// Sets a named instance parameter; throws std::invalid_argument for unknown names.
void apply_parameter(Instance& inst, const std::string& name, double value);
std::vector<std::string> sweep_parameters();

struct SweepRow {
    std::string parameter;
    double value = 0.0;
    std::string metric;
    double mean = 0.0, std = 0.0;
};

struct SweepOptions {
    std::string parameter;
    std::vector<double> values;
    EvalOptions eval;
    /// When set, a PL-VFA policy is trained per cell; otherwise myopic is evaluated.
    std::optional<PlvfaConfig> train;
};

std::vector<SweepRow> sweep(const Instance& base, const SweepOptions& opts);

}  // namespace fleetplan
