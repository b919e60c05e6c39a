#pragma once

#include "fleetplan/instance.hpp"
#include "fleetplan/lp.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace fleetplan {

/// Fluid LP optimum. The a-fractions are shares of origin demand, so for every
/// origin a_fd[i] + sum_j (a_gw + a_od + a_null)(i,j) = 1. Slacks are unused CD
/// capacity in requests per hour.
struct FluidSolution {
    int zones = 0;
    int n_fd = 0;
    std::vector<double> a_fd;
    ZoneMatrix a_gw, a_od, a_null, e, f;
    ZoneMatrix gw_slack, od_slack;
    double cost_rate = 0.0;  // $/h

    // cost_rate split, $/h
    double fd_serving_rate = 0.0;
    double relocation_rate = 0.0;
    double gw_rate = 0.0;
    double od_rate = 0.0;
    double penalty_rate = 0.0;

    double unmatched_demand = 0.0;  // requests/h penalized
    bool degenerate_demand = false;
    int lp_iterations = 0;
};

/// The LP together with its variable layout.
struct FluidLp {
    lp::LpProblem problem;
    int zones = 0;
    bool degenerate_demand = false;
    std::vector<int> flow_rows;     // lambda a P / n = mu f, one per route
    std::vector<int> balance_rows;  // per-zone driver balance

    int a_fd(int i) const { return i; }
    int a_gw(int i, int j) const { return block(0, i, j); }
    int a_od(int i, int j) const { return block(1, i, j); }
    int a_null(int i, int j) const { return block(2, i, j); }
    int e(int i, int j) const { return block(3, i, j); }
    int f(int i, int j) const { return block(4, i, j); }

private:
    int block(int b, int i, int j) const { return zones + b * zones * zones + i * zones + j; }
};

class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Unreachable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requires n_fd >= 1.
FluidLp build_fluid_lp(const Instance& inst, int n_fd, int n_gw, int n_od, int t);

/// Solves the operational problem; n_fd = 0 takes the closed-form outsourcing path.
/// `warm` may hold the basis of a neighbouring state's LP; `basis_out` receives the final one.
FluidSolution solve_fluid(const Instance& inst, int n_fd, int n_gw, int n_od, int t,
                          const lp::Basis* warm = nullptr, lp::Basis* basis_out = nullptr);

struct OpsCost {
    double cost = 0.0;  // $ per strategic step
    FluidSolution solution;
};
OpsCost ops_cost(const Instance& inst, int n_fd, int n_gw, int n_od, int t);

/// $/h rate to $ per strategic step.
double per_step(const Instance& inst, double rate);

/// Cheapest-first outsourcing of the demand FDs leave over.
struct OutsourcingPlan {
    ZoneMatrix a_gw, a_od, a_null;
    double fd_serving_rate = 0.0;
    double gw_rate = 0.0, od_rate = 0.0, penalty_rate = 0.0;
    double objective() const { return fd_serving_rate + gw_rate + od_rate + penalty_rate; }
};
OutsourcingPlan analytic_penalty(const Instance& inst, const std::vector<double>& a_fd, int n_gw, int n_od, int t);

double service_level(const FluidSolution& sol, const std::vector<double>& demand);

struct UnmatchedShares {
    double gw = 0.0, od = 0.0;
};
/// Unused CD capacity as a share of each fleet.
UnmatchedShares unmatched_cd_shares(const FluidSolution& sol, const Instance& inst, int n_gw, int n_od);

/// What the strategic layer keeps per evaluated state.
struct OpsSummary {
    double cost_rate = 0.0;
    double fd_rate = 0.0;  // serving plus relocation
    double gw_rate = 0.0, od_rate = 0.0, penalty_rate = 0.0;
    double unmatched_demand = 0.0;
    double demand = 0.0;
    UnmatchedShares shares;
    double service_level = 1.0;
};
OpsSummary summarize(const FluidSolution& sol, const Instance& inst, int n_gw, int n_od, int t);

/// Thread-safe memo of operational costs keyed on (n_fd, n_gw, n_od, t).
/// New LPs are warm-started from the last basis of a neighbouring state, so values
/// can differ in the last bits depending on evaluation order.
class OpsCostCache {
public:
    explicit OpsCostCache(Instance inst);
    OpsCostCache(const OpsCostCache& other);

    const Instance& instance() const { return inst_; }
    OpsSummary summary(int n_fd, int n_gw, int n_od, int t);
    /// $ per strategic step.
    double cost(int n_fd, int n_gw, int n_od, int t) { return per_step(inst_, summary(n_fd, n_gw, n_od, t).cost_rate); }
    bool contains(int n_fd, int n_gw, int n_od, int t) const;
    /// Records a value computed elsewhere; an existing entry wins.
    void insert(int n_fd, int n_gw, int n_od, int t, const OpsSummary& s);
    std::size_t size() const;
    std::size_t solves() const;

private:
    using Key = std::tuple<int, int, int, int>;
    using Group = std::tuple<int, int, int>;
    using Shape = std::pair<bool, bool>;  // which CD types are present
    Instance inst_;
    mutable std::mutex mu_;
    std::map<Key, OpsSummary> memo_;
    std::map<Group, lp::Basis> group_basis_;
    std::map<Shape, lp::Basis> shape_basis_;
    std::size_t solves_ = 0;
};

/// Smallest FD count with (numerically) no penalized demand.
int min_fd_full_service(OpsCostCache& cache, int n_gw, int n_od, int t);
int min_fd_full_service(const Instance& inst, int n_gw, int n_od, int t);

}  // namespace fleetplan
