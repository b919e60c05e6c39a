#pragma once

#include "fleetplan/fluid.hpp"
#include "fleetplan/instance.hpp"

#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace fleetplan {

using Rng = std::mt19937_64;

class InfeasibleAction : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class MissingSolution : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class StateSpaceTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inclusive range of FD hires (positive) and layoffs (negative).
struct ActionRange {
    int lo = 0, hi = 0;
    bool contains(int a) const { return lo <= a && a <= hi; }
};
ActionRange action_space(const Instance& inst, const FleetState& s);

struct StepCost {
    double ops = 0.0;
    double fix = 0.0;
    double sev = 0.0;
    double total() const { return ops + fix + sev; }
};

/// C_ops + K (C_fix (n + a) + C_sev max(0, -a)) for a given operational cost.
StepCost compose_total_cost(const Instance& inst, double ops, int fd_after, int action);

/// Full per-step cost, reading the operational part from `cache`.
StepCost total_cost(OpsCostCache& cache, const FleetState& s, int action);

struct TurnoverProbs {
    double fd = 0.0, gw = 0.0, od = 0.0;
};

/// Resignation probabilities; `shares` must be given in matching-sensitive mode.
TurnoverProbs resignation_prob(const Instance& inst, std::optional<UnmatchedShares> shares = std::nullopt);

/// Distribution of min(cap, n - x + y), x ~ Bin(n, p), y ~ Bin(n, q). Entry k is P(next = k).
std::vector<double> fleet_count_pmf(int n, double p, double q, int cap);

std::vector<double> binomial_pmf(int n, double p);

struct Outcome {
    FleetState next;
    double probability = 0.0;
};

/// Successor distribution of a post-decision state, in lexicographic order of the next state.
std::vector<Outcome> transition_pmf(const Instance& inst, const FleetState& post, const TurnoverProbs& probs,
                                    std::size_t max_support = 1'000'000);

int sample_binomial(int n, double p, Rng& rng);

/// One turnover step. CD draws come from `cd_rng` and FD draws from `fd_rng`, so
/// policies with different FD fleets still see the same CD trajectory.
FleetState sample_transition(const Instance& inst, const FleetState& post, const TurnoverProbs& probs, Rng& cd_rng,
                             Rng& fd_rng);
FleetState sample_transition(const Instance& inst, const FleetState& post, const TurnoverProbs& probs, Rng& rng);

/// Probabilities at a post-decision state, looking up unmatched shares when needed.
TurnoverProbs turnover_at(OpsCostCache& cache, const FleetState& post);

}  // namespace fleetplan
