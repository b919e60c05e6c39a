#include "fleetplan/policy.hpp"

#include "fleetplan/convex_search.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace fleetplan {

int myopic_action(OpsCostCache& cache, const FleetState& s) {
    const auto range = action_space(cache.instance(), s);
    auto f = [&](int a) { return total_cost(cache, s, a).total(); };
    return convex_int_argmin(f, range.lo, range.hi, 0).x;
}

Policy Policy::from_table(ValueTable t) {
    return {Kind::bdp, std::make_shared<const ValueTable>(std::move(t)), nullptr};
}

Policy Policy::from_slopes(SlopeTable s) {
    return {Kind::plvfa, nullptr, std::make_shared<const SlopeTable>(std::move(s))};
}

std::string Policy::name() const {
    switch (kind) {
        case Kind::myopic: return "myopic";
        case Kind::bdp: return "bdp";
        case Kind::plvfa: return "plvfa";
        case Kind::fd_only: return "fd-only";
    }
    return "?";
}

int Policy::action(OpsCostCache& cache, const FleetState& s) const {
    switch (kind) {
        case Kind::bdp: return table->action(s);
        case Kind::plvfa: return plvfa_greedy_action(cache, s, *slopes).action;
        case Kind::myopic:
        case Kind::fd_only: break;
    }
    return myopic_action(cache, s);
}

std::uint64_t rollout_seed(std::uint64_t master, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

Rng stream(std::uint64_t seed, std::uint32_t which) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), which};
    return Rng(seq);
}

// Runs body(i) for i in [0, n), in parallel when jobs != 1; rethrows the first failure.
void for_each_index(int n, int jobs, const std::function<void(int)>& body) {
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
    std::exception_ptr failure;
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
#pragma omp critical(fleetplan_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (xs.size() - 1))};
}

}  // namespace

Trajectory rollout(OpsCostCache& cache, const Policy& policy, FleetState s0, std::uint64_t seed) {
    const auto& inst = cache.instance();
    if (policy.kind == Policy::Kind::fd_only) s0.n_gw = s0.n_od = 0;
    Rng cd_rng = stream(seed, 1), fd_rng = stream(seed, 2);
    Trajectory traj;
    FleetState s = s0;
    double discount = 1.0;
    for (int t = 0; t <= inst.strategic.horizon; ++t) {
        s.t = t;
        StepRecord r;
        r.state = s;
        r.action = policy.action(cache, s);
        r.cost = total_cost(cache, s, r.action);
        const FleetState post{r.fd_after(), s.n_gw, s.n_od, t};
        const auto ops = cache.summary(post.n_fd, post.n_gw, post.n_od, t);
        r.fd_variable = per_step(inst, ops.fd_rate);
        r.gw = per_step(inst, ops.gw_rate);
        r.od = per_step(inst, ops.od_rate);
        r.penalty = per_step(inst, ops.penalty_rate);
        r.service_level = ops.service_level;
        r.unmatched = ops.shares;
        r.discount = discount;
        traj.total += r.cost.total();
        traj.discounted += discount * r.cost.total();
        discount *= inst.strategic.gamma;
        traj.steps.push_back(r);
        if (t < inst.strategic.horizon) s = sample_transition(inst, post, turnover_at(cache, post), cd_rng, fd_rng);
    }
    return traj;
}

std::vector<int> hiring_gap_series(OpsCostCache& cache, const Trajectory& traj) {
    std::vector<int> gaps;
    for (const auto& r : traj.steps)
        gaps.push_back(r.fd_after() - min_fd_full_service(cache, r.state.n_gw, r.state.n_od, r.state.t));
    return gaps;
}

CostShares cost_breakdown(const std::vector<Trajectory>& trajectories) {
    if (trajectories.empty()) throw std::invalid_argument("cost_breakdown needs at least one trajectory");
    CostShares sum;
    for (const auto& traj : trajectories)
        for (const auto& r : traj.steps) {
            sum.fd_fixed += r.cost.fix;
            sum.fd_variable += r.fd_variable;
            sum.gw += r.gw;
            sum.od += r.od;
            sum.penalty += r.penalty;
            sum.severance += r.cost.sev;
        }
    const double total = sum.sum();
    if (total <= 0.0) return {};
    return {sum.fd_fixed / total, sum.fd_variable / total, sum.gw / total,
            sum.od / total,       sum.penalty / total,     sum.severance / total};
}

PolicyStats run_policy(OpsCostCache& cache, const Policy& policy, const FleetState& s0, const EvalOptions& opts) {
    if (opts.rollouts < 1) throw std::invalid_argument("need at least one rollout");
    PolicyStats st;
    st.name = policy.name();
    st.rollouts = opts.rollouts;
    st.trajectories.resize(opts.rollouts);
    for_each_index(opts.rollouts, opts.jobs, [&](int i) {
        st.trajectories[i] = rollout(cache, policy, s0, rollout_seed(opts.seed, static_cast<std::uint64_t>(i)));
    });

    std::vector<double> totals, discounted;
    for (const auto& tr : st.trajectories) {
        totals.push_back(tr.total);
        discounted.push_back(tr.discounted);
    }
    std::tie(st.mean, st.stddev) = mean_std(totals);
    std::tie(st.discounted_mean, st.discounted_stddev) = mean_std(discounted);
    st.shares = cost_breakdown(st.trajectories);

    const std::size_t steps = st.trajectories.front().steps.size();
    st.mean_fd.assign(steps, 0.0);
    st.mean_gw.assign(steps, 0.0);
    st.mean_od.assign(steps, 0.0);
    st.service_level.assign(steps, 0.0);
    for (const auto& tr : st.trajectories)
        for (std::size_t k = 0; k < steps; ++k) {
            const auto& r = tr.steps[k];
            st.mean_fd[k] += r.fd_after() / static_cast<double>(opts.rollouts);
            st.mean_gw[k] += r.state.n_gw / static_cast<double>(opts.rollouts);
            st.mean_od[k] += r.state.n_od / static_cast<double>(opts.rollouts);
            st.service_level[k] += r.service_level / opts.rollouts;
        }
    if (opts.hiring_gap) {
        std::vector<std::vector<int>> gaps(opts.rollouts);
        for_each_index(opts.rollouts, opts.jobs, [&](int i) { gaps[i] = hiring_gap_series(cache, st.trajectories[i]); });
        st.hiring_gap.assign(steps, 0.0);
        for (const auto& g : gaps)
            for (std::size_t k = 0; k < steps; ++k) st.hiring_gap[k] += g[k] / static_cast<double>(opts.rollouts);
    }
    return st;
}

double gap_percent(double cost, double reference) { return 100.0 * (cost - reference) / reference; }

EvalReport evaluate(OpsCostCache& cache, const Policy& policy, const FleetState& s0, const EvalOptions& opts) {
    EvalReport rep;
    rep.policy = run_policy(cache, policy, s0, opts);
    const double c = rep.policy.discounted_mean;
    if (opts.compare_myopic) {
        rep.myopic = policy.kind == Policy::Kind::myopic ? rep.policy : run_policy(cache, Policy::myopic(), s0, opts);
        rep.delta_my = gap_percent(c, rep.myopic->discounted_mean);
    }
    if (opts.compare_fd_only) {
        rep.fd_only =
            policy.kind == Policy::Kind::fd_only ? rep.policy : run_policy(cache, Policy::fd_only(), s0, opts);
        rep.h = 100.0 * c / rep.fd_only->discounted_mean;
        rep.h_bar = 100.0 - *rep.h;
    }
    if (opts.oracle) rep.delta = gap_percent(c, *opts.oracle);
    return rep;
}

namespace {

const std::map<std::string, std::function<void(Instance&, double)>>& setters() {
    static const std::map<std::string, std::function<void(Instance&, double)>> table{
        {"q_gw", [](Instance& i, double v) { i.turnover.q_gw = v; }},
        {"q_od", [](Instance& i, double v) { i.turnover.q_od = v; }},
        {"p_fd", [](Instance& i, double v) { i.turnover.p_fd = v; }},
        {"p_gw", [](Instance& i, double v) { i.turnover.p_gw = v; }},
        {"p_od", [](Instance& i, double v) { i.turnover.p_od = v; }},
        {"p_high", [](Instance& i, double v) { i.turnover.p_high = v; }},
        {"c_fix_per_hour", [](Instance& i, double v) { i.strategic.c_fix_per_hour = v; }},
        {"c_sev", [](Instance& i, double v) { i.strategic.c_sev = v; }},
        {"gamma", [](Instance& i, double v) { i.strategic.gamma = v; }},
        {"fd_per_km", [](Instance& i, double v) { i.costs.fd_per_km = v; }},
        {"gw_per_km", [](Instance& i, double v) { i.costs.gw_per_km = v; }},
        {"od_per_request", [](Instance& i, double v) { i.costs.od_per_request = v; }},
        {"penalty_per_request", [](Instance& i, double v) { i.costs.penalty_per_request = v; }},
        {"demand_level", [](Instance& i, double v) { i.demand.level = v; }},
        {"demand_growth", [](Instance& i, double v) { i.demand.growth = v; }},
        {"zeta_od", [](Instance& i, double v) { i.od.active_share = v; }},
    };
    return table;
}

}  // namespace

void apply_parameter(Instance& inst, const std::string& name, double value) {
    const auto it = setters().find(name);
    if (it == setters().end()) throw std::invalid_argument("unknown sweep parameter '" + name + "'");
    it->second(inst, value);
}

std::vector<std::string> sweep_parameters() {
    std::vector<std::string> names;
    for (const auto& [name, _] : setters()) names.push_back(name);
    return names;
}

std::vector<SweepRow> sweep(const Instance& base, const SweepOptions& opts) {
    const int cells = static_cast<int>(opts.values.size());
    std::vector<std::vector<SweepRow>> out(cells);
    EvalOptions inner = opts.eval;
    inner.jobs = 1;
    for_each_index(cells, opts.eval.jobs, [&](int c) {
        Instance inst = base;
        const double value = opts.values[c];
        apply_parameter(inst, opts.parameter, value);
        validate(inst);
        OpsCostCache cache(inst);
        Policy policy = Policy::myopic();
        if (opts.train) policy = Policy::from_slopes(plvfa_train(cache, *opts.train).table);
        const auto rep = evaluate(cache, policy, inst.initial, inner);
        auto& rows = out[c];
        auto add = [&](std::string metric, double mean, double sd) {
            rows.push_back({opts.parameter, value, std::move(metric), mean, sd});
        };
        const auto& st = rep.policy;
        add("cost", st.mean, st.stddev);
        add("discounted_cost", st.discounted_mean, st.discounted_stddev);
        if (rep.delta_my) add("delta_my", *rep.delta_my, 0.0);
        if (rep.h) {
            add("h", *rep.h, 0.0);
            add("h_bar", *rep.h_bar, 0.0);
        }
        std::vector<double> service;
        for (const auto& tr : st.trajectories) {
            double s = 0.0;
            for (const auto& r : tr.steps) s += r.service_level;
            service.push_back(s / tr.steps.size());
        }
        const auto [sl_mean, sl_std] = mean_std(service);
        add("service_level", sl_mean, sl_std);
        add("terminal_fd", st.mean_fd.back(), 0.0);
        if (!st.hiring_gap.empty()) add("terminal_hiring_gap", st.terminal_gap(), 0.0);
        add("share_fd_fixed", st.shares.fd_fixed, 0.0);
        add("share_fd_variable", st.shares.fd_variable, 0.0);
        add("share_gw", st.shares.gw, 0.0);
        add("share_od", st.shares.od, 0.0);
        add("share_penalty", st.shares.penalty, 0.0);
        add("share_severance", st.shares.severance, 0.0);
    });
    std::vector<SweepRow> rows;
    for (auto& cell : out) rows.insert(rows.end(), cell.begin(), cell.end());
    return rows;
}

}  // namespace fleetplan
