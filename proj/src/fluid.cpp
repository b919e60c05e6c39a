#include "fleetplan/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fleetplan {

namespace {

// Hourly cost of one driver relocating from i to j.
double relocation_cost(const Instance& inst, const CostMatrices& c, const ZoneMatrix& mu, int i, int j) {
    return inst.costs.relocation_per_hour ? c.fd(i, j) * mu(i, j) : c.fd(i, j);
}

double serving_cost_per_request(const CostMatrices& c, const ZoneMatrix& pattern, int i) {
    double s = 0.0;
    for (int j = 0; j < pattern.n; ++j) s += c.fd(i, j) * pattern(i, j);
    return s;
}

void fill_slacks(FluidSolution& sol, const Instance& inst, const std::vector<double>& demand, int n_gw, int n_od) {
    const auto [gw, od] = cd_arrival_rates(inst, n_gw, n_od);
    const int m = inst.zones;
    sol.gw_slack = ZoneMatrix(m);
    sol.od_slack = ZoneMatrix(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            sol.gw_slack(i, j) = std::max(0.0, gw[i] * inst.request_pattern(i, j) - demand[i] * sol.a_gw(i, j));
            sol.od_slack(i, j) = std::max(0.0, od[i] * inst.od.route_pattern(i, j) - demand[i] * sol.a_od(i, j));
        }
}

}  // namespace

double per_step(const Instance& inst, double rate) {
    return rate * inst.strategic.hours_per_ops_horizon * inst.strategic.k_horizons;
}

FluidLp build_fluid_lp(const Instance& inst, int n_fd, int n_gw, int n_od, int t) {
    if (n_fd < 1) throw std::invalid_argument("build_fluid_lp needs at least one fixed driver");
    const int m = inst.zones;
    const double n = n_fd;
    const auto lambda = demand_rates(inst, t);
    const auto [gw, od] = cd_arrival_rates(inst, n_gw, n_od);
    const auto c = cost_matrices(inst);
    const auto mu = service_rates(inst);
    const auto& P = inst.request_pattern;
    const auto& Pod = inst.od.route_pattern;

    FluidLp out;
    out.zones = m;
    auto& lp = out.problem;
    for (int i = 0; i < m; ++i) {
        const bool live = lambda[i] > 0.0;
        out.degenerate_demand |= !live;
        lp.add_var(lambda[i] * serving_cost_per_request(c, P, i), 0.0, live ? 1.0 : 0.0);
    }
    auto cap = [&](double supply, double share, int i, int j) {
        return lambda[i] > 0.0 ? std::min(P(i, j), supply * share / lambda[i]) : 0.0;
    };
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) lp.add_var(lambda[i] * c.gw(i, j), 0.0, cap(gw[i], P(i, j), i, j));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) lp.add_var(lambda[i] * c.od(i, j), 0.0, cap(od[i], Pod(i, j), i, j));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) lp.add_var(lambda[i] * c.null(i, j), 0.0, lambda[i] > 0.0 ? 1.0 : 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) lp.add_var(i == j ? 0.0 : relocation_cost(inst, c, mu, i, j) * n, 0.0, 1.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) lp.add_var(0.0, 0.0, 1.0);

    using lp::Relation;
    // Served requests leave i at the rate loaded trips finish.
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            out.flow_rows.push_back(static_cast<int>(lp.constraints.size()));
            lp.add_row({{out.a_fd(i), lambda[i] / n * P(i, j)}, {out.f(i, j), -mu(i, j)}}, Relation::eq, 0.0);
        }
    // Each route's demand is served by an FD, a CD, or penalized.
    for (int i = 0; i < m; ++i) {
        if (lambda[i] <= 0.0) continue;
        for (int j = 0; j < m; ++j)
            lp.add_row({{out.a_fd(i), P(i, j)}, {out.a_gw(i, j), 1.0}, {out.a_od(i, j), 1.0}, {out.a_null(i, j), 1.0}},
                       Relation::eq, P(i, j));
    }
    // Relocations out of i are fed by loaded arrivals at i.
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            std::vector<lp::Term> row{{out.e(i, j), mu(i, j)}};
            for (int k = 0; k < m; ++k) row.push_back({out.f(k, i), -mu(k, i)});
            lp.add_row(std::move(row), Relation::le, 0.0);
        }
    for (int i = 0; i < m; ++i) {
        const double dispatch = lambda[i] / n;
        std::vector<lp::Term> lower{{out.a_fd(i), -dispatch}};
        std::vector<lp::Term> upper{{out.a_fd(i), dispatch}};
        std::vector<lp::Term> balance{{out.a_fd(i), dispatch}};
        for (int k = 0; k < m; ++k) {
            if (k != i) {
                lower.push_back({out.e(k, i), mu(k, i)});
                upper.push_back({out.e(k, i), -mu(k, i)});
                balance.push_back({out.e(k, i), -mu(k, i)});
                balance.push_back({out.e(i, k), mu(i, k)});
            }
            upper.push_back({out.f(k, i), -mu(k, i)});
            balance.push_back({out.f(k, i), -mu(k, i)});
        }
        lp.add_row(std::move(lower), Relation::le, 0.0);
        lp.add_row(std::move(upper), Relation::le, 0.0);
        out.balance_rows.push_back(static_cast<int>(lp.constraints.size()));
        lp.add_row(std::move(balance), Relation::eq, 0.0);
    }
    std::vector<lp::Term> total;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            total.push_back({out.e(i, j), 1.0});
            total.push_back({out.f(i, j), 1.0});
        }
    lp.add_row(std::move(total), Relation::eq, 1.0);
    return out;
}

OutsourcingPlan analytic_penalty(const Instance& inst, const std::vector<double>& a_fd, int n_gw, int n_od, int t) {
    const int m = inst.zones;
    const auto lambda = demand_rates(inst, t);
    const auto [gw, od] = cd_arrival_rates(inst, n_gw, n_od);
    const auto c = cost_matrices(inst);
    const auto& P = inst.request_pattern;

    OutsourcingPlan plan{ZoneMatrix(m), ZoneMatrix(m), ZoneMatrix(m)};
    for (int i = 0; i < m; ++i) {
        if (lambda[i] <= 0.0) continue;
        plan.fd_serving_rate += lambda[i] * a_fd[i] * serving_cost_per_request(c, P, i);
        for (int j = 0; j < m; ++j) {
            double residual = lambda[i] * P(i, j) * (1.0 - a_fd[i]);
            if (residual <= 0.0) continue;
            struct Option {
                double price, capacity, *rate;
                double& share;
            };
            Option gw_opt{c.gw(i, j), gw[i] * P(i, j), &plan.gw_rate, plan.a_gw(i, j)};
            Option od_opt{c.od(i, j), od[i] * inst.od.route_pattern(i, j), &plan.od_rate, plan.a_od(i, j)};
            // Ties go to GW.
            Option* order[2] = {&gw_opt, &od_opt};
            if (od_opt.price < gw_opt.price) std::swap(order[0], order[1]);
            for (Option* o : order) {
                if (o->price >= c.null(i, j)) break;
                const double used = std::min(residual, o->capacity);
                o->share = used / lambda[i];
                *o->rate += used * o->price;
                residual -= used;
            }
            plan.a_null(i, j) = residual / lambda[i];
            plan.penalty_rate += residual * c.null(i, j);
        }
    }
    return plan;
}

FluidSolution solve_fluid(const Instance& inst, int n_fd, int n_gw, int n_od, int t, const lp::Basis* warm,
                          lp::Basis* basis_out) {
    const int m = inst.zones;
    const auto lambda = demand_rates(inst, t);
    FluidSolution sol;
    sol.zones = m;
    sol.n_fd = n_fd;
    sol.e = ZoneMatrix(m);
    sol.f = ZoneMatrix(m);
    for (double l : lambda) sol.degenerate_demand |= l <= 0.0;

    if (n_fd == 0) {
        sol.a_fd.assign(m, 0.0);
        auto plan = analytic_penalty(inst, sol.a_fd, n_gw, n_od, t);
        sol.a_gw = std::move(plan.a_gw);
        sol.a_od = std::move(plan.a_od);
        sol.a_null = std::move(plan.a_null);
        sol.gw_rate = plan.gw_rate;
        sol.od_rate = plan.od_rate;
        sol.penalty_rate = plan.penalty_rate;
        sol.cost_rate = plan.objective();
    } else {
        const auto fl = build_fluid_lp(inst, n_fd, n_gw, n_od, t);
        lp::SolveOptions opts;
        opts.warm_start = warm;
        auto res = lp::solve(fl.problem, opts);
        if (res.status != lp::Status::optimal || res.iteration_limit) {
            std::ostringstream msg;
            msg << "fluid LP " << lp::to_string(res.status) << (res.iteration_limit ? " (iteration limit)" : "")
                << " at n_fd=" << n_fd << " n_gw=" << n_gw << " n_od=" << n_od << " t=" << t << " after "
                << res.iterations << " iterations";
            throw SolverFailure(msg.str());
        }
        const auto& x = res.primal;
        const auto c = cost_matrices(inst);
        const auto mu = service_rates(inst);
        sol.a_fd.resize(m);
        sol.a_gw = ZoneMatrix(m);
        sol.a_od = ZoneMatrix(m);
        sol.a_null = ZoneMatrix(m);
        for (int i = 0; i < m; ++i) {
            sol.a_fd[i] = x[fl.a_fd(i)];
            sol.fd_serving_rate += lambda[i] * sol.a_fd[i] * serving_cost_per_request(c, inst.request_pattern, i);
            for (int j = 0; j < m; ++j) {
                sol.a_gw(i, j) = x[fl.a_gw(i, j)];
                sol.a_od(i, j) = x[fl.a_od(i, j)];
                sol.a_null(i, j) = x[fl.a_null(i, j)];
                sol.e(i, j) = x[fl.e(i, j)];
                sol.f(i, j) = x[fl.f(i, j)];
                sol.gw_rate += lambda[i] * c.gw(i, j) * sol.a_gw(i, j);
                sol.od_rate += lambda[i] * c.od(i, j) * sol.a_od(i, j);
                sol.penalty_rate += lambda[i] * c.null(i, j) * sol.a_null(i, j);
                if (i != j) sol.relocation_rate += relocation_cost(inst, c, mu, i, j) * n_fd * sol.e(i, j);
            }
        }
        sol.cost_rate = res.objective_value;
        sol.lp_iterations = res.iterations;
        if (basis_out) *basis_out = std::move(res.basis);
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) sol.unmatched_demand += lambda[i] * sol.a_null(i, j);
    fill_slacks(sol, inst, lambda, n_gw, n_od);
    return sol;
}

OpsCost ops_cost(const Instance& inst, int n_fd, int n_gw, int n_od, int t) {
    OpsCost out;
    out.solution = solve_fluid(inst, n_fd, n_gw, n_od, t);
    out.cost = per_step(inst, out.solution.cost_rate);
    return out;
}

double service_level(const FluidSolution& sol, const std::vector<double>& demand) {
    const double total = std::accumulate(demand.begin(), demand.end(), 0.0);
    if (total <= 0.0) return 1.0;
    double lost = 0.0;
    for (int i = 0; i < sol.zones; ++i)
        for (int j = 0; j < sol.zones; ++j) lost += demand[i] * sol.a_null(i, j);
    return std::clamp(1.0 - lost / total, 0.0, 1.0);
}

UnmatchedShares unmatched_cd_shares(const FluidSolution& sol, const Instance& inst, int n_gw, int n_od) {
    UnmatchedShares s;
    auto share = [](const ZoneMatrix& slack, int fleet, double active) {
        if (fleet <= 0) return 0.0;
        const double drivers = std::accumulate(slack.data.begin(), slack.data.end(), 0.0) / active;
        return std::clamp(drivers / fleet, 0.0, 1.0);
    };
    s.gw = share(sol.gw_slack, n_gw, inst.gw.active_share);
    s.od = share(sol.od_slack, n_od, inst.od.active_share);
    return s;
}

OpsSummary summarize(const FluidSolution& sol, const Instance& inst, int n_gw, int n_od, int t) {
    const auto lambda = demand_rates(inst, t);
    OpsSummary s;
    s.cost_rate = sol.cost_rate;
    s.fd_rate = sol.fd_serving_rate + sol.relocation_rate;
    s.gw_rate = sol.gw_rate;
    s.od_rate = sol.od_rate;
    s.penalty_rate = sol.penalty_rate;
    s.unmatched_demand = sol.unmatched_demand;
    s.demand = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    s.shares = unmatched_cd_shares(sol, inst, n_gw, n_od);
    s.service_level = service_level(sol, lambda);
    return s;
}

OpsCostCache::OpsCostCache(Instance inst) : inst_(std::move(inst)) {}

OpsCostCache::OpsCostCache(const OpsCostCache& other) : inst_(other.inst_) {
    std::lock_guard lock(other.mu_);
    memo_ = other.memo_;
    group_basis_ = other.group_basis_;
    shape_basis_ = other.shape_basis_;
}

OpsSummary OpsCostCache::summary(int n_fd, int n_gw, int n_od, int t) {
    const Key key{n_fd, n_gw, n_od, t};
    const Group group{n_gw, n_od, t};
    const Shape shape{n_gw > 0, n_od > 0};
    lp::Basis warm;
    {
        std::lock_guard lock(mu_);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (n_fd > 0) {
            if (auto g = group_basis_.find(group); g != group_basis_.end())
                warm = g->second;
            else if (auto s = shape_basis_.find(shape); s != shape_basis_.end())
                warm = s->second;
        }
    }
    lp::Basis basis;
    FluidSolution sol;
    try {
        sol = solve_fluid(inst_, n_fd, n_gw, n_od, t, warm.empty() ? nullptr : &warm, &basis);
    } catch (const std::runtime_error& e) {
        throw SolverFailure(std::string(e.what()) + " at n_fd=" + std::to_string(n_fd) + " n_gw=" +
                            std::to_string(n_gw) + " n_od=" + std::to_string(n_od) + " t=" + std::to_string(t) +
                            (warm.empty() ? "" : " (warm)"));
    }
    const auto s = summarize(sol, inst_, n_gw, n_od, t);
    std::lock_guard lock(mu_);
    ++solves_;
    if (!basis.empty()) {
        if (group_basis_.size() > 4096) group_basis_.clear();
        group_basis_[group] = basis;
        shape_basis_[shape] = std::move(basis);
    }
    return memo_.emplace(key, s).first->second;
}

bool OpsCostCache::contains(int n_fd, int n_gw, int n_od, int t) const {
    std::lock_guard lock(mu_);
    return memo_.contains({n_fd, n_gw, n_od, t});
}

void OpsCostCache::insert(int n_fd, int n_gw, int n_od, int t, const OpsSummary& s) {
    std::lock_guard lock(mu_);
    memo_.emplace(Key{n_fd, n_gw, n_od, t}, s);
}

std::size_t OpsCostCache::size() const {
    std::lock_guard lock(mu_);
    return memo_.size();
}

std::size_t OpsCostCache::solves() const {
    std::lock_guard lock(mu_);
    return solves_;
}

int min_fd_full_service(OpsCostCache& cache, int n_gw, int n_od, int t) {
    const auto& inst = cache.instance();
    const auto lambda = demand_rates(inst, t);
    const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    auto served = [&](int n) { return cache.summary(n, n_gw, n_od, t).unmatched_demand <= 1e-6 * total; };
    if (total <= 0.0 || served(0)) return 0;

    const auto mu = service_rates(inst);
    const double mu_min = *std::min_element(mu.data.begin(), mu.data.end());
    const int limit = 10 * static_cast<int>(std::ceil(total / mu_min));
    int hi = 1;
    while (!served(hi)) {
        if (hi >= limit) throw Unreachable("demand cannot be fully served with up to " + std::to_string(limit) + " FDs");
        hi = std::min(2 * hi, limit);
    }
    int lo = hi / 2;  // not served (or zero, which was checked)
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (served(mid) ? hi : lo) = mid;
    }
    return hi;
}

int min_fd_full_service(const Instance& inst, int n_gw, int n_od, int t) {
    OpsCostCache cache(inst);
    return min_fd_full_service(cache, n_gw, n_od, t);
}

}  // namespace fleetplan
