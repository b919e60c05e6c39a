#include "fleetplan/queue_sim.hpp"

#include "fleetplan/mdp.hpp"
#include "fleetplan/report.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace fleetplan {

RoutingMatrix derive_routing(const Instance& inst, const FluidSolution& sol) {
    const int m = inst.zones;
    RoutingMatrix r{ZoneMatrix(m)};
    if (sol.n_fd == 0 || sol.f.n != m) {
        for (int i = 0; i < m; ++i) r.q(i, i) = 1.0;
        return r;
    }
    const auto mu = service_rates(inst);
    for (int i = 0; i < m; ++i) {
        double inflow = 0.0;
        for (int k = 0; k < m; ++k) inflow += mu(k, i) * std::max(0.0, sol.f(k, i));
        double out = 0.0;
        if (inflow > 1e-12)
            for (int j = 0; j < m; ++j)
                if (j != i) {
                    r.q(i, j) = mu(i, j) * std::max(0.0, sol.e(i, j)) / inflow;
                    out += r.q(i, j);
                }
        if (out > 1.0) {
            for (int j = 0; j < m; ++j) r.q(i, j) /= out;
            out = 1.0;
        }
        r.q(i, i) = 1.0 - out;
    }
    return r;
}

namespace {

struct Event {
    double time;
    int zone;
    bool loaded;  // delivery finished (true) or relocation finished (false)
    bool operator>(const Event& o) const {
        if (time != o.time) return time > o.time;
        if (zone != o.zone) return zone > o.zone;
        return loaded < o.loaded;
    }
};

// Drivers that arrived in recent slots, oldest first.
class Pool {
public:
    void arrive(int count) { ages_.push_back(count); }
    bool take() {
        for (auto& c : ages_)
            if (c > 0) {
                --c;
                return true;
            }
        return false;
    }
    void expire(int lifetime) {
        while (static_cast<int>(ages_.size()) >= lifetime && !ages_.empty()) ages_.pop_front();
    }

private:
    std::deque<int> ages_;
};

std::vector<int> spread(int total, const std::vector<double>& weights) {
    const int m = static_cast<int>(weights.size());
    std::vector<int> out(m, 0);
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (m == 0 || total == 0) return out;
    std::vector<std::pair<double, int>> rest;
    int placed = 0;
    for (int i = 0; i < m; ++i) {
        const double share = sum > 0.0 ? total * weights[i] / sum : static_cast<double>(total) / m;
        out[i] = static_cast<int>(std::floor(share));
        placed += out[i];
        rest.push_back({share - out[i], i});
    }
    std::stable_sort(rest.begin(), rest.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (int k = 0; placed < total; ++k, ++placed) ++out[rest[k % m].second];
    return out;
}

}  // namespace

SimStats simulate(const Instance& inst, int n_fd, int n_gw, int n_od, int t, const RoutingMatrix& routing,
                  const SimOptions& opts, std::uint64_t seed) {
    if (!(opts.slot_minutes > 0.0) || !(opts.hours > 0.0) || opts.batches < 1 || opts.cd_lifetime_slots < 1)
        throw std::invalid_argument("simulation needs positive hours, slot length, batches and CD lifetime");
    const int m = inst.zones;
    const auto lambda = demand_rates(inst, t);
    const auto [gw_rate, od_rate] = cd_arrival_rates(inst, n_gw, n_od);
    const auto c = cost_matrices(inst);
    const auto& P = inst.request_pattern;
    const auto& Pod = inst.od.route_pattern;
    const double h = opts.slot_minutes / 60.0;
    const long slots = std::max(1L, std::lround(opts.hours / h));
    const long warm = static_cast<long>(std::floor(opts.warmup_share * slots));
    const long batch_len = std::max(1L, (slots - warm) / opts.batches);
    const long measured_end = warm + batch_len * opts.batches;

    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto travel = [&](int i, int j) {
        const double mean = inst.distance_km(i, j) / inst.speed_kmh;
        return opts.exponential_travel ? std::exponential_distribution<double>(1.0 / mean)(rng) : mean;
    };
    auto poisson = [&](double mean) { return mean > 0.0 ? std::poisson_distribution<int>(mean)(rng) : 0; };

    SimStats st;
    st.requests = st.by_fd = st.by_gw = st.by_od = st.penalized = ZoneMatrix(m);
    st.idle_share.assign(m, 0.0);
    std::vector<double> idle_hours(m, 0.0), batch_cost(opts.batches, 0.0);

    auto idle = spread(n_fd, inst.demand_weights);
    std::priority_queue<Event, std::vector<Event>, std::greater<>> busy;
    std::vector<Pool> gw_pool(m), od_pool(static_cast<std::size_t>(m) * m);
    std::vector<std::pair<int, int>> requests;

    for (long s = 0; s < measured_end; ++s) {
        const double now = s * h;
        const bool measuring = s >= warm;
        double cost = 0.0;
        while (!busy.empty() && busy.top().time <= now) {
            const Event e = busy.top();
            busy.pop();
            int dest = e.zone;
            if (e.loaded) {
                double u = unit(rng), acc = 0.0;
                for (int k = 0; k < m; ++k) {
                    acc += routing.q(e.zone, k);
                    if (u < acc) {
                        dest = k;
                        break;
                    }
                }
            }
            if (dest != e.zone) {
                busy.push({e.time + travel(e.zone, dest), dest, false});
                cost += c.fd(e.zone, dest);
                if (measuring) st.relocation_km += inst.distance_km(e.zone, dest);
            } else {
                ++idle[e.zone];
            }
        }

        requests.clear();
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int k = poisson(lambda[i] * P(i, j) * h); k > 0; --k) requests.push_back({i, j});
        for (int i = 0; i < m; ++i) gw_pool[i].arrive(poisson(gw_rate[i] * h));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) od_pool[i * m + j].arrive(poisson(od_rate[i] * Pod(i, j) * h));
        std::shuffle(requests.begin(), requests.end(), rng);

        for (const auto& [i, j] : requests) {
            if (measuring) st.requests(i, j) += 1;
            if (idle[i] > 0) {
                --idle[i];
                busy.push({now + travel(i, j), j, true});
                cost += c.fd(i, j);
                if (measuring) st.by_fd(i, j) += 1;
                continue;
            }
            // cheaper CD first, GW on ties, never above the penalty
            const bool gw_first = c.gw(i, j) <= c.od(i, j);
            auto try_gw = [&] {
                if (c.gw(i, j) >= c.null(i, j) || !gw_pool[i].take()) return false;
                cost += c.gw(i, j);
                if (measuring) st.by_gw(i, j) += 1;
                return true;
            };
            auto try_od = [&] {
                if (c.od(i, j) >= c.null(i, j) || !od_pool[i * m + j].take()) return false;
                cost += c.od(i, j);
                if (measuring) st.by_od(i, j) += 1;
                return true;
            };
            const bool matched = gw_first ? (try_gw() || try_od()) : (try_od() || try_gw());
            if (!matched) {
                cost += c.null(i, j);
                if (measuring) st.penalized(i, j) += 1;
            }
        }
        for (auto& p : gw_pool) p.expire(opts.cd_lifetime_slots);
        for (auto& p : od_pool) p.expire(opts.cd_lifetime_slots);

        if (measuring) {
            batch_cost[(s - warm) / batch_len] += cost;
            for (int i = 0; i < m; ++i) idle_hours[i] += idle[i] * h;
        }
    }

    const double batch_hours = batch_len * h;
    st.measured_hours = batch_hours * opts.batches;
    std::vector<double> rates;
    for (double bc : batch_cost) rates.push_back(bc / batch_hours);
    st.cost_rate = std::accumulate(rates.begin(), rates.end(), 0.0) / rates.size();
    if (rates.size() > 1) {
        double ss = 0.0;
        for (double r : rates) ss += (r - st.cost_rate) * (r - st.cost_rate);
        const double sd = std::sqrt(ss / (rates.size() - 1));
        const boost::math::students_t dist(static_cast<double>(rates.size() - 1));
        st.half_width = boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(rates.size()));
    }
    if (n_fd > 0)
        for (int i = 0; i < m; ++i) st.idle_share[i] = idle_hours[i] / (n_fd * st.measured_hours);
    return st;
}

BoundCheck fluid_bound_check(const SimStats& sim, double lp_rate) {
    return {sim.cost_rate + sim.half_width >= lp_rate - 1e-6 * std::abs(lp_rate), sim.cost_rate - lp_rate};
}

void write_sim_csv(std::ostream& out, const SimStats& sim) {
    out << "i,j,requests,fd,gw,od,penalized\n";
    for (int i = 0; i < sim.requests.n; ++i)
        for (int j = 0; j < sim.requests.n; ++j)
            out << i << ',' << j << ',' << csv_number(sim.requests(i, j)) << ',' << csv_number(sim.by_fd(i, j)) << ','
                << csv_number(sim.by_gw(i, j)) << ',' << csv_number(sim.by_od(i, j)) << ','
                << csv_number(sim.penalized(i, j)) << '\n';
}

}  // namespace fleetplan
