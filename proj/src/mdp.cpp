#include "fleetplan/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fleetplan {

ActionRange action_space(const Instance& inst, const FleetState& s) {
    const auto& cfg = inst.strategic;
    return {cfg.no_firing ? 0 : -s.n_fd, std::max(0, cfg.cap_fd - s.n_fd)};
}

StepCost compose_total_cost(const Instance& inst, double ops, int fd_after, int action) {
    const auto& cfg = inst.strategic;
    StepCost c;
    c.ops = ops;
    c.fix = cfg.k_horizons * cfg.c_fix_per_horizon() * fd_after;
    if (action < 0 && !cfg.no_firing) c.sev = cfg.k_horizons * cfg.c_sev * -action;
    return c;
}

StepCost total_cost(OpsCostCache& cache, const FleetState& s, int action) {
    const auto& inst = cache.instance();
    if (!action_space(inst, s).contains(action))
        throw InfeasibleAction("action " + std::to_string(action) + " infeasible at n_fd=" + std::to_string(s.n_fd));
    const int after = s.n_fd + action;
    return compose_total_cost(inst, cache.cost(after, s.n_gw, s.n_od, s.t), after, action);
}

TurnoverProbs resignation_prob(const Instance& inst, std::optional<UnmatchedShares> shares) {
    const auto& m = inst.turnover;
    if (!m.matching_sensitive) return {m.p_fd, m.p_gw, m.p_od};
    if (!shares) throw MissingSolution("matching-sensitive resignation needs the operational solution");
    auto blend = [&](double share) { return m.p_high * share + m.p_low * (1.0 - share); };
    return {m.p_fd, blend(shares->gw), blend(shares->od)};
}

TurnoverProbs turnover_at(OpsCostCache& cache, const FleetState& post) {
    const auto& inst = cache.instance();
    if (!inst.turnover.matching_sensitive) return resignation_prob(inst);
    return resignation_prob(inst, cache.summary(post.n_fd, post.n_gw, post.n_od, post.t).shares);
}

std::vector<double> binomial_pmf(int n, double p) {
    std::vector<double> pmf(n + 1, 0.0);
    if (p <= 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (p >= 1.0) {
        pmf[n] = 1.0;
        return pmf;
    }
    const double lp = std::log(p), lq = std::log1p(-p);
    const double lgn = std::lgamma(n + 1.0);
    for (int k = 0; k <= n; ++k)
        pmf[k] = std::exp(lgn - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * lp + (n - k) * lq);
    // lgamma drift
    double total = 0.0;
    for (double v : pmf) total += v;
    for (double& v : pmf) v /= total;
    return pmf;
}

std::vector<double> fleet_count_pmf(int n, double p, double q, int cap) {
    const auto leave = binomial_pmf(n, p);
    const auto join = binomial_pmf(n, q);
    std::vector<double> out(cap + 1, 0.0);
    for (int x = 0; x <= n; ++x) {
        if (leave[x] == 0.0) continue;
        for (int y = 0; y <= n; ++y) out[std::min(cap, n - x + y)] += leave[x] * join[y];
    }
    return out;
}

std::vector<Outcome> transition_pmf(const Instance& inst, const FleetState& post, const TurnoverProbs& probs,
                                    std::size_t max_support) {
    const auto& cfg = inst.strategic;
    const auto fd = fleet_count_pmf(post.n_fd, probs.fd, 0.0, std::max(cfg.cap_fd, post.n_fd));
    const auto gw = fleet_count_pmf(post.n_gw, probs.gw, inst.turnover.q_gw, cfg.cap_gw);
    const auto od = fleet_count_pmf(post.n_od, probs.od, inst.turnover.q_od, cfg.cap_od);
    auto support = [](const std::vector<double>& v) {
        return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; }));
    };
    const std::size_t size = support(fd) * support(gw) * support(od);
    if (size > max_support)
        throw StateSpaceTooLarge("transition support " + std::to_string(size) + " exceeds " +
                                 std::to_string(max_support));
    std::vector<Outcome> out;
    out.reserve(size);
    for (int a = 0; a < static_cast<int>(fd.size()); ++a) {
        if (fd[a] == 0.0) continue;
        for (int b = 0; b < static_cast<int>(gw.size()); ++b) {
            if (gw[b] == 0.0) continue;
            for (int c = 0; c < static_cast<int>(od.size()); ++c) {
                if (od[c] == 0.0) continue;
                out.push_back({{a, b, c, post.t + 1}, fd[a] * gw[b] * od[c]});
            }
        }
    }
    return out;
}

int sample_binomial(int n, double p, Rng& rng) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (n > 64) return std::binomial_distribution<int>(n, p)(rng);
    // inverse CDF, one uniform per draw
    const double u = std::generate_canonical<double, 53>(rng);
    double prob = std::pow(1.0 - p, n);
    double cdf = prob;
    const double ratio = p / (1.0 - p);
    int k = 0;
    while (u >= cdf && k < n) {
        prob *= ratio * (n - k) / (k + 1);
        ++k;
        cdf += prob;
    }
    return k;
}

FleetState sample_transition(const Instance& inst, const FleetState& post, const TurnoverProbs& probs, Rng& cd_rng,
                             Rng& fd_rng) {
    const auto& cfg = inst.strategic;
    const auto& m = inst.turnover;
    FleetState next;
    next.t = post.t + 1;
    const int x_gw = sample_binomial(post.n_gw, probs.gw, cd_rng);
    const int y_gw = sample_binomial(post.n_gw, m.q_gw, cd_rng);
    const int x_od = sample_binomial(post.n_od, probs.od, cd_rng);
    const int y_od = sample_binomial(post.n_od, m.q_od, cd_rng);
    next.n_gw = std::min(cfg.cap_gw, post.n_gw - x_gw + y_gw);
    next.n_od = std::min(cfg.cap_od, post.n_od - x_od + y_od);
    next.n_fd = post.n_fd - sample_binomial(post.n_fd, probs.fd, fd_rng);
    return next;
}

FleetState sample_transition(const Instance& inst, const FleetState& post, const TurnoverProbs& probs, Rng& rng) {
    return sample_transition(inst, post, probs, rng, rng);
}

}  // namespace fleetplan
