#include "fleetplan/bdp.hpp"

#include "fleetplan/convex_search.hpp"
#include "fleetplan/mdp.hpp"
#include "text_io.hpp"

#include <map>
#include <ostream>
#include <string>

namespace fleetplan {

StateGrid StateGrid::of(const Instance& inst) {
    const auto& s = inst.strategic;
    return {s.cap_fd, s.cap_gw, s.cap_od, s.horizon};
}

std::size_t StateGrid::layer_size() const {
    return static_cast<std::size_t>(cap_fd + 1) * (cap_gw + 1) * (cap_od + 1);
}

bool StateGrid::contains(const FleetState& s) const {
    return s.n_fd >= 0 && s.n_fd <= cap_fd && s.n_gw >= 0 && s.n_gw <= cap_gw && s.n_od >= 0 && s.n_od <= cap_od &&
           s.t >= 0 && s.t <= horizon;
}

std::size_t StateGrid::index(const FleetState& s) const {
    if (!contains(s)) throw std::out_of_range("state outside the value table grid");
    return static_cast<std::size_t>(s.t) * layer_size() +
           (static_cast<std::size_t>(s.n_fd) * (cap_gw + 1) + s.n_gw) * (cap_od + 1) + s.n_od;
}

namespace {

void check_size(const StateGrid& grid, std::size_t limit) {
    if (grid.size() > limit)
        throw StateSpaceTooLarge("state grid has " + std::to_string(grid.size()) + " states, limit " +
                                 std::to_string(limit));
}

}  // namespace

ValueTable bdp_solve(const Instance& inst, const BdpOptions& opts) {
    const auto grid = StateGrid::of(inst);
    check_size(grid, opts.max_states);
    const int F = grid.cap_fd + 1, G = grid.cap_gw + 1, O = grid.cap_od + 1;
    const int cd_combos = G * O;
    const auto L = static_cast<std::ptrdiff_t>(grid.layer_size());
    const bool sensitive = inst.turnover.matching_sensitive;
    const bool exhaustive = opts.exhaustive_actions || sensitive;
    const double gamma = inst.strategic.gamma;
    auto at = [&](int k, int g, int o) { return (static_cast<std::ptrdiff_t>(k) * G + g) * O + o; };

    ValueTable out;
    out.grid = grid;
    out.values.assign(grid.size(), 0.0);
    out.actions.assign(grid.size(), 0);

    std::vector<lp::Basis> bases(L);
    std::vector<OpsSummary> ops(L);
    std::vector<double> next_value(L, 0.0), expected(L, 0.0), post_cost(L, 0.0);

    for (int t = grid.horizon; t >= 0; --t) {
        // Operational costs: one chain along n_fd per CD combination. Each LP starts from the
        // previous step's basis at the same state, else from its left neighbour in the chain.
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
        for (int w = 0; w < cd_combos; ++w) {
            const int g = w / O, o = w % O;
            for (int k = 0; k < F; ++k) {
                const auto idx = at(k, g, o);
                const lp::Basis* warm = nullptr;
                if (!bases[idx].empty())
                    warm = &bases[idx];
                else if (k > 1)
                    warm = &bases[at(k - 1, g, o)];
                lp::Basis basis;
                const auto sol = solve_fluid(inst, k, g, o, t, warm, &basis);
                if (!basis.empty()) bases[idx] = std::move(basis);
                ops[idx] = summarize(sol, inst, g, o, t);
            }
        }
        if (opts.share)
            for (int k = 0; k < F; ++k)
                for (int w = 0; w < cd_combos; ++w) opts.share->insert(k, w / O, w % O, t, ops[at(k, w / O, w % O)]);

        if (t == grid.horizon) {
            std::fill(expected.begin(), expected.end(), 0.0);
        } else if (!sensitive) {
            const auto probs = resignation_prob(inst);
            std::vector<std::vector<double>> fd_pmf(F), gw_pmf(G), od_pmf(O);
            for (int k = 0; k < F; ++k) fd_pmf[k] = fleet_count_pmf(k, probs.fd, 0.0, grid.cap_fd);
            for (int g = 0; g < G; ++g) gw_pmf[g] = fleet_count_pmf(g, probs.gw, inst.turnover.q_gw, grid.cap_gw);
            for (int o = 0; o < O; ++o) od_pmf[o] = fleet_count_pmf(o, probs.od, inst.turnover.q_od, grid.cap_od);
            // contract one dimension at a time: od, then gw, then fd
            std::vector<double> by_od(L), by_gw(L);
#pragma omp parallel for if (opts.parallel)
            for (std::ptrdiff_t i = 0; i < L; ++i) {
                const int o = static_cast<int>(i % O);
                const std::ptrdiff_t row = i - o;
                double s = 0.0;
                for (int c = 0; c < O; ++c) s += od_pmf[o][c] * next_value[row + c];
                by_od[i] = s;
            }
#pragma omp parallel for if (opts.parallel)
            for (std::ptrdiff_t i = 0; i < L; ++i) {
                const int o = static_cast<int>(i % O), g = static_cast<int>(i / O % G), a = static_cast<int>(i / O / G);
                double s = 0.0;
                for (int b = 0; b < G; ++b) s += gw_pmf[g][b] * by_od[at(a, b, o)];
                by_gw[i] = s;
            }
#pragma omp parallel for if (opts.parallel)
            for (std::ptrdiff_t i = 0; i < L; ++i) {
                const auto w = i % cd_combos;
                const int k = static_cast<int>(i / cd_combos);
                double s = 0.0;
                for (int a = 0; a <= k; ++a) s += fd_pmf[k][a] * by_gw[a * cd_combos + w];
                expected[i] = s;
            }
        } else {
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
            for (std::ptrdiff_t i = 0; i < L; ++i) {
                const int o = static_cast<int>(i % O), g = static_cast<int>(i / O % G), k = static_cast<int>(i / O / G);
                const auto probs = resignation_prob(inst, ops[i].shares);
                const auto fd = fleet_count_pmf(k, probs.fd, 0.0, grid.cap_fd);
                const auto gw = fleet_count_pmf(g, probs.gw, inst.turnover.q_gw, grid.cap_gw);
                const auto od = fleet_count_pmf(o, probs.od, inst.turnover.q_od, grid.cap_od);
                double s = 0.0;
                for (int a = 0; a <= k; ++a) {
                    if (fd[a] == 0.0) continue;
                    for (int b = 0; b < G; ++b) {
                        if (gw[b] == 0.0) continue;
                        double inner = 0.0;
                        for (int c = 0; c < O; ++c) inner += od[c] * next_value[at(a, b, c)];
                        s += fd[a] * gw[b] * inner;
                    }
                }
                expected[i] = s;
            }
        }

        for (std::ptrdiff_t i = 0; i < L; ++i) {
            const int k = static_cast<int>(i / cd_combos);
            post_cost[i] = compose_total_cost(inst, per_step(inst, ops[i].cost_rate), k, 0).total() + gamma * expected[i];
        }

        const auto base = static_cast<std::ptrdiff_t>(t) * L;
#pragma omp parallel for if (opts.parallel)
        for (std::ptrdiff_t i = 0; i < L; ++i) {
            const int o = static_cast<int>(i % O), g = static_cast<int>(i / O % G), n = static_cast<int>(i / O / G);
            const auto range = action_space(inst, {n, g, o, t});
            auto f = [&](int a) {
                return post_cost[at(n + a, g, o)] + compose_total_cost(inst, 0.0, 0, a).sev;
            };
            const auto best = exhaustive ? scan_int_argmin(f, range.lo, range.hi)
                                         : convex_int_argmin(f, range.lo, range.hi, 0);
            out.values[base + i] = best.value;
            out.actions[base + i] = best.x;
        }
        std::copy(out.values.begin() + base, out.values.begin() + base + L, next_value.begin());
    }
    return out;
}

ValueTable bdp_reference(OpsCostCache& cache, std::size_t max_states) {
    const auto& inst = cache.instance();
    const auto grid = StateGrid::of(inst);
    check_size(grid, max_states);
    ValueTable out;
    out.grid = grid;
    out.values.assign(grid.size(), 0.0);
    out.actions.assign(grid.size(), 0);
    for (int t = grid.horizon; t >= 0; --t) {
        std::map<FleetState, double> expectation;
        auto expect = [&](const FleetState& post) {
            if (auto it = expectation.find(post); it != expectation.end()) return it->second;
            double v = 0.0;
            for (const auto& o : transition_pmf(inst, post, turnover_at(cache, post)))
                v += o.probability * out.value(o.next);
            return expectation.emplace(post, v).first->second;
        };
        for (int n = 0; n <= grid.cap_fd; ++n)
            for (int g = 0; g <= grid.cap_gw; ++g)
                for (int o = 0; o <= grid.cap_od; ++o) {
                    const FleetState s{n, g, o, t};
                    const auto range = action_space(inst, s);
                    auto f = [&](int a) {
                        double v = total_cost(cache, s, a).total();
                        if (t < grid.horizon) v += inst.strategic.gamma * expect({n + a, g, o, t});
                        return v;
                    };
                    const auto best = scan_int_argmin(f, range.lo, range.hi);
                    out.values[grid.index(s)] = best.value;
                    out.actions[grid.index(s)] = best.x;
                }
    }
    return out;
}

void save_value_table(const ValueTable& table, std::ostream& out) {
    const auto& g = table.grid;
    out << "fleetplan-values 1\n";
    out << "grid " << g.cap_fd << ' ' << g.cap_gw << ' ' << g.cap_od << ' ' << g.horizon << '\n';
    for (int t = 0; t <= g.horizon; ++t)
        for (int n = 0; n <= g.cap_fd; ++n)
            for (int w = 0; w <= g.cap_gw; ++w)
                for (int o = 0; o <= g.cap_od; ++o) {
                    const auto i = g.index({n, w, o, t});
                    out << t << ' ' << n << ' ' << w << ' ' << o << ' ' << detail::exact(table.values[i]) << ' '
                        << table.actions[i] << '\n';
                }
}

ValueTable load_value_table(std::istream& in) {
    using detail::read_token;
    detail::expect_word<FormatError>(in, "fleetplan-values");
    const int version = read_token<int, FormatError>(in, "version");
    if (version != 1) throw FormatError("unsupported value table version " + std::to_string(version));
    detail::expect_word<FormatError>(in, "grid");
    ValueTable table;
    auto& g = table.grid;
    g.cap_fd = read_token<int, FormatError>(in, "cap_fd");
    g.cap_gw = read_token<int, FormatError>(in, "cap_gw");
    g.cap_od = read_token<int, FormatError>(in, "cap_od");
    g.horizon = read_token<int, FormatError>(in, "horizon");
    if (g.cap_fd < 0 || g.cap_gw < 0 || g.cap_od < 0 || g.horizon < 0) throw FormatError("negative grid size");
    table.values.assign(g.size(), 0.0);
    table.actions.assign(g.size(), 0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        FleetState s;
        s.t = read_token<int, FormatError>(in, "t");
        s.n_fd = read_token<int, FormatError>(in, "n_fd");
        s.n_gw = read_token<int, FormatError>(in, "n_gw");
        s.n_od = read_token<int, FormatError>(in, "n_od");
        if (!g.contains(s)) throw FormatError("state outside grid in value table");
        const auto i = g.index(s);
        table.values[i] = read_token<double, FormatError>(in, "value");
        table.actions[i] = read_token<int, FormatError>(in, "action");
    }
    return table;
}

}  // namespace fleetplan
