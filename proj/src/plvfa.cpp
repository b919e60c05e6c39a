#include "fleetplan/plvfa.hpp"

#include "fleetplan/bdp.hpp"
#include "fleetplan/convex_search.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace fleetplan {

AggregatedFleet aggregate(int n_gw, int n_od, int k_gw, int k_od) {
    if (k_gw < 1 || k_od < 1) throw std::invalid_argument("aggregation factors must be at least 1");
    return {n_gw / k_gw, n_od / k_od};
}

SlopeTable SlopeTable::empty_for(const Instance& inst, int k_gw, int k_od, double alpha) {
    SlopeTable t;
    t.horizon = inst.strategic.horizon;
    t.cap_fd = inst.strategic.cap_fd;
    t.k_gw = k_gw;
    t.k_od = k_od;
    t.alpha = alpha;
    return t;
}

SlopeTable::Key SlopeTable::key(const FleetState& s) const {
    const auto w = aggregate(s.n_gw, s.n_od, k_gw, k_od);
    return {s.t, w.gw, w.od};
}

const std::vector<double>* SlopeTable::row(const FleetState& s) const {
    const auto it = rows.find(key(s));
    return it == rows.end() ? nullptr : &it->second;
}

std::vector<double>& SlopeTable::row_for_update(const FleetState& s) {
    auto& r = rows[key(s)];
    if (r.empty()) r.assign(cap_fd, 0.0);
    return r;
}

double SlopeTable::slope(const FleetState& s, int k) const {
    const auto* r = row(s);
    if (!r || k < 1 || k > static_cast<int>(r->size())) return 0.0;
    return (*r)[k - 1];
}

double SlopeTable::cumulative(const FleetState& s, int n) const {
    const auto* r = row(s);
    if (!r) return 0.0;
    const int upto = std::min<int>(n, static_cast<int>(r->size()));
    double sum = 0.0;
    for (int k = 0; k < upto; ++k) sum += (*r)[k];
    return sum;
}

namespace {

// Conv around the pair (left, right); either end may fall outside z.
void project_around(std::vector<double>& z, int left, int right) {
    const int n = static_cast<int>(z.size());
    if (left >= 0)
        for (int k = 0; k < left; ++k) z[k] = std::min(z[k], z[left]);
    if (right < n)
        for (int k = right + 1; k < n; ++k) z[k] = std::max(z[k], z[right]);
}

}  // namespace

std::vector<double> conv_project(std::vector<double> z, int idx) {
    if (idx < 0 || idx + 1 >= static_cast<int>(z.size()))
        throw IndexOutOfRange("conv_project index " + std::to_string(idx) + " outside slope vector of size " +
                              std::to_string(z.size()));
    project_around(z, idx, idx + 1);
    return z;
}

GreedyChoice plvfa_greedy_action(OpsCostCache& cache, const FleetState& s, const SlopeTable& slopes) {
    const auto& inst = cache.instance();
    const auto range = action_space(inst, s);
    const double gamma = inst.strategic.gamma;
    const auto* row = slopes.row(s);
    std::vector<double> prefix(range.hi + s.n_fd + 1, 0.0);
    for (int k = 1; k < static_cast<int>(prefix.size()); ++k)
        prefix[k] = prefix[k - 1] + (row && k <= static_cast<int>(row->size()) ? (*row)[k - 1] : 0.0);
    auto f = [&](int a) { return total_cost(cache, s, a).total() + gamma * prefix[s.n_fd + a]; };
    const auto best = convex_int_argmin(f, range.lo, range.hi, 0);
    return {best.x, best.value};
}

TrainResult plvfa_train(OpsCostCache& cache, const PlvfaConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    if (cfg.episodes < 0) throw std::invalid_argument("episodes must be non-negative");
    const auto& inst = cache.instance();
    const auto& strat = inst.strategic;
    TrainResult res;
    res.table = SlopeTable::empty_for(inst, cfg.k_gw, cfg.k_od, cfg.alpha);
    auto& table = res.table;
    std::map<SlopeTable::Key, int> visits;
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const int noise = std::max(1, strat.cap_fd / 10);

    for (int e = 0; e < cfg.episodes; ++e) {
        const double eps = cfg.epsilon * (1.0 - static_cast<double>(e) / cfg.episodes);
        FleetState s = cfg.start == PlvfaConfig::Start::point
                           ? cfg.start_state
                           : FleetState{uniform_int(0, strat.cap_fd), uniform_int(0, strat.cap_gw),
                                        uniform_int(0, strat.cap_od), 0};
        s.t = 0;
        double cost = 0.0, discount = 1.0;
        for (int t = 0; t <= strat.horizon; ++t) {
            s.t = t;
            const auto range = action_space(inst, s);
            int a = plvfa_greedy_action(cache, s, table).action;
            if (eps > 0.0 && unit(rng) < eps) a = std::clamp(a + uniform_int(-noise, noise), range.lo, range.hi);
            cost += discount * total_cost(cache, s, a).total();
            discount *= strat.gamma;
            const FleetState post{s.n_fd + a, s.n_gw, s.n_od, t};
            if (t == strat.horizon) break;

            // FD outcomes at n-1, n and n+1 post-decision FDs share their draws
            const auto probs = turnover_at(cache, post);
            const auto cd = sample_transition(inst, {0, post.n_gw, post.n_od, t}, probs, rng);
            const int na = post.n_fd;
            const int common = na >= 1 ? sample_binomial(na - 1, probs.fd, rng) : 0;
            const int b1 = na >= 1 ? sample_binomial(1, probs.fd, rng) : 0;
            const int b2 = sample_binomial(1, probs.fd, rng);
            const FleetState next{na - common - b1, cd.n_gw, cd.n_od, t + 1};
            auto value_at = [&](int n_fd) {
                FleetState x = next;
                x.n_fd = n_fd;
                return plvfa_greedy_action(cache, x, table).value;
            };
            const double v_mid = value_at(next.n_fd);
            const bool has_left = na >= 1, has_right = na + 1 <= strat.cap_fd;
            const double v_left = has_left ? v_mid - value_at(na - 1 - common) : 0.0;
            const double v_right = has_right ? value_at(na + 1 - common - b1 - b2) - v_mid : 0.0;

            auto& z = table.row_for_update(post);
            double step = cfg.alpha;
            if (cfg.rate == PlvfaConfig::Rate::harmonic)
                step = std::max(cfg.alpha, 1.0 / ++visits[table.key(post)]);
            const int left = na - 1, right = na;  // vector positions of v(na), v(na + 1)
            if (has_left) z[left] = (1.0 - step) * z[left] + step * v_left;
            if (has_right) z[right] = (1.0 - step) * z[right] + step * v_right;
            if (has_left && has_right && z[left] > z[right]) {
                z[left] = z[right] = 0.5 * (z[left] + z[right]);
                ++res.pair_repairs;
            }
            project_around(z, has_left ? left : -1, has_right ? right : static_cast<int>(z.size()));
            s = next;
        }
        res.episode_costs.push_back(cost);
    }
    return res;
}

void save_slope_table(const SlopeTable& table, std::ostream& out) {
    out << "fleetplan-slopes 1\n";
    out << "horizon " << table.horizon << " cap_fd " << table.cap_fd << " k_gw " << table.k_gw << " k_od "
        << table.k_od << " alpha " << detail::exact(table.alpha) << " rows " << table.rows.size() << '\n';
    for (const auto& [key, z] : table.rows) {
        out << std::get<0>(key) << ' ' << std::get<1>(key) << ' ' << std::get<2>(key);
        for (double v : z) out << ' ' << detail::exact(v);
        out << '\n';
    }
}

SlopeTable load_slope_table(std::istream& in) {
    using detail::expect_word;
    using detail::read_token;
    try {
        expect_word<FormatError>(in, "fleetplan-slopes");
        const int version = read_token<int, FormatError>(in, "version");
        if (version != 1) throw FormatError("unsupported slope table version " + std::to_string(version));
        SlopeTable t;
        expect_word<FormatError>(in, "horizon");
        t.horizon = read_token<int, FormatError>(in, "horizon");
        expect_word<FormatError>(in, "cap_fd");
        t.cap_fd = read_token<int, FormatError>(in, "cap_fd");
        expect_word<FormatError>(in, "k_gw");
        t.k_gw = read_token<int, FormatError>(in, "k_gw");
        expect_word<FormatError>(in, "k_od");
        t.k_od = read_token<int, FormatError>(in, "k_od");
        expect_word<FormatError>(in, "alpha");
        t.alpha = read_token<double, FormatError>(in, "alpha");
        expect_word<FormatError>(in, "rows");
        const auto count = read_token<std::size_t, FormatError>(in, "rows");
        if (t.cap_fd < 0 || t.k_gw < 1 || t.k_od < 1) throw FormatError("bad slope table header");
        for (std::size_t r = 0; r < count; ++r) {
            const int step = read_token<int, FormatError>(in, "t");
            const int g = read_token<int, FormatError>(in, "gw bucket");
            const int o = read_token<int, FormatError>(in, "od bucket");
            std::vector<double> z(t.cap_fd);
            for (double& v : z) v = read_token<double, FormatError>(in, "slope");
            t.rows.emplace(SlopeTable::Key{step, g, o}, std::move(z));
        }
        return t;
    } catch (const FormatError& e) {
        throw FormatError(std::string("slope table: ") + e.what());
    }
}

}  // namespace fleetplan
