#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "fleetplan/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

using namespace fleetplan;

namespace {

Instance zero_turnover(Instance inst) {
    inst.turnover = {0.0, 0.0, 0.0, 0.0, 0.0, false, 1.0, 0.0};
    return inst;
}

double total_probability(const std::vector<Outcome>& pmf) {
    double s = 0.0;
    for (const auto& o : pmf) s += o.probability;
    return s;
}

double probability_of(const std::vector<Outcome>& pmf, FleetState s) {
    for (const auto& o : pmf)
        if (o.next == s) return o.probability;
    return 0.0;
}

// Independent oracle: direct product of binomial terms, clamped and merged.
std::map<FleetState, double> oracle_pmf(const Instance& inst, const FleetState& post) {
    const auto& tm = inst.turnover;
    const auto& st = inst.strategic;
    std::map<FleetState, double> out;
    for (int xf = 0; xf <= post.n_fd; ++xf)
        for (int xg = 0; xg <= post.n_gw; ++xg)
            for (int yg = 0; yg <= post.n_gw; ++yg)
                for (int xo = 0; xo <= post.n_od; ++xo)
                    for (int yo = 0; yo <= post.n_od; ++yo) {
                        const double p = fixtures::binomial(post.n_fd, xf, tm.p_fd) *
                                         fixtures::binomial(post.n_gw, xg, tm.p_gw) *
                                         fixtures::binomial(post.n_gw, yg, tm.q_gw) *
                                         fixtures::binomial(post.n_od, xo, tm.p_od) *
                                         fixtures::binomial(post.n_od, yo, tm.q_od);
                        FleetState next{post.n_fd - xf, std::min(st.cap_gw, post.n_gw - xg + yg),
                                        std::min(st.cap_od, post.n_od - xo + yo), post.t + 1};
                        out[next] += p;
                    }
    return out;
}

}  // namespace

TEST_CASE("step cost composition") {
    auto inst = fixtures::single_zone(0.0);
    inst.strategic.no_firing = false;
    inst.strategic.c_sev = 3.0;
    inst.strategic.c_fix_per_hour = 10.0;
    inst.strategic.hours_per_ops_horizon = 1.0;
    const auto c = compose_total_cost(inst, 100.0, 3, -2);
    CHECK(c.total() == doctest::Approx(136.0));
    CHECK(c.fix == doctest::Approx(30.0));
    CHECK(c.sev == doctest::Approx(6.0));

    inst.strategic.k_horizons = 2;
    CHECK(compose_total_cost(inst, 100.0, 3, -2).total() == doctest::Approx(100.0 + 2 * 36.0));

    OpsCostCache cache(fixtures::single_zone(0.0));
    CHECK(total_cost(cache, {0, 0, 0, 0}, 0).total() == 0.0);
}

TEST_CASE("no-firing excludes layoffs") {
    auto inst = fixtures::single_zone(10.0);
    inst.strategic.cap_fd = 10;
    inst.strategic.no_firing = true;
    OpsCostCache cache(inst);
    CHECK_THROWS_AS(total_cost(cache, {2, 0, 0, 0}, -1), InfeasibleAction);
    CHECK_THROWS_AS(total_cost(cache, {2, 0, 0, 0}, 9), InfeasibleAction);
    // severance is ignored when layoffs are impossible anyway
    inst.strategic.c_sev = 50.0;
    CHECK(compose_total_cost(inst, 0.0, 2, 0).sev == 0.0);
}

TEST_CASE("action space") {
    auto inst = fixtures::single_zone(1.0);
    inst.strategic.cap_fd = 10;
    inst.strategic.no_firing = false;
    auto r = action_space(inst, {5, 0, 0, 0});
    CHECK(r.lo == -5);
    CHECK(r.hi == 5);
    inst.strategic.no_firing = true;
    r = action_space(inst, {5, 0, 0, 0});
    CHECK(r.lo == 0);
    CHECK(r.hi == 5);
    CHECK(action_space(inst, {10, 0, 0, 0}).hi == 0);
    CHECK(r.contains(3));
    CHECK_FALSE(r.contains(-1));
}

TEST_CASE("resignation probabilities") {
    auto inst = fixtures::single_zone(1.0);
    inst.turnover.p_fd = inst.turnover.p_gw = inst.turnover.p_od = 0.01;
    const auto flat = resignation_prob(inst);
    CHECK(flat.fd == 0.01);
    CHECK(flat.gw == 0.01);
    CHECK(flat.od == 0.01);

    inst.turnover.matching_sensitive = true;
    inst.turnover.p_high = 1.0;
    inst.turnover.p_low = 0.01;
    CHECK_THROWS_AS(resignation_prob(inst), MissingSolution);
    const auto all = resignation_prob(inst, UnmatchedShares{1.0, 1.0});
    CHECK(all.gw == 1.0);
    CHECK(all.od == 1.0);
    const auto half = resignation_prob(inst, UnmatchedShares{0.5, 0.0});
    CHECK(half.gw == doctest::Approx(0.505));
    CHECK(half.od == doctest::Approx(0.01));
    CHECK(half.fd == 0.01);
}

TEST_CASE("binomial pmf") {
    const auto pmf = binomial_pmf(2, 0.01);
    CHECK(pmf[2] == doctest::Approx(0.0001));
    CHECK(pmf[1] == doctest::Approx(0.0198));
    CHECK(pmf[0] == doctest::Approx(0.9801));
    CHECK(binomial_pmf(0, 0.3) == std::vector<double>{1.0});
    CHECK(binomial_pmf(5, 0.0)[0] == 1.0);
    CHECK(binomial_pmf(5, 1.0)[5] == 1.0);
    for (int n : {1, 17, 200, 3000}) {
        const auto p = binomial_pmf(n, 0.09);
        CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        double mean = 0.0;
        for (int k = 0; k <= n; ++k) mean += k * p[k];
        CHECK(mean == doctest::Approx(0.09 * n).epsilon(1e-9));
    }
}

TEST_CASE("transition examples") {
    auto inst = fixtures::single_zone(1.0);
    inst.turnover = {0.01, 0.01, 0.01, 0.09, 0.09, false, 1.0, 0.01};
    inst.strategic.cap_fd = inst.strategic.cap_gw = inst.strategic.cap_od = 10;
    const auto probs = resignation_prob(inst);

    const auto fd_only = transition_pmf(inst, {2, 0, 0, 0}, probs);
    CHECK(probability_of(fd_only, {2, 0, 0, 1}) == doctest::Approx(0.9801).epsilon(1e-12));
    CHECK(probability_of(fd_only, {1, 0, 0, 1}) == doctest::Approx(0.0198).epsilon(1e-12));
    CHECK(probability_of(fd_only, {0, 0, 0, 1}) == doctest::Approx(0.0001).epsilon(1e-12));

    // one FD stays and the GW count is unchanged: either nobody moves or one leaves and one joins
    const auto mixed = transition_pmf(inst, {1, 1, 0, 0}, probs);
    CHECK(probability_of(mixed, {1, 1, 0, 1}) == doctest::Approx(0.99 * (0.99 * 0.91 + 0.01 * 0.09)).epsilon(1e-12));

    const auto empty = transition_pmf(inst, {0, 0, 0, 4}, probs);
    REQUIRE(empty.size() == 1);
    CHECK(empty[0].next == FleetState{0, 0, 0, 5});
    CHECK(empty[0].probability == 1.0);
}

TEST_CASE("transition pmf agrees with a direct product of binomials") {
    auto inst = fixtures::tiny_instance();
    const auto probs = resignation_prob(inst);
    for (int f = 0; f <= 4; ++f)
        for (int g = 0; g <= 4; ++g)
            for (int o = 0; o <= 4; ++o) {
                const FleetState post{f, g, o, 1};
                const auto pmf = transition_pmf(inst, post, probs);
                CHECK(total_probability(pmf) == doctest::Approx(1.0).epsilon(1e-12));
                const auto oracle = oracle_pmf(inst, post);
                CHECK(pmf.size() == oracle.size());
                for (const auto& out : pmf) CHECK(out.probability == doctest::Approx(oracle.at(out.next)).epsilon(1e-12));
                for (std::size_t k = 1; k < pmf.size(); ++k) CHECK(pmf[k - 1].next < pmf[k].next);
            }
    CHECK_THROWS_AS(transition_pmf(inst, {4, 4, 4, 0}, probs, 10), StateSpaceTooLarge);
}

TEST_CASE("fleet count pmf clamps at the cap") {
    const auto pmf = fleet_count_pmf(3, 0.2, 0.5, 4);
    REQUIRE(pmf.size() == 5);
    double tail = 0.0;
    for (int x = 0; x <= 3; ++x)
        for (int y = 0; y <= 3; ++y)
            if (3 - x + y >= 4) tail += fixtures::binomial(3, x, 0.2) * fixtures::binomial(3, y, 0.5);
    CHECK(pmf[4] == doctest::Approx(tail).epsilon(1e-12));
    CHECK(std::accumulate(pmf.begin(), pmf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sampling edge cases") {
    auto inst = zero_turnover(fixtures::tiny_instance());
    Rng rng(3);
    const auto probs = resignation_prob(inst);
    for (int k = 0; k < 50; ++k) CHECK(sample_transition(inst, {3, 2, 4, 1}, probs, rng) == FleetState{3, 2, 4, 2});

    inst.turnover.p_fd = 1.0;
    for (int k = 0; k < 50; ++k) CHECK(sample_transition(inst, {4, 1, 1, 0}, resignation_prob(inst), rng).n_fd == 0);

    for (int n : {0, 10, 64, 65, 500}) {
        CHECK(sample_binomial(n, 0.0, rng) == 0);
        CHECK(sample_binomial(n, 1.0, rng) == n);
    }
}

TEST_CASE("sampled GW mean matches the binomial drift") {
    auto inst = fixtures::single_zone(1.0);
    inst.turnover = {0.01, 0.01, 0.01, 0.09, 0.09, false, 1.0, 0.01};
    inst.strategic.cap_gw = 1000;
    Rng rng(2024);
    const int N = 100000;
    double sum = 0.0;
    for (int k = 0; k < N; ++k) sum += sample_transition(inst, {0, 100, 0, 0}, resignation_prob(inst), rng).n_gw;
    const double sigma = std::sqrt(100 * 0.01 * 0.99 + 100 * 0.09 * 0.91);
    CHECK(std::abs(sum / N - 108.0) <= 3.0 * sigma / std::sqrt(N));
}

TEST_CASE("empirical frequencies match the enumerated pmf") {
    auto inst = fixtures::tiny_instance();
    const auto probs = resignation_prob(inst);
    for (const FleetState post : {FleetState{2, 3, 1, 0}, FleetState{4, 4, 4, 1}, FleetState{1, 0, 2, 2}}) {
        const auto pmf = transition_pmf(inst, post, probs);
        std::map<FleetState, int> counts;
        Rng cd(17), fd(18);
        const int N = 100000;
        for (int k = 0; k < N; ++k) ++counts[sample_transition(inst, post, probs, cd, fd)];
        // outcomes expected fewer than 5 times are pooled into one bin
        auto within = [&](double p, int count) {
            const double se = std::sqrt(p * (1.0 - p) / N);
            return std::abs(count / double(N) - p) <= 4.0 * se;
        };
        double rare_p = 0.0;
        int rare_count = 0;
        for (const auto& o : pmf) {
            if (o.probability * N < 5.0) {
                rare_p += o.probability;
                rare_count += counts[o.next];
            } else {
                CHECK(within(o.probability, counts[o.next]));
            }
        }
        if (rare_p * N >= 5.0) CHECK(within(rare_p, rare_count));
        else CHECK(rare_count <= 20);
        int seen = 0;
        for (const auto& [s, c] : counts) seen += c;
        CHECK(seen == N);
    }
}

TEST_CASE("CD draws do not depend on the FD fleet") {
    auto inst = fixtures::tiny_instance();
    const auto probs = resignation_prob(inst);
    for (int seed = 0; seed < 20; ++seed) {
        Rng cd1(seed), fd1(100 + seed), cd2(seed), fd2(100 + seed);
        const auto a = sample_transition(inst, {0, 3, 2, 0}, probs, cd1, fd1);
        const auto b = sample_transition(inst, {4, 3, 2, 0}, probs, cd2, fd2);
        CHECK(a.n_gw == b.n_gw);
        CHECK(a.n_od == b.n_od);
    }
}

TEST_CASE("total cost is convex in the action") {
    auto inst = desk_instance(DemandCurve::Kind::geometric);
    inst.strategic.no_firing = false;
    inst.strategic.c_sev = 40.0;
    OpsCostCache cache(inst);
    for (const FleetState s : {FleetState{10, 0, 0, 26}, FleetState{4, 17, 0, 3}, FleetState{22, 30, 0, 12}}) {
        const auto r = action_space(inst, s);
        std::vector<double> c;
        for (int a = r.lo; a <= r.hi; ++a) c.push_back(total_cost(cache, s, a).total());
        const double scale = *std::max_element(c.begin(), c.end());
        for (std::size_t k = 0; k + 2 < c.size(); ++k) CHECK(c[k + 2] - 2 * c[k + 1] + c[k] >= -1e-6 * scale);
    }
}
