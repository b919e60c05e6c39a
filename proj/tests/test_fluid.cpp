#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "fleetplan/fluid.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace fleetplan;

namespace {

std::vector<double> primal_of(const FluidLp& fl, const FluidSolution& sol) {
    std::vector<double> x(fl.problem.num_vars, 0.0);
    const int m = fl.zones;
    for (int i = 0; i < m; ++i) {
        x[fl.a_fd(i)] = sol.a_fd[i];
        for (int j = 0; j < m; ++j) {
            x[fl.a_gw(i, j)] = sol.a_gw(i, j);
            x[fl.a_od(i, j)] = sol.a_od(i, j);
            x[fl.a_null(i, j)] = sol.a_null(i, j);
            x[fl.e(i, j)] = sol.e(i, j);
            x[fl.f(i, j)] = sol.f(i, j);
        }
    }
    return x;
}

double matrix_sum(const ZoneMatrix& m) { return std::accumulate(m.data.begin(), m.data.end(), 0.0); }

}  // namespace

TEST_CASE("single zone with one FD serves everything") {
    const auto inst = fixtures::single_zone(10.0);
    const auto sol = solve_fluid(inst, 1, 0, 0, 0);
    CHECK(sol.cost_rate == doctest::Approx(3.4).epsilon(1e-9));
    CHECK(sol.a_fd[0] == doctest::Approx(1.0));
    CHECK(sol.f(0, 0) == doctest::Approx(10.0 / 19.0));
    CHECK(sol.unmatched_demand == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("single zone without FDs") {
    const auto inst = fixtures::single_zone(10.0);
    CHECK(solve_fluid(inst, 0, 0, 0, 0).cost_rate == doctest::Approx(100.0));
    CHECK(solve_fluid(inst, 0, 0, 0, 0).a_null(0, 0) == doctest::Approx(1.0));
    // ten GWs arriving once an hour each cover the ten requests
    const auto gw = solve_fluid(inst, 0, 10, 0, 0);
    CHECK(gw.cost_rate == doctest::Approx(7.0));
    CHECK(gw.a_gw(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("outsourcing is cheapest first") {
    auto inst = fixtures::single_zone(10.0);
    // residual 10/h, GW capacity 4 at 0.7, OD capacity 3 at 5, the rest at 10
    const auto plan = analytic_penalty(inst, {0.0}, 4, 3, 0);
    CHECK(plan.objective() == doctest::Approx(4 * 0.7 + 3 * 5.0 + 3 * 10.0));
    CHECK(plan.a_gw(0, 0) == doctest::Approx(0.4));
    CHECK(plan.a_od(0, 0) == doctest::Approx(0.3));
    CHECK(plan.a_null(0, 0) == doctest::Approx(0.3));

    CHECK(analytic_penalty(inst, {1.0}, 4, 3, 0).penalty_rate == 0.0);
    const auto none = analytic_penalty(inst, {0.25}, 0, 0, 0);
    CHECK(none.penalty_rate == doctest::Approx(7.5 * 10.0));
    CHECK(none.a_null(0, 0) == doctest::Approx(0.75));

    // equal prices: GW first
    inst.costs.gw_per_km = 5.0;
    const auto tie = analytic_penalty(inst, {0.0}, 20, 20, 0);
    CHECK(tie.a_gw(0, 0) == doctest::Approx(1.0));
    CHECK(tie.a_od(0, 0) == 0.0);
}

TEST_CASE("LP layout") {
    const auto one = build_fluid_lp(fixtures::single_zone(10.0), 1, 0, 0, 0);
    CHECK(one.problem.num_vars == 6);
    // per route: flow and matching; per ordered pair i != j: relocation feed;
    // per zone: two throughput bounds and the balance; one flow total
    CHECK(one.problem.constraints.size() == 2 + 0 + 3 + 1);

    const auto inst = builtin_grubhub_instance();
    const auto fl = build_fluid_lp(inst, 100, 0, 0, 26);
    CHECK(fl.problem.num_vars == 18 + 5 * 324);
    CHECK(fl.problem.constraints.size() == 2 * 324 + 18 * 17 + 3 * 18 + 1);
    for (int i = 0; i < 18; ++i)
        for (int j = 0; j < 18; ++j) CHECK(fl.problem.bounds[fl.a_gw(i, j)].hi == 0.0);
    CHECK_THROWS_AS(build_fluid_lp(inst, 0, 0, 0, 26), std::invalid_argument);
}

TEST_CASE("solutions satisfy partition, flow total and the LP rows") {
    const auto inst = builtin_grubhub_instance();
    std::mt19937 rng(11);
    for (int rep = 0; rep < 6; ++rep) {
        const int n = 1 + static_cast<int>(rng() % 900);
        const int gw = static_cast<int>(rng() % 2000), od = static_cast<int>(rng() % 2000);
        const int t = static_cast<int>(rng() % 27);
        CAPTURE(n);
        CAPTURE(gw);
        CAPTURE(od);
        const auto sol = solve_fluid(inst, n, gw, od, t);
        for (int i = 0; i < 18; ++i) {
            double total = sol.a_fd[i];
            for (int j = 0; j < 18; ++j) total += sol.a_gw(i, j) + sol.a_od(i, j) + sol.a_null(i, j);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
        }
        CHECK(matrix_sum(sol.e) + matrix_sum(sol.f) == doctest::Approx(1.0).epsilon(1e-6));
        const auto fl = build_fluid_lp(inst, n, gw, od, t);
        const auto r = lp::residuals(fl.problem, primal_of(fl, sol));
        CHECK(r.constraint < 1e-7);
        CHECK(r.bound < 1e-9);
        const double split =
            sol.fd_serving_rate + sol.relocation_rate + sol.gw_rate + sol.od_rate + sol.penalty_rate;
        CHECK(split == doctest::Approx(sol.cost_rate).epsilon(1e-9));
    }
}

TEST_CASE("analytic outsourcing reproduces the LP objective at the LP's FD shares") {
    const auto inst = builtin_grubhub_instance();
    std::mt19937 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 1 + static_cast<int>(rng() % 900);
        const int gw = static_cast<int>(rng() % 3000), od = static_cast<int>(rng() % 3000);
        const int t = static_cast<int>(rng() % 27);
        const auto sol = solve_fluid(inst, n, gw, od, t);
        const auto plan = analytic_penalty(inst, sol.a_fd, gw, od, t);
        CHECK(plan.objective() + sol.relocation_rate == doctest::Approx(sol.cost_rate).epsilon(1e-6));
    }
}

TEST_CASE("zero FDs is exactly the outsourcing plan") {
    const auto inst = builtin_grubhub_instance();
    for (auto [gw, od] : {std::pair{0, 0}, {300, 0}, {0, 4000}, {1200, 1200}}) {
        const auto sol = solve_fluid(inst, 0, gw, od, 20);
        CHECK(sol.cost_rate == analytic_penalty(inst, std::vector<double>(18, 0.0), gw, od, 20).objective());
    }
}

TEST_CASE("cost is non-increasing and convex in the FD count") {
    const auto inst = desk_instance(DemandCurve::Kind::geometric);
    OpsCostCache cache(inst);
    for (auto [gw, t] : {std::pair{0, 26}, {9, 0}, {20, 13}, {30, 26}, {5, 5}}) {
        std::vector<double> c;
        for (int n = 0; n <= 50; ++n) c.push_back(cache.summary(n, gw, 0, t).cost_rate);
        for (int n = 0; n + 1 < static_cast<int>(c.size()); ++n) CHECK(c[n + 1] <= c[n] + 1e-9 * c[n]);
        for (int n = 0; n + 2 < static_cast<int>(c.size()); ++n)
            CHECK(c[n + 2] - 2 * c[n + 1] + c[n] >= -1e-6 * c[n]);
    }
}

TEST_CASE("full-service FD count") {
    CHECK(min_fd_full_service(fixtures::single_zone(10.0), 0, 0, 0) == 1);
    CHECK(min_fd_full_service(fixtures::single_zone(0.0), 0, 0, 0) == 0);
    CHECK(min_fd_full_service(fixtures::single_zone(10.0), 10, 0, 0) == 0);
    CHECK(min_fd_full_service(fixtures::single_zone(40.0), 0, 0, 0) == 3);  // 40 / 19 rounded up

    const auto inst = desk_instance(DemandCurve::Kind::constant);
    OpsCostCache cache(inst);
    const int n = min_fd_full_service(cache, 4, 0, 26);
    CHECK(cache.summary(n, 4, 0, 26).service_level == doctest::Approx(1.0));
    CHECK(cache.summary(n - 1, 4, 0, 26).service_level < 1.0 - 1e-7);
}

TEST_CASE("service level") {
    FluidSolution sol;
    sol.zones = 2;
    sol.a_null = ZoneMatrix(2);
    CHECK(service_level(sol, {5.0, 5.0}) == 1.0);
    sol.a_null(0, 0) = 0.25;
    sol.a_null(0, 1) = 0.25;
    CHECK(service_level(sol, {5.0, 5.0}) == doctest::Approx(0.75));
    sol.a_null = ZoneMatrix(2, 0.5);
    CHECK(service_level(sol, {5.0, 5.0}) == doctest::Approx(0.0));
    CHECK(service_level(sol, {0.0, 0.0}) == 1.0);
}

TEST_CASE("unmatched CD shares") {
    const auto inst = fixtures::single_zone(10.0);
    const auto sol = solve_fluid(inst, 1, 0, 0, 0);
    const auto none = unmatched_cd_shares(sol, inst, 0, 0);
    CHECK(none.gw == 0.0);
    CHECK(none.od == 0.0);

    const auto idle = fixtures::single_zone(0.0);
    CHECK(unmatched_cd_shares(solve_fluid(idle, 0, 7, 0, 0), idle, 7, 0).gw == doctest::Approx(1.0));
    CHECK(unmatched_cd_shares(solve_fluid(idle, 2, 7, 3, 0), idle, 7, 3).od == doctest::Approx(1.0));

    // GW capacity equals demand and GW is the cheapest option without FDs
    const auto exact = solve_fluid(inst, 0, 10, 0, 0);
    CHECK(unmatched_cd_shares(exact, inst, 10, 0).gw == doctest::Approx(0.0).scale(1.0));
    // twenty GWs, ten requests: half idle
    CHECK(unmatched_cd_shares(solve_fluid(inst, 0, 20, 0, 0), inst, 20, 0).gw == doctest::Approx(0.5));
}

TEST_CASE("zones without demand are flagged, not rejected") {
    auto inst = fixtures::line_instance(2, 20.0);
    inst.demand_weights = {1.0, 0.0};
    const auto sol = solve_fluid(inst, 2, 0, 0, 0);
    CHECK(sol.degenerate_demand);
    CHECK(sol.unmatched_demand == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("per-km relocation pricing never costs more") {
    auto inst = builtin_grubhub_instance();
    const double hourly = solve_fluid(inst, 300, 100, 100, 26).cost_rate;
    inst.costs.relocation_per_hour = false;
    CHECK(solve_fluid(inst, 300, 100, 100, 26).cost_rate <= hourly + 1e-9);
}

TEST_CASE("cache matches direct solves and keeps the first entry") {
    const auto inst = desk_instance(DemandCurve::Kind::geometric);
    OpsCostCache cache(inst);
    for (int n : {0, 3, 10, 4, 25})
        CHECK(cache.summary(n, 12, 0, 20).cost_rate ==
              doctest::Approx(solve_fluid(inst, n, 12, 0, 20).cost_rate).epsilon(1e-9));
    CHECK(cache.size() == 5);
    CHECK(cache.contains(3, 12, 0, 20));
    CHECK_FALSE(cache.contains(3, 12, 0, 21));
    CHECK(cache.cost(3, 12, 0, 20) ==
          doctest::Approx(per_step(inst, cache.summary(3, 12, 0, 20).cost_rate)));

    const auto before = cache.summary(3, 12, 0, 20).cost_rate;
    OpsSummary other;
    other.cost_rate = -1.0;
    cache.insert(3, 12, 0, 20, other);
    CHECK(cache.summary(3, 12, 0, 20).cost_rate == before);
    cache.insert(7, 1, 0, 2, other);
    CHECK(cache.summary(7, 1, 0, 2).cost_rate == -1.0);

    OpsCostCache copy(cache);
    CHECK(copy.size() == cache.size());
}

TEST_CASE("per-step scaling uses the operational horizon and K") {
    auto inst = fixtures::single_zone(10.0);
    inst.strategic.hours_per_ops_horizon = 0.5;
    inst.strategic.k_horizons = 3;
    CHECK(per_step(inst, 8.0) == doctest::Approx(12.0));
    const auto oc = ops_cost(inst, 1, 0, 0, 0);
    CHECK(oc.cost == doctest::Approx(3.4 * 1.5));
}

TEST_CASE("a warm start that runs into a singular basis still solves") {
    const auto inst = builtin_grubhub_instance();
    const auto cold = solve_fluid(inst, 2, 1954, 1875, 17);
    lp::Basis from;
    solve_fluid(inst, 29, 1854, 1875, 17, nullptr, &from);
    const auto warm = solve_fluid(inst, 2, 1954, 1875, 17, &from);
    CHECK(warm.cost_rate == doctest::Approx(cold.cost_rate).epsilon(1e-9));
}
