#include <catch_amalgamated.hpp>

#include <cmath>

#include "sdd/interday.hpp"
#include "sdd/policies.hpp"

using namespace sdd;

TEST_CASE("capacitated update pulls demand toward cap times service level") {
    const DemandModel m = DemandModel::capacitated(0.5, {250.0});
    REQUIRE(update_demand(m, {200.0}, {1.0})[0] == Catch::Approx(225.0));
    REQUIRE(update_demand(m, {200.0}, {0.0})[0] == Catch::Approx(100.0));
    REQUIRE(update_demand(m, {200.0}, {0.8})[0] == Catch::Approx(200.0));
    REQUIRE_THROWS(DemandModel::capacitated(0.0, {250.0}));
    REQUIRE_THROWS(DemandModel::capacitated(1.0, {250.0}));
}

TEST_CASE("capacitated fixed point is cap times service level") {
    for (const double alpha : {0.25, 0.5, 0.75}) {
        const DemandModel m = DemandModel::capacitated(alpha, {250.0});
        for (const double r : {0.3, 0.7, 1.0}) {
            std::vector<double> d{10.0};
            for (int n = 0; n < 200; ++n) d = update_demand(m, d, {r});
            REQUIRE(d[0] == Catch::Approx(250.0 * r).margin(1e-6));
        }
    }
}

TEST_CASE("uncapacitated update grows and shrinks around the reference level") {
    const DemandModel m = DemandModel::uncapacitated(0.5);
    REQUIRE(update_demand(m, {100.0}, {0.5})[0] == Catch::Approx(100.0));
    REQUIRE(update_demand(m, {100.0}, {1.0})[0] == Catch::Approx(150.0));
    REQUIRE(update_demand(m, {100.0}, {0.0})[0] == Catch::Approx(50.0));
    // Rejecting everything halves demand each block at r_bar = 0.5.
    std::vector<double> d{100.0};
    for (int n = 0; n < 5; ++n) d = update_demand(m, d, {0.0});
    REQUIRE(d[0] == Catch::Approx(100.0 / 32.0));
    REQUIRE_THROWS(DemandModel::uncapacitated(0.0));
}

TEST_CASE("horizon config validates block divisibility") {
    HorizonConfig h;
    h.days = 720;
    h.tau_upd = 30;
    REQUIRE(h.blocks() == 24);
    h.tau_upd = 7;
    REQUIRE_THROWS(h.blocks());
}

TEST_CASE("run_horizon produces the advertised artifact shapes") {
    const Geography geo = scale_geography(builtin_geography("a"), 10.0);
    const SimParams params;
    const DemandModel model = DemandModel::capacitated(0.5, geo.demand_caps());
    HorizonConfig horizon;
    horizon.days = 90;
    horizon.tau_upd = 30;
    MyopicPolicy policy;
    const HorizonResult r = run_horizon(geo, params, 1, model, horizon, policy, 17);
    REQUIRE(r.requested_by_day.size() == 90);
    REQUIRE(r.accepted_by_day.size() == 90);
    REQUIRE(r.demand_trajectory.size() == 4); // initial + one per block
    REQUIRE(r.demand_trajectory.front() == geo.initial_demands());
    REQUIRE(r.end_demand == r.demand_trajectory.back());
    REQUIRE(r.trajectory_rows.size() == 4 * 2); // (blocks+1) x regions
    long total = 0;
    for (const std::vector<int>& day : r.accepted_by_day)
        for (int a : day) total += a;
    REQUIRE(total == r.total_services);
    REQUIRE(r.average_daily_services == Catch::Approx(total / 90.0));

    // Same seed, same trajectory; different seed, different days.
    const HorizonResult r2 = run_horizon(geo, params, 1, model, horizon, policy, 17);
    REQUIRE(r2.total_services == r.total_services);
    REQUIRE(r2.end_demand == r.end_demand);
    const HorizonResult r3 = run_horizon(geo, params, 1, model, horizon, policy, 18);
    REQUIRE(r3.requested_by_day != r.requested_by_day);
}

TEST_CASE("relative improvement reproduces the published comparisons") {
    REQUIRE(relative_improvement_pct(262.3, 288.9) == Catch::Approx(10.14).margin(0.005));
    REQUIRE(relative_improvement_pct(285.3, 368.2) == Catch::Approx(29.06).margin(0.005));
}

TEST_CASE("summarize computes means, standard errors, and improvement") {
    HorizonResult a;
    a.average_daily_services = 10.0;
    a.end_demand = {100.0, 50.0};
    HorizonResult b;
    b.average_daily_services = 14.0;
    b.end_demand = {120.0, 70.0};
    const SummaryMetrics m = summarize({a, b});
    REQUIRE(m.mean_daily_services == Catch::Approx(12.0));
    // SE of {10, 14}: sd = sqrt(8), se = sd / sqrt(2) = 2.
    REQUIRE(m.se_daily_services == Catch::Approx(2.0));
    REQUIRE(m.mean_end_demand[0] == Catch::Approx(110.0));
    REQUIRE(m.mean_end_demand[1] == Catch::Approx(60.0));

    HorizonResult base;
    base.average_daily_services = 10.0;
    base.end_demand = {1.0, 1.0};
    const std::vector<HorizonResult> baseline{base, base};
    const SummaryMetrics withBase = summarize({a, b}, &baseline);
    REQUIRE(withBase.improvement_vs_baseline_pct == Catch::Approx(20.0));
}
