#include <catch_amalgamated.hpp>

#include <vector>

#include "sdd/intraday.hpp"
#include "sdd/policies.hpp"
#include "sdd/rng.hpp"

using namespace sdd;

TEST_CASE("service level sums over the window before dividing") {
    const std::vector<std::vector<int>> requested{{10, 0}, {30, 0}};
    const std::vector<std::vector<int>> accepted{{10, 0}, {10, 0}};
    const std::vector<double> r = service_level(requested, accepted);
    REQUIRE(r[0] == Catch::Approx(0.5));
    REQUIRE(r[1] == Catch::Approx(1.0)); // empty window defaults to full service
    const std::vector<double> r0 = service_level(requested, accepted, 0.0);
    REQUIRE(r0[1] == 0.0);
    REQUIRE_THROWS(service_level({{1}}, {{2}}));
    REQUIRE_THROWS(service_level({}, {}));
}

TEST_CASE("feasible mask keeps reject available and mirrors the options") {
    std::vector<InsertionResult> options(3);
    options[1].feasible = true;
    const std::vector<bool> mask = feasible_mask(options);
    REQUIRE(mask == std::vector<bool>{true, false, true, false});
}

TEST_CASE("feature vector length and range over random days") {
    const Geography geo = scale_geography(builtin_geography("a"), 10.0);
    const SimParams params;
    const FeatureBounds bounds = feature_bounds(geo, params);
    const int P = 1;
    REQUIRE(feature_length(geo.region_count(), P) == 2 + 3 * P + 3 * geo.region_count());
    Rng rng(404);
    long checked = 0;
    for (int day = 0; day < 400 && checked < 100000; ++day) {
        const DayScenario scenario = sample_day(geo, params, geo.initial_demands(), rng);
        DaySimulator sim(geo, params, P, scenario, geo.initial_demands());
        while (!sim.done()) {
            const std::vector<double> f =
                extract_features(sim.state(), sim.options(), geo, params, bounds);
            REQUIRE(static_cast<int>(f.size()) == feature_length(geo.region_count(), P));
            for (double v : f) {
                REQUIRE(v >= 0.0);
                REQUIRE(v <= 1.0);
                ++checked;
            }
            sim.step(sim.options()[0].feasible ? 1 : 0);
        }
        sim.finish();
    }
    REQUIRE(checked >= 100000);
}

TEST_CASE("run_day tallies match a replay of the decision log") {
    const Geography geo = scale_geography(builtin_geography("a"), 10.0);
    const SimParams params;
    Rng rng(11);
    for (int day = 0; day < 30; ++day) {
        const DayScenario scenario = sample_day(geo, params, geo.initial_demands(), rng);
        const DayResult result = run_day(
            geo, params, 1, scenario,
            [](const DaySimulator& sim) { return myopic_decide(sim.options()); },
            geo.initial_demands());

        // Replay the recorded choices through a fresh simulator and recount.
        DaySimulator sim(geo, params, 1, scenario, geo.initial_demands());
        std::vector<int> requested(2, 0), accepted(2, 0);
        for (const DecisionRecord& rec : result.decisions) {
            REQUIRE(!sim.done());
            REQUIRE(sim.state().pending_customer.region_id == rec.region);
            requested[static_cast<std::size_t>(rec.region)] += 1;
            if (rec.choice != 0) accepted[static_cast<std::size_t>(rec.region)] += 1;
            sim.step(rec.choice);
        }
        REQUIRE(sim.done());
        const DayResult replay = sim.finish();
        REQUIRE(result.requested == requested);
        REQUIRE(result.accepted == accepted);
        REQUIRE(replay.total_services == result.total_services);
        REQUIRE(result.total_services ==
                static_cast<int>(result.accepted_customers.size()));
        // Every request of the scenario produced exactly one decision.
        REQUIRE(result.decisions.size() == scenario.customers.size());
    }
}

TEST_CASE("rejecting everything serves nobody and accepting needs feasibility") {
    const Geography geo = scale_geography(builtin_geography("a"), 10.0);
    const SimParams params;
    Rng rng(5);
    const DayScenario scenario = sample_day(geo, params, geo.initial_demands(), rng);
    const DayResult result = run_day(geo, params, 1, scenario,
                                     [](const DaySimulator&) { return 0; },
                                     geo.initial_demands());
    REQUIRE(result.total_services == 0);
    REQUIRE(result.requested[0] + result.requested[1] ==
            static_cast<int>(scenario.customers.size()));

    DaySimulator sim(geo, params, 1, scenario, geo.initial_demands());
    while (!sim.done() && sim.options()[0].feasible) sim.step(1);
    if (!sim.done()) REQUIRE_THROWS_AS(sim.step(2), std::logic_error);
}

TEST_CASE("in-day service-level features track the running tallies") {
    const Geography geo = scale_geography(builtin_geography("a"), 10.0);
    const SimParams params;
    const FeatureBounds bounds = feature_bounds(geo, params);
    Rng rng(21);
    const DayScenario scenario = sample_day(geo, params, geo.initial_demands(), rng);
    DaySimulator sim(geo, params, 1, scenario, geo.initial_demands());
    while (!sim.done()) {
        const IntraDayState& s = sim.state();
        const std::vector<double> f =
            extract_features(s, sim.options(), geo, params, bounds);
        const std::size_t base = f.size() - 2; // last I entries for geography a
        for (std::size_t i = 0; i < 2; ++i) {
            const int req = s.region_requested_today[i];
            const int acc = s.region_accepted_today[i];
            const double expected = req == 0 ? 1.0 : static_cast<double>(acc) / req;
            REQUIRE(f[base + i] == Catch::Approx(expected));
        }
        sim.step(sim.options()[0].feasible ? 1 : 0);
    }
    sim.finish();
}
