#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "sdd/routing.hpp"

namespace sdd {

// State at a decision point: the pending request plus everything a policy is
// allowed to look at.
struct IntraDayState {
    double now = 0.0;
    Customer pending_customer;
    const std::vector<VehiclePlan>* plans = nullptr;
    std::vector<double> region_expected;
    std::vector<int> region_requested_today;
    std::vector<int> region_accepted_today;
};

// Normalization bounds are fixed per geography so training and evaluation
// see identical feature scales.
struct FeatureBounds {
    double request_window = 0.0;
    double vehicle_window = 0.0;
    double proxy_max_minutes = 0.0; // warehouse -> 99.9th pct bounding box corner
    double delta_max_minutes = 0.0; // 2 * proxy_max
    double demand_norm = 0.0;       // 2 * max initial demand
};

inline FeatureBounds feature_bounds(const Geography& geo, const SimParams& params) {
    FeatureBounds b;
    b.request_window = params.request_window;
    b.vehicle_window = params.vehicle_window;
    double max_km = 0.0;
    for (const Region& r : geo.regions) {
        const double cx = r.spatial_law.center() + r.x_shift_km;
        const double cy = r.spatial_law.center();
        const double h = r.spatial_law.half_extent_999();
        for (int sx : {-1, 1}) {
            for (int sy : {-1, 1}) {
                const Point corner{cx + sx * h, cy + sy * h};
                max_km = std::max(max_km, euclidean_km(geo.warehouse, corner));
            }
        }
    }
    b.proxy_max_minutes = geo.circuity_factor * max_km / geo.speed_kmh * 60.0;
    b.delta_max_minutes = 2.0 * b.proxy_max_minutes;
    double dmax = 0.0;
    for (const Region& r : geo.regions) dmax = std::max(dmax, r.initial_expected_demand);
    b.demand_norm = 2.0 * dmax;
    return b;
}

inline int feature_length(int regions, int vehicles) {
    return 2 + 3 * vehicles + 3 * regions;
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// The eight feature groups: decision time, region one-hot, warehouse proxy
// distance, per-vehicle return times, feasibility flags, insertion deltas
// (infeasible -> 1.0), expected demands, current-day service levels.
inline std::vector<double> extract_features(const IntraDayState& state,
                                            const std::vector<InsertionResult>& options,
                                            const Geography& geo, const SimParams& params,
                                            const FeatureBounds& bounds) {
    const int I = geo.region_count();
    const int P = static_cast<int>(options.size());
    std::vector<double> f;
    f.reserve(static_cast<std::size_t>(feature_length(I, P)));

    f.push_back(clamp01(state.now / bounds.request_window));
    for (int i = 0; i < I; ++i)
        f.push_back(state.pending_customer.region_id == i ? 1.0 : 0.0);
    f.push_back(clamp01(travel_time(geo, geo.warehouse, state.pending_customer.location) /
                        bounds.proxy_max_minutes));
    for (int p = 0; p < P; ++p) {
        const VehiclePlan& plan = (*state.plans)[static_cast<std::size_t>(p)];
        double ret = state.now;
        for (const Trip& t : plan.trips) ret = std::max(ret, t.return_time);
        f.push_back(clamp01(ret / bounds.vehicle_window));
    }
    for (int p = 0; p < P; ++p)
        f.push_back(options[static_cast<std::size_t>(p)].feasible ? 1.0 : 0.0);
    for (int p = 0; p < P; ++p) {
        const InsertionResult& r = options[static_cast<std::size_t>(p)];
        f.push_back(r.feasible ? clamp01(r.delta_time / bounds.delta_max_minutes) : 1.0);
    }
    for (int i = 0; i < I; ++i)
        f.push_back(clamp01(state.region_expected[static_cast<std::size_t>(i)] / bounds.demand_norm));
    for (int i = 0; i < I; ++i) {
        const int req = state.region_requested_today[static_cast<std::size_t>(i)];
        const int acc = state.region_accepted_today[static_cast<std::size_t>(i)];
        f.push_back(req == 0 ? 1.0 : static_cast<double>(acc) / req);
    }
    return f;
}

// Blockwise service level: sum of accepted over sum of requested. An empty
// window defaults to full service (configurable at the call site).
inline std::vector<double> service_level(const std::vector<std::vector<int>>& requested,
                                         const std::vector<std::vector<int>>& accepted,
                                         double empty_window_value = 1.0) {
    if (requested.size() != accepted.size())
        throw std::invalid_argument("service_level: window size mismatch");
    if (requested.empty()) throw std::invalid_argument("service_level: empty window");
    const std::size_t I = requested.front().size();
    std::vector<double> r(I, empty_window_value);
    for (std::size_t i = 0; i < I; ++i) {
        long req = 0;
        long acc = 0;
        for (std::size_t d = 0; d < requested.size(); ++d) {
            req += requested[d][i];
            acc += accepted[d][i];
        }
        if (acc > req) throw std::invalid_argument("service_level: accepted > requested");
        if (req > 0) r[i] = static_cast<double>(acc) / static_cast<double>(req);
    }
    return r;
}

// Decision mask over {reject, vehicle 1, ..., vehicle P}.
inline std::vector<bool> feasible_mask(const std::vector<InsertionResult>& options) {
    std::vector<bool> mask(options.size() + 1, false);
    mask[0] = true; // reject is always available
    for (std::size_t p = 0; p < options.size(); ++p) mask[p + 1] = options[p].feasible;
    return mask;
}

struct DecisionRecord {
    double time = 0.0;
    int region = 0;
    int choice = 0; // 0 = reject, p = vehicle p
    double delta_time = 0.0;
};

struct DayResult {
    std::vector<int> requested; // per region
    std::vector<int> accepted;
    std::vector<Customer> accepted_customers;
    std::vector<DecisionRecord> decisions;
    int total_services = 0;
};

// Steps through the decision points of one day. Used both by run_day and by
// the training loop, which needs access to features and feasible sets.
class DaySimulator {
public:
    DaySimulator(const Geography& geo, const SimParams& params, int vehicles,
                 const DayScenario& scenario, std::vector<double> region_expected)
        : geo_(geo), params_(params), scenario_(scenario) {
        const int I = geo.region_count();
        state_.region_expected = std::move(region_expected);
        state_.region_requested_today.assign(static_cast<std::size_t>(I), 0);
        state_.region_accepted_today.assign(static_cast<std::size_t>(I), 0);
        plans_.resize(static_cast<std::size_t>(vehicles));
        for (int p = 0; p < vehicles; ++p)
            plans_[static_cast<std::size_t>(p)].vehicle_id = p;
        state_.plans = &plans_;
        advance_to_next_request();
    }

    bool done() const { return next_ >= scenario_.customers.size(); }

    const IntraDayState& state() const { return state_; }
    const std::vector<InsertionResult>& options() const { return options_; }
    const std::vector<VehiclePlan>& plans() const { return plans_; }

    bool any_feasible() const {
        for (const InsertionResult& o : options_)
            if (o.feasible) return true;
        return false;
    }

    // decision: 0 = reject, p in 1..P = accept and assign to vehicle p.
    void step(int decision) {
        if (done()) throw std::logic_error("DaySimulator::step past end of day");
        const Customer& c = state_.pending_customer;
        const std::size_t region = static_cast<std::size_t>(c.region_id);
        state_.region_requested_today[region] += 1;
        result_.requested[region] += 1;
        DecisionRecord rec{state_.now, c.region_id, decision, 0.0};
        if (decision != 0) {
            const std::size_t p = static_cast<std::size_t>(decision - 1);
            if (p >= plans_.size() || !options_[p].feasible)
                throw std::logic_error("DaySimulator::step: infeasible decision from policy");
            plans_[p] = apply_insertion(plans_[p], c, options_[p], state_.now, geo_, params_);
            state_.region_accepted_today[region] += 1;
            result_.accepted[region] += 1;
            result_.accepted_customers.push_back(c);
            result_.total_services += 1;
            rec.delta_time = options_[p].delta_time;
        }
        result_.decisions.push_back(rec);
        ++next_;
        advance_to_next_request();
    }

    // Advances to T_V, verifies every plan completed, and returns the tally.
    DayResult finish() {
        if (!done()) throw std::logic_error("DaySimulator::finish before end of day");
        for (VehiclePlan& plan : plans_) {
            plan = advance_plan(plan, params_.vehicle_window, geo_, params_);
            if (!plan.trips.empty())
                throw std::logic_error("DaySimulator::finish: trips outstanding at T_V");
        }
        return result_;
    }

private:
    void advance_to_next_request() {
        if (done()) return;
        const Customer& c = scenario_.customers[next_];
        state_.now = c.request_time;
        state_.pending_customer = c;
        for (VehiclePlan& plan : plans_)
            plan = advance_plan(plan, state_.now, geo_, params_);
        options_.clear();
        for (const VehiclePlan& plan : plans_)
            options_.push_back(cheapest_insertion(plan, c, state_.now, geo_, params_));
    }

    const Geography& geo_;
    const SimParams& params_;
    DayScenario scenario_;
    std::vector<VehiclePlan> plans_;
    IntraDayState state_;
    std::vector<InsertionResult> options_;
    std::size_t next_ = 0;
    DayResult result_{std::vector<int>(static_cast<std::size_t>(geo_.region_count()), 0),
                      std::vector<int>(static_cast<std::size_t>(geo_.region_count()), 0),
                      {},
                      {},
                      0};
};

using DecideFn = std::function<int(const DaySimulator&)>;

inline DayResult run_day(const Geography& geo, const SimParams& params, int vehicles,
                         const DayScenario& scenario, const DecideFn& decide,
                         const std::vector<double>& region_expected,
                         std::ostream* event_log = nullptr) {
    DaySimulator sim(geo, params, vehicles, scenario, region_expected);
    while (!sim.done()) {
        sim.step(decide(sim));
    }
    DayResult result = sim.finish();
    if (event_log) {
        for (const DecisionRecord& rec : result.decisions) {
            *event_log << rec.time << ',' << rec.region << ',' << rec.choice << ','
                       << rec.delta_time << '\n';
        }
    }
    return result;
}

} // namespace sdd
