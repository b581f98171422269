#pragma once

#include <cassert>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sdd/instance.hpp"

namespace sdd {

inline constexpr double kTimeEps = 1e-9;
inline constexpr double kInfeasibleDelta = std::numeric_limits<double>::infinity();

// One out-and-back tour: load at the warehouse, visit stops in order, return.
struct Trip {
    double departure_time = 0.0;
    std::vector<Customer> stops;
    double return_time = 0.0;
    bool locked = false; // vehicle has left the warehouse; never modified again
};

namespace detail {

// Arrival offsets from the trip's departure time. offsets[j] is when stop j
// is reached; the last entry is the offset of the return to the warehouse.
inline std::vector<double> trip_offsets(const Geography& geo, const SimParams& params,
                                        const std::vector<Customer>& stops) {
    std::vector<double> offsets;
    offsets.reserve(stops.size() + 1);
    double t = params.load_time;
    Point prev = geo.warehouse;
    for (const Customer& c : stops) {
        t += travel_time(geo, prev, c.location);
        offsets.push_back(t);
        t += params.service_time;
        prev = c.location;
    }
    t += travel_time(geo, prev, geo.warehouse);
    offsets.push_back(t);
    return offsets;
}

inline double trip_duration(const Geography& geo, const SimParams& params,
                            const std::vector<Customer>& stops) {
    return trip_offsets(geo, params, stops).back();
}

// Latest departure at which every stop still meets its deadline and the
// vehicle is back by T_V. -inf when some stop can never be reached in time.
inline double latest_departure(const Geography& geo, const SimParams& params,
                               const std::vector<Customer>& stops) {
    const std::vector<double> offsets = trip_offsets(geo, params, stops);
    double latest = params.vehicle_window - offsets.back();
    for (std::size_t j = 0; j < stops.size(); ++j) {
        latest = std::min(latest, stops[j].deadline - offsets[j]);
    }
    return latest;
}

inline double trip_travel_time(const Geography& geo, const std::vector<Customer>& stops) {
    double t = 0.0;
    Point prev = geo.warehouse;
    for (const Customer& c : stops) {
        t += travel_time(geo, prev, c.location);
        prev = c.location;
    }
    t += travel_time(geo, prev, geo.warehouse);
    return t;
}

} // namespace detail

struct InsertionResult {
    bool feasible = false;
    double delta_time = kInfeasibleDelta; // added driving time, minutes
    int trip_index = -1;                  // index into pending trips
    int stop_index = -1;
    bool new_trip = false;
};

// A vehicle's day: locked trips first (at most the one in progress, since
// completed trips are retired into `delivered`), then modifiable ones.
struct VehiclePlan {
    int vehicle_id = 0;
    std::vector<Trip> trips;
    std::vector<Customer> delivered;

    int pending_begin() const {
        int i = 0;
        while (i < static_cast<int>(trips.size()) && trips[static_cast<std::size_t>(i)].locked) ++i;
        return i;
    }

    int pending_count() const { return static_cast<int>(trips.size()) - pending_begin(); }

    // Earliest time the vehicle is free for its next pending departure.
    double available_from(double now) const {
        double avail = now;
        for (const Trip& t : trips) {
            if (t.locked) avail = std::max(avail, t.return_time);
        }
        return avail;
    }

    int pending_stop_count() const {
        int n = 0;
        for (const Trip& t : trips)
            if (!t.locked) n += static_cast<int>(t.stops.size());
        return n;
    }

    double total_travel_time(const Geography& geo) const {
        double total = 0.0;
        for (const Trip& t : trips) total += detail::trip_travel_time(geo, t.stops);
        return total;
    }
};

namespace detail {

// Backward pass over the pending stop lists: latest[j] is the latest
// departure of pending trip j such that trips j..end remain feasible.
// The chain is feasible from `avail` iff latest.front() >= avail.
inline bool chain_feasible(const Geography& geo, const SimParams& params,
                           const std::vector<const std::vector<Customer>*>& pending,
                           double avail, std::vector<double>* latest_out = nullptr) {
    std::vector<double> latest(pending.size());
    double next_latest = std::numeric_limits<double>::infinity();
    for (int j = static_cast<int>(pending.size()) - 1; j >= 0; --j) {
        const auto& stops = *pending[static_cast<std::size_t>(j)];
        double l = latest_departure(geo, params, stops);
        l = std::min(l, next_latest - trip_duration(geo, params, stops));
        latest[static_cast<std::size_t>(j)] = l;
        next_latest = l;
    }
    if (latest_out) *latest_out = latest;
    return pending.empty() || latest.front() >= avail - kTimeEps;
}

inline std::vector<const std::vector<Customer>*> pending_stop_lists(const VehiclePlan& plan) {
    std::vector<const std::vector<Customer>*> out;
    for (const Trip& t : plan.trips)
        if (!t.locked) out.push_back(&t.stops);
    return out;
}

// Refresh departure/return bookkeeping on pending trips to the latest
// feasible schedule. Caller guarantees the chain is feasible from `avail`.
inline void reschedule_pending(const Geography& geo, const SimParams& params,
                               VehiclePlan& plan, double avail) {
    std::vector<double> latest;
    if (!chain_feasible(geo, params, pending_stop_lists(plan), avail, &latest)) {
        throw std::logic_error("reschedule_pending: infeasible plan");
    }
    int j = 0;
    for (Trip& t : plan.trips) {
        if (t.locked) continue;
        t.departure_time = latest[static_cast<std::size_t>(j)];
        t.return_time = t.departure_time + trip_duration(geo, params, t.stops);
        ++j;
    }
}

} // namespace detail

// Evaluates every stop position in every pending trip plus a new single-stop
// trip appended at the end; returns the cheapest feasible option. Ties break
// on the lowest (trip index, stop index); the new trip sorts last.
inline InsertionResult cheapest_insertion(const VehiclePlan& plan, const Customer& c,
                                          double now, const Geography& geo,
                                          const SimParams& params) {
    const double avail = plan.available_from(now);
    InsertionResult best;

    auto pending = detail::pending_stop_lists(plan);
    const int first_pending = plan.pending_begin();

    // Candidates are visited in lexicographic (trip, stop) order with the new
    // trip last, so only a strictly smaller delta displaces the incumbent.
    for (std::size_t j = 0; j < pending.size(); ++j) {
        const std::vector<Customer>& stops = *pending[j];
        for (std::size_t pos = 0; pos <= stops.size(); ++pos) {
            std::vector<Customer> modified = stops;
            modified.insert(modified.begin() + static_cast<std::ptrdiff_t>(pos), c);
            const double delta = detail::trip_travel_time(geo, modified) -
                                 detail::trip_travel_time(geo, stops);
            if (best.feasible && delta >= best.delta_time) continue;
            auto trial = pending;
            trial[j] = &modified;
            if (!detail::chain_feasible(geo, params, trial, avail)) continue;
            best.feasible = true;
            best.delta_time = delta;
            best.trip_index = first_pending + static_cast<int>(j);
            best.stop_index = static_cast<int>(pos);
            best.new_trip = false;
        }
    }

    {
        std::vector<Customer> fresh{c};
        const double delta = detail::trip_travel_time(geo, fresh);
        if (!best.feasible || delta < best.delta_time) {
            auto trial = pending;
            trial.push_back(&fresh);
            if (detail::chain_feasible(geo, params, trial, avail)) {
                best.feasible = true;
                best.delta_time = delta;
                best.trip_index = static_cast<int>(plan.trips.size());
                best.stop_index = 0;
                best.new_trip = true;
            }
        }
    }
    return best;
}

inline VehiclePlan apply_insertion(const VehiclePlan& plan, const Customer& c,
                                   const InsertionResult& result, double now,
                                   const Geography& geo, const SimParams& params) {
    if (!result.feasible) throw std::logic_error("apply_insertion: infeasible result");
    VehiclePlan updated = plan;
    if (result.new_trip) {
        Trip t;
        t.stops = {c};
        updated.trips.push_back(std::move(t));
    } else {
        Trip& t = updated.trips[static_cast<std::size_t>(result.trip_index)];
        if (t.locked) throw std::logic_error("apply_insertion: target trip is locked");
        t.stops.insert(t.stops.begin() + result.stop_index, c);
    }
    detail::reschedule_pending(geo, params, updated, updated.available_from(now));
    return updated;
}

// Locks pending trips whose latest feasible departure has passed and retires
// trips completed by `to_time` into the delivered log.
inline VehiclePlan advance_plan(const VehiclePlan& plan, double to_time,
                                const Geography& geo, const SimParams& params) {
    VehiclePlan updated = plan;
    double freed_at = 0.0; // return time of the last retired trip
    for (;;) {
        // Retire completed locked trips.
        while (!updated.trips.empty() && updated.trips.front().locked &&
               updated.trips.front().return_time <= to_time + kTimeEps) {
            for (const Customer& c : updated.trips.front().stops)
                updated.delivered.push_back(c);
            freed_at = updated.trips.front().return_time;
            updated.trips.erase(updated.trips.begin());
        }
        if (updated.trips.empty()) break;
        if (updated.trips.front().locked) break; // in progress past to_time

        std::vector<double> latest;
        detail::chain_feasible(geo, params, detail::pending_stop_lists(updated),
                               -std::numeric_limits<double>::infinity(), &latest);
        Trip& next = updated.trips.front();
        const double depart = latest.front();
        if (depart > to_time + kTimeEps) break; // still waiting for consolidation
        if (depart < freed_at - kTimeEps)
            throw std::logic_error("advance_plan: pending chain became infeasible");
        next.locked = true;
        next.departure_time = depart;
        next.return_time = depart + detail::trip_duration(geo, params, next.stops);
    }
    return updated;
}

} // namespace sdd
