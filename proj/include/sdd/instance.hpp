#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdd/rng.hpp"

namespace sdd {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double euclidean_km(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Per-axis spatial law for customer locations within a region.
struct SpatialLaw {
    enum class Kind { Normal, Uniform };
    Kind kind = Kind::Normal;
    double mean_km = 0.0; // normal
    double sd_km = 0.0;
    double lo_km = 0.0; // uniform
    double hi_km = 0.0;

    static SpatialLaw make_normal(double mean, double sd) {
        SpatialLaw l;
        l.kind = Kind::Normal;
        l.mean_km = mean;
        l.sd_km = sd;
        return l;
    }
    static SpatialLaw make_uniform(double lo, double hi) {
        SpatialLaw l;
        l.kind = Kind::Uniform;
        l.lo_km = lo;
        l.hi_km = hi;
        return l;
    }

    double sample(Rng& rng) const {
        if (kind == Kind::Normal) return rng.normal(mean_km, sd_km);
        return rng.uniform(lo_km, hi_km);
    }

    double center() const {
        return kind == Kind::Normal ? mean_km : 0.5 * (lo_km + hi_km);
    }

    // Half-width of the 99.9th percentile box around the center.
    double half_extent_999() const {
        if (kind == Kind::Normal) return 3.090 * sd_km;
        return 0.5 * (hi_km - lo_km);
    }
};

struct Region {
    int id = 0;
    SpatialLaw spatial_law;
    double x_shift_km = 0.0; // translation applied after sampling
    double initial_expected_demand = 0.0; // D_{1,i}
    double demand_cap = 0.0; // D_cap,i (capacitated model only)
};

struct Geography {
    std::string name;
    std::vector<Region> regions;
    Point warehouse;
    double circuity_factor = 1.4; // Euclidean -> road detour ratio
    double speed_kmh = 30.0;

    int region_count() const { return static_cast<int>(regions.size()); }

    std::vector<double> initial_demands() const {
        std::vector<double> d;
        d.reserve(regions.size());
        for (const auto& r : regions) d.push_back(r.initial_expected_demand);
        return d;
    }

    std::vector<double> demand_caps() const {
        std::vector<double> d;
        d.reserve(regions.size());
        for (const auto& r : regions) d.push_back(r.demand_cap);
        return d;
    }

    Point region_center(int i) const {
        const Region& r = regions[static_cast<std::size_t>(i)];
        return {r.spatial_law.center() + r.x_shift_km, r.spatial_law.center()};
    }
};

// Day-level timing and service parameters, in minutes.
struct SimParams {
    double request_window = 420.0; // T_C
    double vehicle_window = 480.0; // T_V
    double deadline = 240.0;       // delta-bar
    double load_time = 3.0;        // t_W, once per trip at the warehouse
    double service_time = 3.0;     // t_C, once per stop
};

struct Customer {
    int id = 0;
    int region_id = 0;
    Point location;
    double request_time = 0.0;
    double deadline = 0.0; // request_time + delta-bar
};

struct DayScenario {
    std::vector<Customer> customers; // sorted strictly by request_time
    std::vector<double> expected_demands;
};

inline double travel_time(const Geography& geo, const Point& a, const Point& b) {
    return geo.circuity_factor * euclidean_km(a, b) / geo.speed_kmh * 60.0;
}

// Poisson counts per region, request times as uniform order statistics on
// [0, T_C]; exact ties are nudged forward so decision points stay distinct.
inline DayScenario sample_day(const Geography& geo, const SimParams& params,
                              const std::vector<double>& expected_demands, Rng& rng) {
    if (expected_demands.size() != geo.regions.size())
        throw std::invalid_argument("sample_day: expected_demands size mismatch");
    DayScenario day;
    day.expected_demands = expected_demands;
    for (const Region& region : geo.regions) {
        const double mean = expected_demands[static_cast<std::size_t>(region.id)];
        if (mean < 0.0) throw std::invalid_argument("sample_day: negative expected demand");
        const int count = rng.poisson(mean);
        for (int k = 0; k < count; ++k) {
            Customer c;
            c.region_id = region.id;
            c.location.x = region.spatial_law.sample(rng) + region.x_shift_km;
            c.location.y = region.spatial_law.sample(rng);
            c.request_time = rng.uniform(0.0, params.request_window);
            day.customers.push_back(c);
        }
    }
    std::stable_sort(day.customers.begin(), day.customers.end(),
                     [](const Customer& a, const Customer& b) {
                         return a.request_time < b.request_time;
                     });
    for (std::size_t i = 1; i < day.customers.size(); ++i) {
        while (day.customers[i].request_time <= day.customers[i - 1].request_time) {
            day.customers[i].request_time =
                day.customers[i - 1].request_time + rng.uniform01() * 1e-6;
        }
    }
    for (std::size_t i = 0; i < day.customers.size(); ++i) {
        day.customers[i].id = static_cast<int>(i);
        day.customers[i].deadline = day.customers[i].request_time + params.deadline;
    }
    return day;
}

// The three built-in service-area layouts. Region boxes are drawn at
// center +/- 2 km; the warehouse sits in the no-service gap for (a), on
// Region 1's right border for (b), and at the strip center for (c).
inline Geography builtin_geography(const std::string& which) {
    Geography geo;
    geo.name = which;
    geo.circuity_factor = 1.4;
    geo.speed_kmh = 30.0;
    if (which == "a" || which == "b") {
        Region r1;
        r1.id = 0;
        r1.spatial_law = SpatialLaw::make_normal(5.0, 3.0);
        r1.x_shift_km = 0.0;
        Region r2;
        r2.id = 1;
        r2.spatial_law = SpatialLaw::make_normal(5.0, 3.0);
        r2.x_shift_km = 5.0;
        r1.demand_cap = 250.0;
        r2.demand_cap = 250.0;
        if (which == "a") {
            r1.initial_expected_demand = 200.0;
            r2.initial_expected_demand = 50.0;
            geo.warehouse = {7.5, 5.0}; // center of the gap between the boxes
        } else {
            r1.initial_expected_demand = 125.0;
            r2.initial_expected_demand = 125.0;
            geo.warehouse = {7.0, 5.0}; // right border of Region 1's box
        }
        geo.regions = {r1, r2};
        return geo;
    }
    if (which == "c") {
        const double demands[4] = {50.0, 100.0, 25.0, 75.0};
        for (int i = 0; i < 4; ++i) {
            Region r;
            r.id = i;
            r.spatial_law = SpatialLaw::make_uniform(0.0, 5.0);
            r.x_shift_km = 7.5 * i;
            r.initial_expected_demand = demands[i];
            r.demand_cap = 125.0;
            geo.regions.push_back(r);
        }
        geo.warehouse = {13.75, 2.5}; // center of the four-region strip
        return geo;
    }
    throw std::invalid_argument("builtin_geography: unknown geography '" + which + "'");
}

// Desk-scale variant: demands and caps divided by `scale`.
inline Geography scale_geography(Geography geo, double scale) {
    if (scale <= 0.0) throw std::invalid_argument("scale_geography: scale must be positive");
    for (Region& r : geo.regions) {
        r.initial_expected_demand /= scale;
        r.demand_cap /= scale;
    }
    return geo;
}

} // namespace sdd
