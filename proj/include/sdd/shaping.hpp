#pragma once

#include <stdexcept>
#include <vector>

#include "sdd/instance.hpp"
#include "sdd/rng.hpp"

namespace sdd {

// Training-scenario demand law: one truncated-normal draw of expected demand
// per region per training day.
struct ShapedDemandLaw {
    std::vector<double> means; // E D-hat per region
    std::vector<double> covs;  // coefficient of variation per region
};

// IRL-E: every region's mean is the average initial demand, COV 0.5.
inline ShapedDemandLaw shape_equal(const Geography& geo) {
    const std::vector<double> d = geo.initial_demands();
    double total = 0.0;
    for (double v : d) total += v;
    const double mean = total / static_cast<double>(d.size());
    ShapedDemandLaw law;
    law.means.assign(d.size(), mean);
    law.covs.assign(d.size(), 0.5);
    return law;
}

// Default priority assignment: regions with above-average initial demand;
// when all demands are equal, the region(s) closest to the warehouse.
inline std::vector<bool> default_priorities(const Geography& geo) {
    const std::vector<double> d = geo.initial_demands();
    double total = 0.0;
    for (double v : d) total += v;
    const double avg = total / static_cast<double>(d.size());
    std::vector<bool> priority(d.size(), false);
    bool any = false;
    bool all = true;
    for (std::size_t i = 0; i < d.size(); ++i) {
        priority[i] = d[i] > avg;
        any = any || priority[i];
        all = all && priority[i];
    }
    if (any && !all) return priority;
    // Equal demands: prioritize by proximity to the warehouse.
    double best = 0.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double dist = euclidean_km(geo.warehouse, geo.region_center(static_cast<int>(i)));
        if (i == 0 || dist < best) {
            best = dist;
            best_i = i;
        }
    }
    priority.assign(d.size(), false);
    priority[best_i] = true;
    return priority;
}

// IRL-P: total initial demand split so each priority region's mean is four
// times each non-priority region's; COV 0.25 for priority regions, 0.5
// otherwise.
inline ShapedDemandLaw shape_priority(const Geography& geo, const std::vector<bool>& priorities) {
    if (priorities.size() != geo.regions.size())
        throw std::invalid_argument("shape_priority: priority flag count mismatch");
    int n_priority = 0;
    for (bool p : priorities) n_priority += p ? 1 : 0;
    const int n_regular = static_cast<int>(priorities.size()) - n_priority;
    if (n_priority == 0 || n_regular == 0)
        throw std::invalid_argument("shape_priority: need at least one priority and one non-priority region");
    double total = 0.0;
    for (const Region& r : geo.regions) total += r.initial_expected_demand;
    const double base = total / (4.0 * n_priority + n_regular);
    ShapedDemandLaw law;
    law.means.resize(priorities.size());
    law.covs.resize(priorities.size());
    for (std::size_t i = 0; i < priorities.size(); ++i) {
        law.means[i] = priorities[i] ? 4.0 * base : base;
        law.covs[i] = priorities[i] ? 0.25 : 0.5;
    }
    return law;
}

// One expected-demand vector for a training day; truncation at zero is by
// rejection resampling.
inline std::vector<double> sample_training_demands(const ShapedDemandLaw& law, Rng& rng) {
    std::vector<double> d(law.means.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        double v;
        do {
            v = rng.normal(law.means[i], law.covs[i] * law.means[i]);
        } while (v < 0.0);
        d[i] = v;
    }
    return d;
}

} // namespace sdd
