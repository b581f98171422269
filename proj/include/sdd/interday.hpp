#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sdd/intraday.hpp"
#include "sdd/policies.hpp"

namespace sdd {

// Service-level-driven demand transition, applied every tau_upd days.
struct DemandModel {
    enum class Kind { Capacitated, Uncapacitated };
    Kind kind = Kind::Capacitated;
    double alpha = 0.5;        // capacitated smoothing weight, in (0, 1)
    double r_bar = 0.5;        // uncapacitated service-level threshold, in (0, 1)
    std::vector<double> caps;  // per-region D_cap (capacitated only)

    static DemandModel capacitated(double alpha, std::vector<double> caps) {
        if (alpha <= 0.0 || alpha >= 1.0)
            throw std::invalid_argument("DemandModel: alpha must be in (0,1)");
        DemandModel m;
        m.kind = Kind::Capacitated;
        m.alpha = alpha;
        m.caps = std::move(caps);
        return m;
    }
    static DemandModel uncapacitated(double r_bar) {
        if (r_bar <= 0.0 || r_bar >= 1.0)
            throw std::invalid_argument("DemandModel: r_bar must be in (0,1)");
        DemandModel m;
        m.kind = Kind::Uncapacitated;
        m.r_bar = r_bar;
        return m;
    }
};

inline std::vector<double> update_demand(const DemandModel& model,
                                         const std::vector<double>& d_prev,
                                         const std::vector<double>& r) {
    if (d_prev.size() != r.size()) throw std::invalid_argument("update_demand: size mismatch");
    std::vector<double> d(d_prev.size());
    for (std::size_t i = 0; i < d_prev.size(); ++i) {
        if (model.kind == DemandModel::Kind::Capacitated) {
            d[i] = (1.0 - model.alpha) * d_prev[i] + model.alpha * model.caps[i] * r[i];
        } else {
            d[i] = d_prev[i] * (1.0 + r[i] - model.r_bar);
        }
        d[i] = std::max(d[i], 0.0);
    }
    return d;
}

struct HorizonConfig {
    int days = 720;    // M
    int tau_upd = 30;  // block length
    double empty_window_service_level = 1.0;

    int blocks() const {
        if (tau_upd <= 0 || days % tau_upd != 0)
            throw std::invalid_argument("HorizonConfig: tau_upd must divide days");
        return days / tau_upd;
    }
};

struct TrajectoryRow {
    int block = 0; // 0 = initial state, n = after the nth update
    int region = 0;
    double expected_demand = 0.0;
    int requested = 0; // block totals (0 for the initial row)
    int accepted = 0;
    double service_level = 0.0;
};

struct HorizonResult {
    std::vector<std::vector<int>> requested_by_day; // [day][region]
    std::vector<std::vector<int>> accepted_by_day;
    std::vector<std::vector<double>> demand_trajectory; // N+1 entries, [point][region]
    std::vector<TrajectoryRow> trajectory_rows;
    long total_services = 0;
    double average_daily_services = 0.0;
    std::vector<double> end_demand;
};

// Runs N tau_upd-day blocks: sample each day from the block's expected
// demands, simulate, then update the demands from the block's realized
// service levels. The first block uses the initial demands unmodified; the
// last update happens at termination.
inline HorizonResult run_horizon(const Geography& geo, const SimParams& params, int vehicles,
                                 const DemandModel& model, const HorizonConfig& horizon,
                                 Policy& policy, std::uint64_t seed) {
    const int I = geo.region_count();
    const int N = horizon.blocks();
    Rng rng(seed);
    HorizonResult result;
    std::vector<double> demand = geo.initial_demands();
    result.demand_trajectory.push_back(demand);
    for (int i = 0; i < I; ++i)
        result.trajectory_rows.push_back({0, i, demand[static_cast<std::size_t>(i)], 0, 0, 0.0});

    for (int block = 0; block < N; ++block) {
        policy.on_block_start(demand);
        std::vector<std::vector<int>> block_requested;
        std::vector<std::vector<int>> block_accepted;
        for (int day = 0; day < horizon.tau_upd; ++day) {
            const DayScenario scenario = sample_day(geo, params, demand, rng);
            const DayResult day_result =
                run_day(geo, params, vehicles, scenario,
                        [&policy](const DaySimulator& sim) { return policy.decide(sim); },
                        demand);
            result.requested_by_day.push_back(day_result.requested);
            result.accepted_by_day.push_back(day_result.accepted);
            block_requested.push_back(day_result.requested);
            block_accepted.push_back(day_result.accepted);
            result.total_services += day_result.total_services;
        }
        const std::vector<double> r = service_level(block_requested, block_accepted,
                                                    horizon.empty_window_service_level);
        demand = update_demand(model, demand, r);
        result.demand_trajectory.push_back(demand);
        for (int i = 0; i < I; ++i) {
            int req = 0;
            int acc = 0;
            for (int day = 0; day < horizon.tau_upd; ++day) {
                req += block_requested[static_cast<std::size_t>(day)][static_cast<std::size_t>(i)];
                acc += block_accepted[static_cast<std::size_t>(day)][static_cast<std::size_t>(i)];
            }
            result.trajectory_rows.push_back({block + 1, i, demand[static_cast<std::size_t>(i)],
                                              req, acc, r[static_cast<std::size_t>(i)]});
        }
    }
    result.end_demand = demand;
    result.average_daily_services =
        static_cast<double>(result.total_services) / horizon.days;
    return result;
}

struct SummaryMetrics {
    double mean_daily_services = 0.0;
    double se_daily_services = 0.0;
    std::vector<double> mean_end_demand;
    std::vector<double> se_end_demand;
    double improvement_vs_baseline_pct = 0.0; // on mean daily services
};

inline double relative_improvement_pct(double baseline, double policy_value) {
    return (policy_value - baseline) / baseline * 100.0;
}

inline SummaryMetrics summarize(const std::vector<HorizonResult>& results,
                                const std::vector<HorizonResult>* baseline = nullptr) {
    if (results.empty()) throw std::invalid_argument("summarize: no results");
    if (baseline && baseline->size() != results.size())
        throw std::invalid_argument("summarize: replication count mismatch with baseline");
    SummaryMetrics m;
    const std::size_t n = results.size();
    const std::size_t I = results.front().end_demand.size();
    double sum = 0.0;
    double sumsq = 0.0;
    std::vector<double> dsum(I, 0.0);
    std::vector<double> dsumsq(I, 0.0);
    for (const HorizonResult& r : results) {
        sum += r.average_daily_services;
        sumsq += r.average_daily_services * r.average_daily_services;
        for (std::size_t i = 0; i < I; ++i) {
            dsum[i] += r.end_demand[i];
            dsumsq[i] += r.end_demand[i] * r.end_demand[i];
        }
    }
    auto se = [n](double s, double sq) {
        if (n < 2) return 0.0;
        const double mean = s / static_cast<double>(n);
        const double var =
            std::max(0.0, (sq - static_cast<double>(n) * mean * mean) / (static_cast<double>(n) - 1));
        return std::sqrt(var / static_cast<double>(n));
    };
    m.mean_daily_services = sum / static_cast<double>(n);
    m.se_daily_services = se(sum, sumsq);
    m.mean_end_demand.resize(I);
    m.se_end_demand.resize(I);
    for (std::size_t i = 0; i < I; ++i) {
        m.mean_end_demand[i] = dsum[i] / static_cast<double>(n);
        m.se_end_demand[i] = se(dsum[i], dsumsq[i]);
    }
    if (baseline) {
        double bsum = 0.0;
        for (const HorizonResult& r : *baseline) bsum += r.average_daily_services;
        const double bmean = bsum / static_cast<double>(n);
        m.improvement_vs_baseline_pct = relative_improvement_pct(bmean, m.mean_daily_services);
    }
    return m;
}

} // namespace sdd
