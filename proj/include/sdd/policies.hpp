#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdd/dqn.hpp"
#include "sdd/intraday.hpp"

namespace sdd {

class Policy {
public:
    virtual ~Policy() = default;
    virtual int decide(const DaySimulator& sim) = 0;
    virtual const std::string& name() const = 0;
    virtual bool requires_training() const { return false; }

    // Called at the start of each inter-day block with the block's expected
    // demands; stateless policies ignore it.
    virtual void on_block_start(const std::vector<double>& /*expected_demands*/) {}
};

// Accept whenever some vehicle is feasible, via the smallest insertion delta.
// Ties go to the lowest vehicle id.
inline int myopic_decide(const std::vector<InsertionResult>& options) {
    int best = 0;
    double best_delta = kInfeasibleDelta;
    for (std::size_t p = 0; p < options.size(); ++p) {
        if (options[p].feasible && options[p].delta_time < best_delta) {
            best_delta = options[p].delta_time;
            best = static_cast<int>(p) + 1;
        }
    }
    return best;
}

class MyopicPolicy : public Policy {
public:
    int decide(const DaySimulator& sim) override { return myopic_decide(sim.options()); }
    const std::string& name() const override {
        static const std::string n = "myopic";
        return n;
    }
};

// Caps each region's daily acceptances at the mean expected regional demand,
// otherwise behaves myopically.
inline int bucket_decide(const IntraDayState& state, const std::vector<InsertionResult>& options,
                         const std::vector<double>& expected_demands) {
    double total = 0.0;
    for (double d : expected_demands) total += d;
    const double cap = total / static_cast<double>(expected_demands.size());
    const std::size_t region = static_cast<std::size_t>(state.pending_customer.region_id);
    if (state.region_accepted_today[region] >= cap) return 0;
    return myopic_decide(options);
}

class BucketPolicy : public Policy {
public:
    int decide(const DaySimulator& sim) override {
        return bucket_decide(sim.state(), sim.options(), sim.state().region_expected);
    }
    const std::string& name() const override {
        static const std::string n = "bucket";
        return n;
    }
};

// Training-time reward weight for RRL: max initial demand over the region's
// initial demand.
inline double rrl_reward(int region, const std::vector<double>& initial_demands) {
    double dmax = 0.0;
    for (double d : initial_demands) {
        if (d <= 0.0) throw std::invalid_argument("rrl_reward: nonpositive regional demand");
        dmax = std::max(dmax, d);
    }
    return dmax / initial_demands[static_cast<std::size_t>(region)];
}

// Greedy policy over a trained Q-network (intra-day, RRL, IRL-E, IRL-P).
class QPolicy : public Policy {
public:
    QPolicy(std::string name, QNetwork net, FeatureBounds bounds, const Geography& geo,
            const SimParams& params)
        : name_(std::move(name)), net_(std::move(net)), bounds_(bounds), geo_(&geo),
          params_(&params) {}

    int decide(const DaySimulator& sim) override {
        const std::vector<double> features =
            extract_features(sim.state(), sim.options(), *geo_, *params_, bounds_);
        return greedy_decide(net_, features, feasible_mask(sim.options()));
    }
    const std::string& name() const override { return name_; }
    bool requires_training() const override { return true; }

    const QNetwork& network() const { return net_; }

protected:
    std::string name_;
    QNetwork net_;
    FeatureBounds bounds_;
    const Geography* geo_;
    const SimParams* params_;
};

// Deployment-time reward manipulation on top of the plain intra-day network:
// acceptance Q-values gain (w_region - 1) with w = D_max / D_region for the
// current block's expected demands.
inline int mrl_decide(const QNetwork& net, const std::vector<double>& features,
                      const std::vector<bool>& feasible, int region,
                      const std::vector<double>& current_demands) {
    constexpr double kDemandFloor = 1e-6;
    double dmax = 0.0;
    for (double d : current_demands) dmax = std::max(dmax, d);
    const double w =
        dmax / std::max(current_demands[static_cast<std::size_t>(region)], kDemandFloor);
    std::vector<double> q = forward(net, features);
    for (std::size_t a = 1; a < q.size(); ++a) q[a] += (w - 1.0);
    int best = -1;
    for (std::size_t a = 0; a < q.size(); ++a) {
        if (!feasible[a]) continue;
        if (best < 0 || q[a] > q[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
    }
    if (best < 0) throw std::logic_error("mrl_decide: no feasible decision");
    return best;
}

class MrlPolicy : public QPolicy {
public:
    using QPolicy::QPolicy;

    int decide(const DaySimulator& sim) override {
        const std::vector<double> features =
            extract_features(sim.state(), sim.options(), *geo_, *params_, bounds_);
        return mrl_decide(net_, features, feasible_mask(sim.options()),
                          sim.state().pending_customer.region_id, sim.state().region_expected);
    }
};

} // namespace sdd
