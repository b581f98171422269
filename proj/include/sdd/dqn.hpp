#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdd/intraday.hpp"
#include "sdd/rng.hpp"

namespace sdd {

// Plain feedforward net: input -> 50 ReLU -> 50 ReLU -> (P+1) linear.
struct QNetwork {
    int in = 0;
    int h1 = 50;
    int h2 = 50;
    int out = 0;
    std::vector<double> w1, b1; // w1: h1 x in, row-major
    std::vector<double> w2, b2; // w2: h2 x h1
    std::vector<double> w3, b3; // w3: out x h2

    std::size_t parameter_count() const {
        return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
    }
};

inline QNetwork make_qnetwork(int in, int out, Rng& rng, int hidden = 50) {
    QNetwork net;
    net.in = in;
    net.h1 = hidden;
    net.h2 = hidden;
    net.out = out;
    auto init = [&rng](std::vector<double>& w, int rows, int cols, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        w.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
        for (double& v : w) v = rng.uniform(-bound, bound);
    };
    init(net.w1, net.h1, net.in, net.in);
    init(net.b1, net.h1, 1, net.in);
    init(net.w2, net.h2, net.h1, net.h1);
    init(net.b2, net.h2, 1, net.h1);
    init(net.w3, net.out, net.h2, net.h2);
    init(net.b3, net.out, 1, net.h2);
    return net;
}

namespace detail {

struct ForwardCache {
    std::vector<double> x;  // input
    std::vector<double> a1; // post-ReLU hidden 1
    std::vector<double> a2; // post-ReLU hidden 2
    std::vector<double> q;  // linear output
};

inline void affine_relu(const std::vector<double>& w, const std::vector<double>& b,
                        const std::vector<double>& x, std::vector<double>& out, bool relu) {
    const std::size_t rows = b.size();
    const std::size_t cols = x.size();
    out.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b[r];
        const double* wr = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        out[r] = relu ? std::max(acc, 0.0) : acc;
    }
}

inline ForwardCache forward_cached(const QNetwork& net, const std::vector<double>& features) {
    if (static_cast<int>(features.size()) != net.in)
        throw std::invalid_argument("forward: feature length mismatch");
    ForwardCache cache;
    cache.x = features;
    affine_relu(net.w1, net.b1, cache.x, cache.a1, true);
    affine_relu(net.w2, net.b2, cache.a1, cache.a2, true);
    affine_relu(net.w3, net.b3, cache.a2, cache.q, false);
    return cache;
}

} // namespace detail

inline std::vector<double> forward(const QNetwork& net, const std::vector<double>& features) {
    return detail::forward_cached(net, features).q;
}

// Argmax of Q over the feasible decisions; ties go to the lowest index.
inline int greedy_decide(const QNetwork& net, const std::vector<double>& features,
                         const std::vector<bool>& feasible) {
    const std::vector<double> q = forward(net, features);
    if (q.size() != feasible.size())
        throw std::invalid_argument("greedy_decide: mask length mismatch");
    int best = -1;
    for (std::size_t a = 0; a < q.size(); ++a) {
        if (!feasible[a]) continue;
        if (best < 0 || q[a] > q[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
    }
    if (best < 0) throw std::logic_error("greedy_decide: empty feasible set");
    return best;
}

struct Gradients {
    std::vector<double> w1, b1, w2, b2, w3, b3;

    static Gradients zeros_like(const QNetwork& net) {
        Gradients g;
        g.w1.assign(net.w1.size(), 0.0);
        g.b1.assign(net.b1.size(), 0.0);
        g.w2.assign(net.w2.size(), 0.0);
        g.b2.assign(net.b2.size(), 0.0);
        g.w3.assign(net.w3.size(), 0.0);
        g.b3.assign(net.b3.size(), 0.0);
        return g;
    }
};

struct BatchSample {
    std::vector<double> features;
    int action = 0;
};

// Gradients of the mean squared error between Q(s, a_taken) and the targets.
inline Gradients backward(const QNetwork& net, const std::vector<BatchSample>& batch,
                          const std::vector<double>& targets, double* loss_out = nullptr) {
    if (batch.empty()) throw std::invalid_argument("backward: empty batch");
    if (batch.size() != targets.size())
        throw std::invalid_argument("backward: batch/target size mismatch");
    Gradients g = Gradients::zeros_like(net);
    const double scale = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    std::vector<double> dq(static_cast<std::size_t>(net.out));
    std::vector<double> da2(static_cast<std::size_t>(net.h2));
    std::vector<double> da1(static_cast<std::size_t>(net.h1));
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const detail::ForwardCache cache = detail::forward_cached(net, batch[n].features);
        const std::size_t a = static_cast<std::size_t>(batch[n].action);
        const double err = cache.q[a] - targets[n];
        loss += err * err * scale;

        std::fill(dq.begin(), dq.end(), 0.0);
        dq[a] = 2.0 * err * scale;

        // Output layer.
        std::fill(da2.begin(), da2.end(), 0.0);
        for (int r = 0; r < net.out; ++r) {
            if (dq[static_cast<std::size_t>(r)] == 0.0) continue;
            const double d = dq[static_cast<std::size_t>(r)];
            g.b3[static_cast<std::size_t>(r)] += d;
            double* gw = g.w3.data() + static_cast<std::size_t>(r) * cache.a2.size();
            const double* w = net.w3.data() + static_cast<std::size_t>(r) * cache.a2.size();
            for (std::size_t c = 0; c < cache.a2.size(); ++c) {
                gw[c] += d * cache.a2[c];
                da2[c] += d * w[c];
            }
        }
        // Hidden layer 2.
        std::fill(da1.begin(), da1.end(), 0.0);
        for (int r = 0; r < net.h2; ++r) {
            if (cache.a2[static_cast<std::size_t>(r)] <= 0.0) continue; // ReLU gate
            const double d = da2[static_cast<std::size_t>(r)];
            if (d == 0.0) continue;
            g.b2[static_cast<std::size_t>(r)] += d;
            double* gw = g.w2.data() + static_cast<std::size_t>(r) * cache.a1.size();
            const double* w = net.w2.data() + static_cast<std::size_t>(r) * cache.a1.size();
            for (std::size_t c = 0; c < cache.a1.size(); ++c) {
                gw[c] += d * cache.a1[c];
                da1[c] += d * w[c];
            }
        }
        // Hidden layer 1.
        for (int r = 0; r < net.h1; ++r) {
            if (cache.a1[static_cast<std::size_t>(r)] <= 0.0) continue;
            const double d = da1[static_cast<std::size_t>(r)];
            if (d == 0.0) continue;
            g.b1[static_cast<std::size_t>(r)] += d;
            double* gw = g.w1.data() + static_cast<std::size_t>(r) * cache.x.size();
            for (std::size_t c = 0; c < cache.x.size(); ++c) gw[c] += d * cache.x[c];
        }
    }
    if (loss_out) *loss_out = loss;
    return g;
}

// Adam keeps per-parameter moments; its state lives only inside train().
class AdamOptimizer {
public:
    AdamOptimizer(const QNetwork& net, double lr)
        : lr_(lr), m_(Gradients::zeros_like(net)), v_(Gradients::zeros_like(net)) {}

    void step(QNetwork& net, const Gradients& g) {
        ++t_;
        update(net.w1, g.w1, m_.w1, v_.w1);
        update(net.b1, g.b1, m_.b1, v_.b1);
        update(net.w2, g.w2, m_.w2, v_.w2);
        update(net.b2, g.b2, m_.b2, v_.b2);
        update(net.w3, g.w3, m_.w3, v_.w3);
        update(net.b3, g.b3, m_.b3, v_.b3);
    }

private:
    void update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                std::vector<double>& v) {
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            p[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps_);
        }
    }

    double lr_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long t_ = 0;
    Gradients m_, v_;
};

struct Transition {
    std::vector<double> features;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_features;
    std::vector<bool> next_feasible;
    bool terminal = false;
};

// Fixed-capacity ring with FIFO eviction and uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(Transition t) {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[head_] = std::move(t);
            head_ = (head_ + 1) % capacity_;
        }
    }

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return data_[i]; }

    const Transition& sample(Rng& rng) const {
        return data_[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(data_.size())))];
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> data_;
};

struct TrainSchedule {
    int episodes = 5000; // one episode = one simulated day
    double eps_start = 1.0;
    double eps_end = 0.01;
    double learning_rate = 1e-3;
    int batch_size = 32;
    double gamma = 1.0; // episodic, undiscounted
    int target_sync = 1000;
    std::size_t replay_capacity = 10000;
    int train_pool = 1500;
    int test_pool = 500;
    std::size_t warmup = 500; // transitions before updates begin
};

// Exponential decay from eps_start at episode 0 to eps_end at the last one.
inline double epsilon_at(const TrainSchedule& schedule, int episode) {
    if (schedule.episodes <= 1) return schedule.eps_end;
    const double frac = static_cast<double>(episode) / (schedule.episodes - 1);
    return schedule.eps_start * std::pow(schedule.eps_end / schedule.eps_start, frac);
}

struct TrainTrace {
    std::vector<double> episode_loss;
    std::vector<int> episode_services;
};

// Per-training-day expected demands; fixed for the plain intra-day policy,
// drawn from a shaped law for the IRL variants.
using ScenarioSource = std::function<std::vector<double>(int episode, Rng& rng)>;
using RewardRule = std::function<double(int region)>;

inline QNetwork train(const Geography& geo, const SimParams& params, int vehicles,
                      const ScenarioSource& scenario_source, const RewardRule& reward_rule,
                      const TrainSchedule& schedule, std::uint64_t seed,
                      TrainTrace* trace = nullptr) {
    Rng rng(seed);
    const FeatureBounds bounds = feature_bounds(geo, params);
    const int in = feature_length(geo.region_count(), vehicles);
    const int out = vehicles + 1;

    // Fixed instance pool, cycled across episodes.
    struct PoolEntry {
        std::vector<double> demands;
        std::uint64_t scenario_seed;
    };
    std::vector<PoolEntry> pool;
    pool.reserve(static_cast<std::size_t>(schedule.train_pool));
    for (int i = 0; i < schedule.train_pool; ++i) {
        PoolEntry e;
        e.demands = scenario_source(i, rng);
        e.scenario_seed = rng.next_u64();
        pool.push_back(std::move(e));
    }

    QNetwork net = make_qnetwork(in, out, rng);
    QNetwork target = net;
    AdamOptimizer opt(net, schedule.learning_rate);
    ReplayBuffer replay(schedule.replay_capacity);
    long updates = 0;

    std::vector<BatchSample> batch(static_cast<std::size_t>(schedule.batch_size));
    std::vector<double> targets(static_cast<std::size_t>(schedule.batch_size));

    for (int episode = 0; episode < schedule.episodes; ++episode) {
        const double eps = epsilon_at(schedule, episode);
        const PoolEntry& entry = pool[static_cast<std::size_t>(episode) % pool.size()];
        Rng day_rng(entry.scenario_seed);
        const DayScenario scenario = sample_day(geo, params, entry.demands, day_rng);
        DaySimulator sim(geo, params, vehicles, scenario, entry.demands);

        double episode_loss = 0.0;
        long episode_updates = 0;
        int services = 0;
        bool have_features = false;
        std::vector<double> features;
        std::vector<bool> mask;
        while (!sim.done()) {
            if (!have_features) {
                features = extract_features(sim.state(), sim.options(), geo, params, bounds);
                mask = feasible_mask(sim.options());
            }
            int action;
            if (rng.uniform01() < eps) {
                std::vector<int> feas;
                for (std::size_t a = 0; a < mask.size(); ++a)
                    if (mask[a]) feas.push_back(static_cast<int>(a));
                action = feas[static_cast<std::size_t>(
                    rng.uniform_int(static_cast<int>(feas.size())))];
            } else {
                action = greedy_decide(net, features, mask);
            }
            const int region = sim.state().pending_customer.region_id;
            sim.step(action);
            const double reward = action != 0 ? reward_rule(region) : 0.0;
            if (action != 0) ++services;

            Transition t;
            t.features = std::move(features);
            t.action = action;
            t.reward = reward;
            t.terminal = sim.done();
            if (!t.terminal) {
                t.next_features =
                    extract_features(sim.state(), sim.options(), geo, params, bounds);
                t.next_feasible = feasible_mask(sim.options());
                features = t.next_features;
                mask = t.next_feasible;
                have_features = true;
            } else {
                have_features = false;
            }
            replay.push(std::move(t));

            if (replay.size() >= schedule.warmup) {
                for (int b = 0; b < schedule.batch_size; ++b) {
                    const Transition& s = replay.sample(rng);
                    batch[static_cast<std::size_t>(b)].features = s.features;
                    batch[static_cast<std::size_t>(b)].action = s.action;
                    double y = s.reward;
                    if (!s.terminal) {
                        const std::vector<double> qn = forward(target, s.next_features);
                        double best = -std::numeric_limits<double>::infinity();
                        for (std::size_t a = 0; a < qn.size(); ++a)
                            if (s.next_feasible[a]) best = std::max(best, qn[a]);
                        y += schedule.gamma * best;
                    }
                    targets[static_cast<std::size_t>(b)] = y;
                }
                double loss = 0.0;
                const Gradients g = backward(net, batch, targets, &loss);
                if (!std::isfinite(loss) || loss > 1e6) {
                    std::ostringstream msg;
                    msg << "train: divergence at episode " << episode << ", loss " << loss;
                    throw std::runtime_error(msg.str());
                }
                opt.step(net, g);
                episode_loss += loss;
                ++episode_updates;
                ++updates;
                if (updates % schedule.target_sync == 0) target = net;
            }
        }
        (void)sim.finish();
        if (trace) {
            trace->episode_loss.push_back(episode_updates > 0 ? episode_loss / episode_updates
                                                              : 0.0);
            trace->episode_services.push_back(services);
        }
    }
    return net;
}

// ---- weight persistence -------------------------------------------------

inline void save_qnetwork(const QNetwork& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_qnetwork: cannot open " + path);
    out << "sdd-qnet 1\n";
    out << net.in << ' ' << net.h1 << ' ' << net.h2 << ' ' << net.out << '\n';
    out << std::setprecision(17);
    auto dump = [&out](const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) out << v[i] << (i + 1 < v.size() ? ' ' : '\n');
        if (v.empty()) out << '\n';
    };
    dump(net.w1);
    dump(net.b1);
    dump(net.w2);
    dump(net.b2);
    dump(net.w3);
    dump(net.b3);
}

inline QNetwork load_qnetwork(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_qnetwork: cannot open " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "sdd-qnet" || version != 1)
        throw std::runtime_error("load_qnetwork: unrecognized weight file " + path);
    QNetwork net;
    in >> net.in >> net.h1 >> net.h2 >> net.out;
    auto slurp = [&in, &path](std::vector<double>& v, std::size_t n) {
        v.resize(n);
        for (double& x : v)
            if (!(in >> x)) throw std::runtime_error("load_qnetwork: truncated file " + path);
    };
    slurp(net.w1, static_cast<std::size_t>(net.h1) * static_cast<std::size_t>(net.in));
    slurp(net.b1, static_cast<std::size_t>(net.h1));
    slurp(net.w2, static_cast<std::size_t>(net.h2) * static_cast<std::size_t>(net.h1));
    slurp(net.b2, static_cast<std::size_t>(net.h2));
    slurp(net.w3, static_cast<std::size_t>(net.out) * static_cast<std::size_t>(net.h2));
    slurp(net.b3, static_cast<std::size_t>(net.out));
    return net;
}

} // namespace sdd
