#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sdd/dqn.hpp"
#include "sdd/interday.hpp"
#include "sdd/policies.hpp"
#include "sdd/shaping.hpp"

namespace sdd {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string geography = "a";
    std::string demand_model = "capacitated"; // or "uncapacitated"
    double alpha = 0.5;
    double r_bar = 0.5;
    std::string policy = "myopic";
    int horizon_days = 720;
    int tau_upd = 30;
    int fleet = 5;
    double scale = 10.0; // desk-scale divisor for demand and fleet
    double request_window = 420.0;
    double vehicle_window = 480.0;
    double deadline = 240.0;
    double load_time = 3.0;
    double service_time = 3.0;
    double speed_kmh = 30.0;
    double circuity = 1.4;
    int replications = 20;
    std::uint64_t base_seed = 1;
    int episodes = 5000;
    std::string weights; // path to the trained network
    bool train = false;
    std::string out_dir = "out";
    int threads = 0; // 0 = hardware concurrency
    double empty_window_service_level = 1.0;
    std::string label; // optional setting name used by sweep/compare

    int scaled_fleet() const {
        return std::max(1, static_cast<int>(fleet / scale));
    }

    SimParams sim_params() const {
        SimParams p;
        p.request_window = request_window;
        p.vehicle_window = vehicle_window;
        p.deadline = deadline;
        p.load_time = load_time;
        p.service_time = service_time;
        return p;
    }

    Geography make_geography() const {
        Geography geo = scale_geography(builtin_geography(geography), scale);
        geo.circuity_factor = circuity;
        geo.speed_kmh = speed_kmh;
        return geo;
    }
};

inline void validate(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("config field '" + field + "': " + why);
    };
    if (cfg.geography != "a" && cfg.geography != "b" && cfg.geography != "c")
        fail("geography", "must be a, b, or c");
    if (cfg.demand_model != "capacitated" && cfg.demand_model != "uncapacitated")
        fail("demand_model", "must be capacitated or uncapacitated");
    if (cfg.demand_model == "capacitated" && (cfg.alpha <= 0.0 || cfg.alpha >= 1.0))
        fail("alpha", "must be in (0,1)");
    if (cfg.demand_model == "uncapacitated" && (cfg.r_bar <= 0.0 || cfg.r_bar >= 1.0))
        fail("r_bar", "must be in (0,1)");
    static const char* names[] = {"myopic", "bucket", "intraday", "rrl", "mrl", "irl-e", "irl-p"};
    bool known = false;
    for (const char* n : names) known = known || cfg.policy == n;
    if (!known) fail("policy", "unknown policy name '" + cfg.policy + "'");
    if (cfg.horizon_days <= 0 || cfg.tau_upd <= 0 || cfg.horizon_days % cfg.tau_upd != 0)
        fail("tau_upd", "must be positive and divide horizon_days");
    if (cfg.fleet <= 0) fail("fleet", "must be positive");
    if (cfg.scale < 1.0) fail("scale", "must be >= 1");
    if (cfg.request_window <= 0.0 || cfg.vehicle_window < cfg.request_window)
        fail("vehicle_window", "need 0 < request_window <= vehicle_window");
    if (cfg.deadline <= 0.0 || cfg.load_time < 0.0 || cfg.service_time < 0.0)
        fail("deadline", "durations must be positive");
    if (cfg.speed_kmh <= 0.0 || cfg.circuity < 1.0)
        fail("speed_kmh", "need speed > 0 and circuity >= 1");
    if (cfg.replications <= 0) fail("replications", "must be positive");
    if (cfg.episodes <= 1) fail("episodes", "must exceed 1");
}

// ---- flat key = value config text ----------------------------------------

inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
    auto as_double = [&](const std::string& v) { return std::stod(v); };
    auto as_int = [&](const std::string& v) { return std::stoi(v); };
    auto as_bool = [&](const std::string& v) { return v == "1" || v == "true" || v == "yes"; };
    if (key == "geography") cfg.geography = value;
    else if (key == "demand_model") cfg.demand_model = value;
    else if (key == "alpha") cfg.alpha = as_double(value);
    else if (key == "r_bar") cfg.r_bar = as_double(value);
    else if (key == "policy") cfg.policy = value;
    else if (key == "horizon_days") cfg.horizon_days = as_int(value);
    else if (key == "tau_upd") cfg.tau_upd = as_int(value);
    else if (key == "fleet") cfg.fleet = as_int(value);
    else if (key == "scale") cfg.scale = as_double(value);
    else if (key == "request_window") cfg.request_window = as_double(value);
    else if (key == "vehicle_window") cfg.vehicle_window = as_double(value);
    else if (key == "deadline") cfg.deadline = as_double(value);
    else if (key == "load_time") cfg.load_time = as_double(value);
    else if (key == "service_time") cfg.service_time = as_double(value);
    else if (key == "speed_kmh") cfg.speed_kmh = as_double(value);
    else if (key == "circuity") cfg.circuity = as_double(value);
    else if (key == "replications") cfg.replications = as_int(value);
    else if (key == "base_seed") cfg.base_seed = std::stoull(value);
    else if (key == "episodes") cfg.episodes = as_int(value);
    else if (key == "weights") cfg.weights = value;
    else if (key == "train") cfg.train = as_bool(value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "threads") cfg.threads = as_int(value);
    else if (key == "empty_window_service_level")
        cfg.empty_window_service_level = as_double(value);
    else if (key == "label") cfg.label = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

inline ExperimentConfig parse_config_text(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::size_t eq = line.find('=');
        auto trim = [](std::string s) {
            const std::size_t b = s.find_first_not_of(" \t\r");
            const std::size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        if (eq == std::string::npos) {
            if (!trim(line).empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "geography = " << cfg.geography << '\n';
    out << "demand_model = " << cfg.demand_model << '\n';
    out << "alpha = " << cfg.alpha << '\n';
    out << "r_bar = " << cfg.r_bar << '\n';
    out << "policy = " << cfg.policy << '\n';
    out << "horizon_days = " << cfg.horizon_days << '\n';
    out << "tau_upd = " << cfg.tau_upd << '\n';
    out << "fleet = " << cfg.fleet << '\n';
    out << "scale = " << cfg.scale << '\n';
    out << "request_window = " << cfg.request_window << '\n';
    out << "vehicle_window = " << cfg.vehicle_window << '\n';
    out << "deadline = " << cfg.deadline << '\n';
    out << "load_time = " << cfg.load_time << '\n';
    out << "service_time = " << cfg.service_time << '\n';
    out << "speed_kmh = " << cfg.speed_kmh << '\n';
    out << "circuity = " << cfg.circuity << '\n';
    out << "replications = " << cfg.replications << '\n';
    out << "base_seed = " << cfg.base_seed << '\n';
    out << "episodes = " << cfg.episodes << '\n';
    out << "weights = " << cfg.weights << '\n';
    out << "train = " << (cfg.train ? 1 : 0) << '\n';
    out << "out_dir = " << cfg.out_dir << '\n';
    out << "threads = " << cfg.threads << '\n';
    out << "empty_window_service_level = " << cfg.empty_window_service_level << '\n';
    out << "label = " << cfg.label << '\n';
    return out.str();
}

// ---- policy construction --------------------------------------------------

inline bool policy_needs_network(const std::string& name) {
    return name == "intraday" || name == "rrl" || name == "mrl" || name == "irl-e" ||
           name == "irl-p";
}

inline TrainSchedule schedule_from(const ExperimentConfig& cfg) {
    TrainSchedule s;
    s.episodes = cfg.episodes;
    return s;
}

// Training seed is offset from the evaluation seeds (base_seed + rep).
inline std::uint64_t train_seed(const ExperimentConfig& cfg) {
    return cfg.base_seed + 999983;
}

inline QNetwork train_policy_network(const ExperimentConfig& cfg, const Geography& geo,
                                     const SimParams& params, int vehicles,
                                     TrainTrace* trace = nullptr) {
    const TrainSchedule schedule = schedule_from(cfg);
    const std::vector<double> initial = geo.initial_demands();
    ScenarioSource source;
    RewardRule reward = [](int) { return 1.0; };
    if (cfg.policy == "intraday" || cfg.policy == "mrl") {
        source = [initial](int, Rng&) { return initial; };
    } else if (cfg.policy == "rrl") {
        source = [initial](int, Rng&) { return initial; };
        reward = [initial](int region) { return rrl_reward(region, initial); };
    } else if (cfg.policy == "irl-e") {
        const ShapedDemandLaw law = shape_equal(geo);
        source = [law](int, Rng& rng) { return sample_training_demands(law, rng); };
    } else if (cfg.policy == "irl-p") {
        const ShapedDemandLaw law = shape_priority(geo, default_priorities(geo));
        source = [law](int, Rng& rng) { return sample_training_demands(law, rng); };
    } else {
        throw ConfigError("policy '" + cfg.policy + "' does not use a network");
    }
    return train(geo, params, vehicles, source, reward, schedule, train_seed(cfg), trace);
}

inline std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg, const Geography& geo,
                                           const SimParams& params, const QNetwork* net) {
    if (cfg.policy == "myopic") return std::make_unique<MyopicPolicy>();
    if (cfg.policy == "bucket") return std::make_unique<BucketPolicy>();
    if (!net) throw ConfigError("policy '" + cfg.policy + "' requires trained weights");
    const FeatureBounds bounds = feature_bounds(geo, params);
    if (cfg.policy == "mrl")
        return std::make_unique<MrlPolicy>(cfg.policy, *net, bounds, geo, params);
    return std::make_unique<QPolicy>(cfg.policy, *net, bounds, geo, params);
}

// ---- artifacts -------------------------------------------------------------

struct RunArtifacts {
    std::filesystem::path out_dir;
    std::filesystem::path summary_csv;
    std::filesystem::path trajectory_csv;
    std::filesystem::path config_echo;
    std::filesystem::path seed_ledger;
    std::filesystem::path weights_file; // empty for untrained policies
    std::vector<HorizonResult> results;
    SummaryMetrics metrics;
};

namespace detail {

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace detail

inline RunArtifacts run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const Geography geo = cfg.make_geography();
    const SimParams params = cfg.sim_params();
    const int vehicles = cfg.scaled_fleet();

    RunArtifacts artifacts;
    artifacts.out_dir = cfg.out_dir;
    std::filesystem::create_directories(artifacts.out_dir);

    // Resolve the network for learning policies: load when present, train on
    // request, otherwise fail with the remedy.
    QNetwork net;
    bool have_net = false;
    if (policy_needs_network(cfg.policy)) {
        std::filesystem::path weights = cfg.weights.empty()
                                            ? artifacts.out_dir / ("weights_" + cfg.policy + ".txt")
                                            : std::filesystem::path(cfg.weights);
        if (std::filesystem::exists(weights) && !cfg.train) {
            net = load_qnetwork(weights.string());
        } else if (cfg.train) {
            net = train_policy_network(cfg, geo, params, vehicles);
            save_qnetwork(net, weights.string());
        } else {
            throw ConfigError("policy '" + cfg.policy + "' has no weights at '" +
                              weights.string() + "'; pass train = 1 or point 'weights' at a file");
        }
        have_net = true;
        artifacts.weights_file = weights;
    }

    const std::unique_ptr<Policy> policy = make_policy(cfg, geo, params, have_net ? &net : nullptr);
    const DemandModel model = cfg.demand_model == "capacitated"
                                  ? DemandModel::capacitated(cfg.alpha, geo.demand_caps())
                                  : DemandModel::uncapacitated(cfg.r_bar);
    HorizonConfig horizon;
    horizon.days = cfg.horizon_days;
    horizon.tau_upd = cfg.tau_upd;
    horizon.empty_window_service_level = cfg.empty_window_service_level;

    artifacts.results.resize(static_cast<std::size_t>(cfg.replications));
    const int nthreads = cfg.threads > 0
                             ? cfg.threads
                             : std::max(1u, std::thread::hardware_concurrency());
    std::atomic<int> next_rep{0};
    auto worker = [&]() {
        for (;;) {
            const int rep = next_rep.fetch_add(1);
            if (rep >= cfg.replications) return;
            artifacts.results[static_cast<std::size_t>(rep)] =
                run_horizon(geo, params, vehicles, model, horizon, *policy,
                            cfg.base_seed + static_cast<std::uint64_t>(rep));
        }
    };
    if (nthreads <= 1 || cfg.replications == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min(nthreads, cfg.replications); ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    artifacts.metrics = summarize(artifacts.results);

    // Summary CSV: one row per replication, floats at 6 significant digits.
    artifacts.summary_csv = artifacts.out_dir / "summary.csv";
    {
        std::ofstream out(artifacts.summary_csv);
        out << "replication,total_services,avg_daily_services";
        for (int i = 0; i < geo.region_count(); ++i) out << ",end_demand_" << i;
        out << '\n';
        for (int rep = 0; rep < cfg.replications; ++rep) {
            const HorizonResult& r = artifacts.results[static_cast<std::size_t>(rep)];
            out << rep << ',' << r.total_services << ','
                << detail::fmt6(r.average_daily_services);
            for (double d : r.end_demand) out << ',' << detail::fmt6(d);
            out << '\n';
        }
    }
    artifacts.trajectory_csv = artifacts.out_dir / "trajectory.csv";
    {
        std::ofstream out(artifacts.trajectory_csv);
        out << "replication,block,region,expected_demand,requested,accepted,service_level\n";
        for (int rep = 0; rep < cfg.replications; ++rep) {
            for (const TrajectoryRow& row :
                 artifacts.results[static_cast<std::size_t>(rep)].trajectory_rows) {
                out << rep << ',' << row.block << ',' << row.region << ','
                    << detail::fmt6(row.expected_demand) << ',' << row.requested << ','
                    << row.accepted << ',' << detail::fmt6(row.service_level) << '\n';
            }
        }
    }
    artifacts.config_echo = artifacts.out_dir / "config.echo";
    {
        std::ofstream out(artifacts.config_echo);
        out << serialize_config(cfg);
    }
    artifacts.seed_ledger = artifacts.out_dir / "seeds.csv";
    {
        std::ofstream out(artifacts.seed_ledger);
        out << "purpose,seed\n";
        if (policy_needs_network(cfg.policy)) out << "train," << train_seed(cfg) << '\n';
        for (int rep = 0; rep < cfg.replications; ++rep)
            out << "replication_" << rep << ',' << cfg.base_seed + static_cast<std::uint64_t>(rep)
                << '\n';
    }
    return artifacts;
}

// ---- the 33-setting grid ----------------------------------------------------

inline std::vector<ExperimentConfig> sweep_grid(double scale) {
    if (scale < 1.0) throw ConfigError("sweep_grid: scale must be >= 1");
    std::vector<ExperimentConfig> grid;
    for (const std::string geo : {"a", "b", "c"}) {
        for (const double alpha : {0.25, 0.5, 0.75}) {
            ExperimentConfig cfg;
            cfg.geography = geo;
            cfg.demand_model = "capacitated";
            cfg.alpha = alpha;
            cfg.scale = scale;
            std::ostringstream label;
            label << geo << "_cap_alpha" << alpha;
            cfg.label = label.str();
            grid.push_back(cfg);
        }
        for (int k = 0; k < 8; ++k) {
            const double r_bar = 0.5 + 0.05 * k;
            ExperimentConfig cfg;
            cfg.geography = geo;
            cfg.demand_model = "uncapacitated";
            cfg.r_bar = r_bar;
            cfg.scale = scale;
            std::ostringstream label;
            label << geo << "_uncap_rbar" << r_bar;
            cfg.label = label.str();
            grid.push_back(cfg);
        }
    }
    return grid;
}

// ---- summary parsing and comparison ----------------------------------------

struct SummaryRow {
    int replication = 0;
    long total_services = 0;
    double avg_daily_services = 0.0;
    std::vector<double> end_demand;
};

inline std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_summary_csv: cannot open " + path.string());
    std::vector<SummaryRow> rows;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_summary_csv: empty file");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        SummaryRow row;
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col == 0) row.replication = std::stoi(cell);
            else if (col == 1) row.total_services = std::stol(cell);
            else if (col == 2) row.avg_daily_services = std::stod(cell);
            else row.end_demand.push_back(std::stod(cell));
            ++col;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

struct ComparisonRow {
    std::string label;
    double baseline_services = 0.0;
    double policy_services = 0.0;
    double services_improvement_pct = 0.0;
    double baseline_end_demand = 0.0; // summed over regions
    double policy_end_demand = 0.0;
    double demand_improvement_pct = 0.0;
};

inline ComparisonRow compare_summaries(const std::vector<SummaryRow>& policy,
                                       const std::vector<SummaryRow>& baseline,
                                       const std::string& label = "") {
    if (policy.size() != baseline.size() || policy.empty())
        throw ConfigError("compare: replication counts differ between policy and baseline");
    auto mean_services = [](const std::vector<SummaryRow>& rows) {
        double s = 0.0;
        for (const SummaryRow& r : rows) s += r.avg_daily_services;
        return s / static_cast<double>(rows.size());
    };
    auto mean_demand = [](const std::vector<SummaryRow>& rows) {
        double s = 0.0;
        for (const SummaryRow& r : rows)
            for (double d : r.end_demand) s += d;
        return s / static_cast<double>(rows.size());
    };
    ComparisonRow row;
    row.label = label;
    row.baseline_services = mean_services(baseline);
    row.policy_services = mean_services(policy);
    row.services_improvement_pct =
        relative_improvement_pct(row.baseline_services, row.policy_services);
    row.baseline_end_demand = mean_demand(baseline);
    row.policy_end_demand = mean_demand(policy);
    row.demand_improvement_pct =
        relative_improvement_pct(row.baseline_end_demand, row.policy_end_demand);
    return row;
}

// Compares two artifact trees: either two single runs (summary.csv directly
// in each directory) or two sweep roots with matching per-setting subruns.
inline std::vector<ComparisonRow> compare_artifact_dirs(const std::filesystem::path& policy_dir,
                                                        const std::filesystem::path& baseline_dir) {
    namespace fs = std::filesystem;
    if (fs::exists(policy_dir / "summary.csv")) {
        if (!fs::exists(baseline_dir / "summary.csv"))
            throw ConfigError("compare: baseline has no summary.csv at " + baseline_dir.string());
        return {compare_summaries(read_summary_csv(policy_dir / "summary.csv"),
                                  read_summary_csv(baseline_dir / "summary.csv"),
                                  policy_dir.filename().string())};
    }
    std::map<std::string, fs::path> settings;
    for (const auto& entry : fs::directory_iterator(policy_dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "summary.csv"))
            settings[entry.path().filename().string()] = entry.path();
    }
    if (settings.empty()) throw ConfigError("compare: no summaries under " + policy_dir.string());
    std::vector<ComparisonRow> rows;
    std::string missing;
    for (const auto& [name, path] : settings) {
        const fs::path other = baseline_dir / name / "summary.csv";
        if (!fs::exists(other)) {
            missing += (missing.empty() ? "" : ", ") + name;
            continue;
        }
        rows.push_back(compare_summaries(read_summary_csv(path / "summary.csv"),
                                         read_summary_csv(other), name));
    }
    if (!missing.empty()) throw ConfigError("compare: baseline missing settings: " + missing);
    return rows;
}

} // namespace sdd
