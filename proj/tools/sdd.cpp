#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "sdd/harness.hpp"
#include "sdd/steady_state.hpp"

namespace {

double total_end_demand(const sdd::SummaryMetrics& m) {
    double s = 0.0;
    for (double d : m.mean_end_demand) s += d;
    return s;
}

sdd::ExperimentConfig load_config(const std::string& config_path,
                                  const std::vector<std::string>& overrides) {
    sdd::ExperimentConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw sdd::ConfigError("cannot open config file '" + config_path + "'");
        cfg = sdd::parse_config_text(in);
    }
    for (const std::string& kv : overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw sdd::ConfigError("override '" + kv + "' is not key=value");
        sdd::apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

void add_config_options(CLI::App* sub, std::string& config_path,
                        std::vector<std::string>& overrides) {
    sub->add_option("--config", config_path, "flat key = value config file");
    sub->add_option("--set", overrides, "override as key=value (repeatable)");
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides) {
    sdd::ExperimentConfig cfg = load_config(config_path, overrides);
    cfg.train = true;
    sdd::validate(cfg);
    if (!sdd::policy_needs_network(cfg.policy))
        throw sdd::ConfigError("policy '" + cfg.policy + "' takes no training");
    const sdd::Geography geo = cfg.make_geography();
    const sdd::SimParams params = cfg.sim_params();
    sdd::TrainTrace trace;
    const sdd::QNetwork net =
        sdd::train_policy_network(cfg, geo, params, cfg.scaled_fleet(), &trace);
    std::filesystem::create_directories(cfg.out_dir);
    const std::string weights =
        cfg.weights.empty() ? (std::filesystem::path(cfg.out_dir) / ("weights_" + cfg.policy + ".txt")).string()
                            : cfg.weights;
    sdd::save_qnetwork(net, weights);
    std::cout << "trained policy " << cfg.policy << " for " << cfg.episodes
              << " episodes\nweights: " << weights << '\n';
    if (!trace.episode_services.empty()) {
        double head = 0.0, tail = 0.0;
        const std::size_t n = trace.episode_services.size();
        const std::size_t w = std::max<std::size_t>(1, n / 10);
        for (std::size_t i = 0; i < w; ++i) head += trace.episode_services[i];
        for (std::size_t i = n - w; i < n; ++i) tail += trace.episode_services[i];
        std::cout << "mean episode services: first decile " << head / static_cast<double>(w)
                  << ", last decile " << tail / static_cast<double>(w) << '\n';
    }
    return 0;
}

int cmd_evaluate(const std::string& config_path, const std::vector<std::string>& overrides) {
    const sdd::ExperimentConfig cfg = load_config(config_path, overrides);
    const sdd::RunArtifacts artifacts = sdd::run_experiment(cfg);
    std::cout << "policy " << cfg.policy << " on geography " << cfg.geography << " ("
              << cfg.demand_model << ")\n"
              << "replications: " << cfg.replications << '\n'
              << "avg daily services: " << artifacts.metrics.mean_daily_services << " (se "
              << artifacts.metrics.se_daily_services << ")\n"
              << "end demand (sum over regions): " << total_end_demand(artifacts.metrics) << '\n' 
              << "artifacts: " << artifacts.out_dir.string() << '\n';
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& overrides) {
    const sdd::ExperimentConfig base = load_config(config_path, overrides);
    std::vector<sdd::ExperimentConfig> grid = sdd::sweep_grid(base.scale);
    for (sdd::ExperimentConfig& cfg : grid) {
        cfg.policy = base.policy;
        cfg.replications = base.replications;
        cfg.base_seed = base.base_seed;
        cfg.episodes = base.episodes;
        cfg.train = base.train;
        cfg.threads = base.threads;
        cfg.horizon_days = base.horizon_days;
        cfg.tau_upd = base.tau_upd;
        cfg.out_dir = (std::filesystem::path(base.out_dir) / cfg.label).string();
        if (!base.weights.empty()) cfg.weights = base.weights;
        const sdd::RunArtifacts artifacts = sdd::run_experiment(cfg);
        std::cout << cfg.label << ": avg daily services "
                  << artifacts.metrics.mean_daily_services << ", end demand "
                  << total_end_demand(artifacts.metrics) << '\n';
    }
    std::cout << "swept " << grid.size() << " settings into " << base.out_dir << '\n';
    return 0;
}

int cmd_steady_state(double T, double A, double beta, double M1, double M2, bool as_json) {
    sdd::StylizedInstance inst;
    inst.T = T;
    inst.A = A;
    inst.beta = beta;
    inst.M1 = M1;
    inst.M2 = M2;
    const sdd::RegimeReport report = sdd::analyze(inst);
    if (as_json) {
        std::ostream& out = std::cout;
        out << std::setprecision(12) << "{\n"
            << "  \"trivial\": " << (report.trivial ? "true" : "false") << ",\n"
            << "  \"winner\": {\"label\": \"" << report.best().label << "\", \"r1\": "
            << report.best().allocation.r1 << ", \"r2\": " << report.best().allocation.r2
            << ", \"objective\": " << report.best().allocation.objective << "},\n"
            << "  \"candidates\": [\n";
        for (std::size_t i = 0; i < report.candidates.size(); ++i) {
            const sdd::Candidate& c = report.candidates[i];
            out << "    {\"label\": \"" << c.label << "\", \"r1\": " << c.allocation.r1
                << ", \"r2\": " << c.allocation.r2
                << ", \"objective\": " << c.allocation.objective << ", \"slack\": " << c.slack
                << '}' << (i + 1 < report.candidates.size() ? "," : "") << '\n';
        }
        out << "  ],\n  \"r_critical_region1\": ";
        if (report.r_critical_region1) out << *report.r_critical_region1; else out << "null";
        out << ",\n  \"r_critical_region2\": ";
        if (report.r_critical_region2) out << *report.r_critical_region2; else out << "null";
        out << "\n}\n";
        return 0;
    }
    std::cout << std::setprecision(10)
              << "instance: T=" << T << " A=" << A << " beta=" << beta << " M1=" << M1
              << " M2=" << M2 << '\n';
    if (report.trivial) {
        std::cout << "regime: trivial (full service everywhere fits in the budget)\n";
    } else {
        std::cout << "regime: binding budget\n";
    }
    std::cout << "candidates:\n";
    for (const sdd::Candidate& c : report.candidates) {
        std::cout << "  " << c.label << ": r1=" << c.allocation.r1 << " r2=" << c.allocation.r2
                  << " objective=" << c.allocation.objective << " slack=" << c.slack << '\n';
    }
    std::cout << "winner: " << report.best().label << " (objective "
              << report.best().allocation.objective << ")\n";
    if (report.r_critical_region1)
        std::cout << "critical r1 (region-1 use = T/2): " << *report.r_critical_region1 << '\n';
    if (report.r_critical_region2)
        std::cout << "critical r2 (region-2 use = T/2): " << *report.r_critical_region2 << '\n';
    return 0;
}

int cmd_compare(const std::string& policy_dir, const std::string& baseline_dir) {
    const std::vector<sdd::ComparisonRow> rows =
        sdd::compare_artifact_dirs(policy_dir, baseline_dir);
    double svc = 0.0, dem = 0.0;
    std::cout << std::setprecision(6);
    for (const sdd::ComparisonRow& row : rows) {
        std::cout << row.label << ": services " << row.baseline_services << " -> "
                  << row.policy_services << " (" << row.services_improvement_pct
                  << "%), end demand " << row.baseline_end_demand << " -> "
                  << row.policy_end_demand << " (" << row.demand_improvement_pct << "%)\n";
        svc += row.services_improvement_pct;
        dem += row.demand_improvement_pct;
    }
    const double n = static_cast<double>(rows.size());
    std::cout << "grid average: services " << svc / n << "%, end demand " << dem / n << "%\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"same-day delivery simulation and policy engine"};
    app.require_subcommand(1);

    std::string cfg_train, cfg_eval, cfg_sweep;
    std::vector<std::string> set_train, set_eval, set_sweep;
    CLI::App* train = app.add_subcommand("train", "train a learning policy and save weights");
    add_config_options(train, cfg_train, set_train);
    CLI::App* evaluate = app.add_subcommand("evaluate", "run replications and write artifacts");
    add_config_options(evaluate, cfg_eval, set_eval);
    CLI::App* sweep = app.add_subcommand("sweep", "run the 33-setting demand grid");
    add_config_options(sweep, cfg_sweep, set_sweep);

    double T = 10.0, A = 4.0, beta = 1.0, M1 = 100.0, M2 = 100.0;
    bool as_json = false;
    CLI::App* steady = app.add_subcommand("steady-state", "closed-form allocation analysis");
    steady->add_option("--T", T, "daily time budget")->required();
    steady->add_option("--A", A, "region area")->required();
    steady->add_option("--beta", beta, "tour-length constant")->required();
    steady->add_option("--M1", M1, "region-1 market size")->required();
    steady->add_option("--M2", M2, "region-2 market size")->required();
    steady->add_flag("--json", as_json, "emit JSON instead of the table");

    std::string policy_dir, baseline_dir;
    CLI::App* compare = app.add_subcommand("compare", "compare artifact trees against a baseline");
    compare->add_option("--policy-dir", policy_dir, "artifacts of the policy under test")->required();
    compare->add_option("--baseline-dir", baseline_dir, "artifacts of the baseline")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (train->parsed()) return cmd_train(cfg_train, set_train);
        if (evaluate->parsed()) return cmd_evaluate(cfg_eval, set_eval);
        if (sweep->parsed()) return cmd_sweep(cfg_sweep, set_sweep);
        if (steady->parsed()) return cmd_steady_state(T, A, beta, M1, M2, as_json);
        if (compare->parsed()) return cmd_compare(policy_dir, baseline_dir);
    } catch (const sdd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
