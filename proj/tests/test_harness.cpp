#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sdd/harness.hpp"

using namespace sdd;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config text round-trips through parse and serialize") {
    ExperimentConfig cfg;
    cfg.geography = "c";
    cfg.demand_model = "uncapacitated";
    cfg.r_bar = 0.65;
    cfg.policy = "irl-p";
    cfg.replications = 7;
    cfg.base_seed = 991;
    cfg.scale = 5.0;
    cfg.train = true;
    cfg.label = "roundtrip";
    const std::string text = serialize_config(cfg);
    std::istringstream in(text);
    const ExperimentConfig back = parse_config_text(in);
    REQUIRE(serialize_config(back) == text);
    REQUIRE(back.r_bar == cfg.r_bar);
    REQUIRE(back.policy == cfg.policy);
    REQUIRE(back.train == cfg.train);
}

TEST_CASE("config parser accepts comments and rejects junk") {
    std::istringstream good("# header\n geography = b \n\nalpha = 0.25 # inline\n");
    const ExperimentConfig cfg = parse_config_text(good);
    REQUIRE(cfg.geography == "b");
    REQUIRE(cfg.alpha == 0.25);

    std::istringstream bad_key("frobnicate = 1\n");
    REQUIRE_THROWS_AS(parse_config_text(bad_key), ConfigError);
    std::istringstream bad_line("no equals sign here\n");
    REQUIRE_THROWS_AS(parse_config_text(bad_line), ConfigError);
}

TEST_CASE("validation catches out-of-range settings") {
    ExperimentConfig cfg;
    REQUIRE_NOTHROW(validate(cfg));
    cfg.policy = "psychic";
    REQUIRE_THROWS_AS(validate(cfg), ConfigError);
    cfg.policy = "myopic";
    cfg.tau_upd = 7; // does not divide 720
    REQUIRE_THROWS_AS(validate(cfg), ConfigError);
    cfg.tau_upd = 30;
    cfg.alpha = 1.5;
    REQUIRE_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("desk scale divides demands and shrinks the fleet to one") {
    ExperimentConfig cfg;
    cfg.scale = 10.0;
    REQUIRE(cfg.scaled_fleet() == 1);
    const Geography geo = cfg.make_geography();
    REQUIRE(geo.initial_demands() == std::vector<double>{20.0, 5.0});
    REQUIRE(geo.demand_caps() == std::vector<double>{25.0, 25.0});
    cfg.scale = 1.0;
    REQUIRE(cfg.scaled_fleet() == 5);
}

TEST_CASE("the sweep grid enumerates exactly 33 distinct settings") {
    const std::vector<ExperimentConfig> grid = sweep_grid(10.0);
    REQUIRE(grid.size() == 33);
    std::set<std::string> labels;
    int capacitated = 0;
    for (const ExperimentConfig& cfg : grid) {
        REQUIRE_NOTHROW(validate(cfg));
        labels.insert(cfg.label);
        if (cfg.demand_model == "capacitated") ++capacitated;
        REQUIRE(cfg.scale == 10.0);
    }
    REQUIRE(labels.size() == 33);
    REQUIRE(capacitated == 9); // 3 geographies x 3 alphas
    // 8 reference service levels from 0.5 to 0.85 per geography.
    int rbar_85 = 0;
    for (const ExperimentConfig& cfg : grid)
        if (cfg.demand_model == "uncapacitated" && std::abs(cfg.r_bar - 0.85) < 1e-12) ++rbar_85;
    REQUIRE(rbar_85 == 3);
}

TEST_CASE("run_experiment writes byte-identical artifacts across repeats") {
    ExperimentConfig cfg;
    cfg.policy = "myopic";
    cfg.replications = 3;
    cfg.horizon_days = 60;
    cfg.base_seed = 7;
    cfg.threads = 2;

    const fs::path dir1 = temp_dir("sdd_harness_run1");
    const fs::path dir2 = temp_dir("sdd_harness_run2");
    cfg.out_dir = dir1.string();
    const RunArtifacts a = run_experiment(cfg);
    cfg.out_dir = dir2.string();
    cfg.threads = 1; // determinism must not depend on the thread count
    const RunArtifacts b = run_experiment(cfg);

    REQUIRE(slurp(a.summary_csv) == slurp(b.summary_csv));
    REQUIRE(slurp(a.trajectory_csv) == slurp(b.trajectory_csv));
    REQUIRE(fs::exists(a.config_echo));
    REQUIRE(fs::exists(a.seed_ledger));

    const std::vector<SummaryRow> rows = read_summary_csv(a.summary_csv);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].replication == static_cast<int>(i));
        REQUIRE(rows[i].total_services == a.results[i].total_services);
        REQUIRE(rows[i].end_demand.size() == 2);
    }
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("learned policies demand weights or explicit training") {
    ExperimentConfig cfg;
    cfg.policy = "intraday";
    cfg.replications = 1;
    cfg.horizon_days = 30;
    cfg.out_dir = temp_dir("sdd_harness_noweights").string();
    REQUIRE_THROWS_AS(run_experiment(cfg), ConfigError);
    fs::remove_all(cfg.out_dir);
}

TEST_CASE("comparison arithmetic works on artifact trees") {
    ExperimentConfig cfg;
    cfg.policy = "myopic";
    cfg.replications = 2;
    cfg.horizon_days = 30;
    const fs::path base = temp_dir("sdd_harness_cmp_base");
    const fs::path pol = temp_dir("sdd_harness_cmp_pol");
    cfg.out_dir = base.string();
    run_experiment(cfg);
    cfg.policy = "bucket";
    cfg.out_dir = pol.string();
    run_experiment(cfg);
    const std::vector<ComparisonRow> rows = compare_artifact_dirs(pol, base);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].services_improvement_pct ==
            Catch::Approx(relative_improvement_pct(rows[0].baseline_services,
                                                   rows[0].policy_services)));
    fs::remove_all(base);
    fs::remove_all(pol);
}

TEST_CASE("published improvement numbers fall out of the comparison formula") {
    REQUIRE(relative_improvement_pct(262.3, 288.9) == Catch::Approx(10.14).margin(0.005));
    REQUIRE(relative_improvement_pct(285.3, 368.2) == Catch::Approx(29.06).margin(0.005));
}
