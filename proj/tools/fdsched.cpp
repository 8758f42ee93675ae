#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <fdsched.hpp>

namespace {

int write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot open output file: " << path << "\n";
        return 1;
    }
    out << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Power-constrained download scheduling: simulation and exact oracle"};

    std::string config_path;
    std::string mode_name = "single-run";
    std::vector<double> v_grid;
    int replicates = 1;
    long long horizon = 1000000;
    std::uint64_t seed = 1;
    bool fast = false;
    std::string out_path;
    std::string dump_lp_path;

    app.add_option("--config", config_path, "system config file")->required();
    app.add_option("--mode", mode_name,
                   "one of single-run, v-sweep, monte-carlo, oracle-only, robustness")
        ->check(CLI::IsMember({"single-run", "v-sweep", "monte-carlo", "oracle-only",
                               "robustness"}));
    app.add_option("--v-grid", v_grid, "tradeoff values for sweep modes")->delimiter(',');
    app.add_option("--replicates", replicates, "independent runs per grid point");
    auto* horizon_opt = app.add_option("--horizon", horizon, "slots per run");
    app.add_option("--seed", seed, "master seed");
    app.add_flag("--fast", fast, "shrink horizon to 1e5 slots unless --horizon is given");
    app.add_option("--out", out_path, "write the result table here instead of stdout");
    app.add_option("--dump-lp", dump_lp_path, "write the occupation LP in text form");

    CLI11_PARSE(app, argc, argv);

    if (fast && horizon_opt->count() == 0) horizon = 100000;

    try {
        fdsched::LoadedConfig cfg = fdsched::load_config_file(config_path);

        fdsched::ExperimentPlan plan;
        plan.replicates = replicates;
        plan.horizon = horizon;
        plan.seed = seed;
        plan.output = out_path;

        std::map<std::string, fdsched::ExperimentMode> modes = {
            {"single-run", fdsched::ExperimentMode::single_run},
            {"v-sweep", fdsched::ExperimentMode::v_sweep},
            {"monte-carlo", fdsched::ExperimentMode::monte_carlo},
            {"oracle-only", fdsched::ExperimentMode::oracle_only},
            {"robustness", fdsched::ExperimentMode::robustness},
        };
        plan.mode = modes.at(mode_name);
        plan.v_grid = v_grid;
        if (plan.v_grid.empty()) {
            if (plan.mode == fdsched::ExperimentMode::v_sweep)
                plan.v_grid = {5, 10, 20, 40, 70};
            else if (plan.mode == fdsched::ExperimentMode::robustness)
                plan.v_grid = {10, 40, 70};
        }

        if (!dump_lp_path.empty()) {
            fdsched::OccupancyLp olp = fdsched::build_occupancy_lp(cfg.system);
            std::ofstream lp_out(dump_lp_path, std::ios::binary);
            if (!lp_out) {
                std::cerr << "cannot open LP dump file: " << dump_lp_path << "\n";
                return 1;
            }
            lp_out << fdsched::lp_to_text(olp);
        }

        fdsched::ResultTable table;
        switch (plan.mode) {
            case fdsched::ExperimentMode::single_run:
                table = fdsched::run_single_run(plan, cfg);
                break;
            case fdsched::ExperimentMode::v_sweep:
                table = fdsched::run_v_sweep(plan, cfg);
                break;
            case fdsched::ExperimentMode::robustness:
                table = fdsched::run_robustness(plan, cfg);
                break;
            case fdsched::ExperimentMode::monte_carlo:
                table = fdsched::run_monte_carlo(plan, cfg).table;
                break;
            case fdsched::ExperimentMode::oracle_only: {
                fdsched::OccupancyLp olp = fdsched::build_occupancy_lp(cfg.system);
                fdsched::OracleSolution sol = fdsched::solve_lp(olp);
                table = fdsched::oracle_summary(olp, sol);
                break;
            }
        }
        return write_output(table.to_text(), out_path);
    } catch (const fdsched::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
