// End-to-end acceptance checks for the scheduling library. Each check
// prints one PASS/FAIL line; the exit code is the number of failures.
#include <fdsched.hpp>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "test_support.hpp"

using namespace fdsched;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string strf(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

struct Criterion {
    const char* name;
    bool pass = false;
    std::string detail = "not evaluated";
};

// Best value of the one-subsystem rule "serve with probability theta while
// a file is present", found by scanning theta directly over the stationary
// closed forms. Kept free of the kernel/LP code on purpose: it is the
// independent reference the LP answer is held against.
double grid_oracle_value(const SubsystemSpec& s, double budget, double step) {
    double best = 0.0;
    long long points = static_cast<long long>(1.0 / step);
    for (long long i = 0; i <= points; ++i) {
        double theta = static_cast<double>(i) * step;
        double frac = theta / (1.0 + theta * s.completion_prob[1] / s.idle_rate);
        if (s.power[1] * frac > budget + 1e-12) break;  // power grows with theta
        double value = s.weight * s.mean_file_size * s.completion_prob[1] * frac;
        if (value > best) best = value;
    }
    return best;
}

}  // namespace

int main() {
    std::vector<Criterion> crit(10);
    crit[0].name = "lp-structure";
    crit[1].name = "near-optimality";
    crit[2].name = "power-feasibility";
    crit[3].name = "queue-ceilings";
    crit[4].name = "tradeoff-monotonicity";
    crit[5].name = "length-robustness";
    crit[6].name = "randomized-suboptimality";
    crit[7].name = "oracle-consistency";
    crit[8].name = "solo-grid-equivalence";
    crit[9].name = "reproducibility";

    auto guard = [&](int idx, const std::function<std::pair<bool, std::string>()>& fn) {
        try {
            auto [ok, detail] = fn();
            crit[idx].pass = ok;
            crit[idx].detail = std::move(detail);
        } catch (const std::exception& e) {
            crit[idx].pass = false;
            crit[idx].detail = std::string("exception: ") + e.what();
        }
    };

    LoadedConfig baseline = load_config_file(std::string(FDSCHED_CONFIG_DIR) + "/baseline.cfg");
    LoadedConfig robust = load_config_file(std::string(FDSCHED_CONFIG_DIR) + "/robustness.cfg");

    // 1: occupancy program shape and solve time on the reference system
    OccupancyLp olp;
    OracleSolution oracle;
    guard(0, [&]() -> std::pair<bool, std::string> {
        auto t0 = std::chrono::steady_clock::now();
        olp = build_occupancy_lp(baseline.system);
        oracle = solve_lp(olp);
        double dt = seconds_since(t0);
        bool ok = olp.variable_count() == 20 && dt < 1.0;
        return {ok, strf("%lld variables, opt %.6f, %.3f s (need 20 vars, < 1 s)",
                         olp.variable_count(), oracle.opt_value, dt)};
    });

    // 5 (computed first so later checks can reuse the traces): sweep the
    // tradeoff weight and demand the three monotone trends
    std::vector<SimTrace> sweep_traces;
    const std::vector<double> v_grid = {5.0, 10.0, 20.0, 40.0, 70.0};
    double v70_seconds = 0.0;
    guard(4, [&]() -> std::pair<bool, std::string> {
        SimOptions opt;
        opt.batch_count = 20;
        for (size_t vi = 0; vi < v_grid.size(); ++vi) {
            SystemSpec sys = baseline.system;
            sys.tradeoff = v_grid[vi];
            auto t0 = std::chrono::steady_clock::now();
            sweep_traces.push_back(run_multi_user(sys, 1000000, 1000 + vi, {}, opt));
            if (v_grid[vi] == 70.0) v70_seconds = seconds_since(t0);
        }
        bool ok = true;
        std::string bad;
        for (size_t i = 0; i + 1 < sweep_traces.size(); ++i) {
            const SimTrace& a = sweep_traces[i];
            const SimTrace& b = sweep_traces[i + 1];
            double tput_tol = 2.0 * std::hypot(throughput_standard_error(a),
                                               throughput_standard_error(b));
            double power_tol = 2.0 * std::hypot(power_standard_error(a),
                                                power_standard_error(b));
            if (b.expected_throughput() < a.expected_throughput() - tput_tol) {
                ok = false;
                bad += strf(" throughput drops at V=%g;", v_grid[i + 1]);
            }
            if (b.max_queue < a.max_queue) {
                ok = false;
                bad += strf(" max queue drops at V=%g;", v_grid[i + 1]);
            }
            double gap_a = baseline.system.power_budget - a.avg_power();
            double gap_b = baseline.system.power_budget - b.avg_power();
            if (gap_b > gap_a + power_tol) {
                ok = false;
                bad += strf(" power gap grows at V=%g;", v_grid[i + 1]);
            }
        }
        std::string detail = strf("throughput %.4f..%.4f, max queue %.1f..%.1f, gap %.4f..%.4f",
                                  sweep_traces.front().expected_throughput(),
                                  sweep_traces.back().expected_throughput(),
                                  sweep_traces.front().max_queue, sweep_traces.back().max_queue,
                                  baseline.system.power_budget - sweep_traces.front().avg_power(),
                                  baseline.system.power_budget - sweep_traces.back().avg_power());
        return {ok, ok ? detail : detail + ";" + bad};
    });

    // 2: the V=70 run lands within 1% of the program optimum
    guard(1, [&]() -> std::pair<bool, std::string> {
        if (sweep_traces.size() < 5 || oracle.opt_value <= 0.0)
            return {false, "missing V=70 trace or optimum"};
        const SimTrace& t = sweep_traces.back();
        double err = relative_error(t.expected_throughput(), oracle.opt_value);
        bool ok = err <= 0.01 && v70_seconds < 30.0;
        return {ok, strf("relative error %.4f%% after %lld slots, %.2f s (need <= 1%%, < 30 s)",
                         100.0 * err, t.slots, v70_seconds)};
    });

    // 6: swapping the file-length distribution barely moves realized
    // throughput at matched means
    std::vector<SimTrace> robust_traces;
    guard(5, [&]() -> std::pair<bool, std::string> {
        const std::vector<double> v_points = {10.0, 40.0, 70.0};
        SimOptions opt;
        opt.batch_count = 20;
        auto models_for = [&](int d) {
            std::vector<FileLengthModel> models;
            for (size_t n = 0; n < robust.system.subsystems.size(); ++n) {
                const SubsystemSpec& s = robust.system.subsystems[n];
                if (d == 0) models.push_back(FileLengthModel::geometric(1.0 / s.mean_file_size));
                else if (d == 1)
                    models.push_back(FileLengthModel::uniform_int(robust.uniform_ranges[n].lo,
                                                                  robust.uniform_ranges[n].hi));
                else models.push_back(FileLengthModel::poisson_with_mean(s.mean_file_size));
            }
            return models;
        };
        double realized[3][3];
        for (int d = 0; d < 3; ++d) {
            for (size_t vi = 0; vi < v_points.size(); ++vi) {
                SystemSpec sys = robust.system;
                sys.tradeoff = v_points[vi];
                robust_traces.push_back(
                    run_multi_user(sys, 1000000, 2000 + vi, models_for(d), opt));
                realized[d][vi] = robust_traces.back().realized_throughput();
            }
        }
        bool ok = true;
        double worst = 0.0;
        std::string bad;
        const char* names[3] = {"geometric", "uniform", "poisson"};
        for (int d = 1; d < 3; ++d) {
            for (int vi = 0; vi < 3; ++vi) {
                double dev = std::abs(realized[d][vi] - realized[0][vi]) / realized[0][vi];
                worst = std::max(worst, dev);
                if (dev > 0.03) {
                    ok = false;
                    bad += strf(" %s at V=%g off by %.2f%%;", names[d], v_points[vi], 100.0 * dev);
                }
            }
        }
        return {ok, strf("worst deviation from geometric %.3f%% (need <= 3%%)%s", 100.0 * worst,
                         bad.c_str())};
    });

    // 3: every long run respects the power budget up to the queue-ceiling
    // correction, and short runs pass the every-slot prefix audit
    guard(2, [&]() -> std::pair<bool, std::string> {
        if (sweep_traces.empty() || robust_traces.empty())
            return {false, "no traces to audit"};
        double worst_margin = -1e300;
        int checked = 0;
        for (const std::vector<SimTrace>* group : {&sweep_traces, &robust_traces}) {
            for (const SimTrace& t : *group) {
                double bound = t.budget + t.ceiling / static_cast<double>(t.slots);
                double slack = 10.0 * std::numeric_limits<double>::epsilon() *
                               std::max(1.0, t.budget) * 128.0;
                worst_margin = std::max(worst_margin, t.avg_power() - bound);
                if (t.avg_power() > bound + slack)
                    return {false, strf("average power %.9f above bound %.9f", t.avg_power(),
                                        bound)};
                ++checked;
            }
        }
        SimOptions debug;
        debug.check_prefix_power = true;
        run_multi_user(baseline.system, 100000, 42, {}, debug);
        std::vector<FileLengthModel> uniform_models, poisson_models;
        for (size_t n = 0; n < robust.system.subsystems.size(); ++n) {
            uniform_models.push_back(FileLengthModel::uniform_int(
                robust.uniform_ranges[n].lo, robust.uniform_ranges[n].hi));
            poisson_models.push_back(
                FileLengthModel::poisson_with_mean(robust.system.subsystems[n].mean_file_size));
        }
        run_multi_user(robust.system, 100000, 43, {}, debug);
        run_multi_user(robust.system, 100000, 44, uniform_models, debug);
        run_multi_user(robust.system, 100000, 45, poisson_models, debug);
        return {true, strf("%d long runs within budget (worst margin %.2e), 4 prefix audits clean",
                           checked, worst_margin)};
    });

    // 4: deterministic queue bounds hold across random systems
    guard(3, [&]() -> std::pair<bool, std::string> {
        RngStream gen(2024, 0);
        int violations = 0;
        int systems = 200;
        for (int i = 0; i < systems; ++i) {
            SystemSpec sys = testsup::random_system(gen);
            try {
                SimTrace t = run_multi_user(sys, 10000, 7000 + i);
                if (t.max_queue > t.ceiling + 1e-9) ++violations;
            } catch (const std::logic_error&) {
                ++violations;
            }
            try {
                SimTrace t = run_single_user(sys.subsystems[0], sys.tradeoff, sys.power_budget,
                                             10000, 7500 + i);
                if (t.max_queue > t.ceiling + 1e-9) ++violations;
            } catch (const std::logic_error&) {
                ++violations;
            }
        }
        return {violations == 0,
                strf("%d random systems, %d ceiling violations (need 0)", systems, violations)};
    });

    // 7: randomized families stay near their own optima on desk-scale runs
    guard(6, [&]() -> std::pair<bool, std::string> {
        auto t0 = std::chrono::steady_clock::now();
        ExperimentPlan plan;
        plan.mode = ExperimentMode::monte_carlo;
        plan.replicates = 100;
        plan.horizon = 100000;
        plan.seed = 1;
        MonteCarloSummary mc = run_monte_carlo(plan, baseline);
        double dt = seconds_since(t0);
        bool ok = mc.mean_relative_error_system <= 0.01 &&
                  mc.mean_relative_error_control <= 0.01 && dt < 600.0;
        std::string detail = strf("mean error %.4f%% / %.4f%%, excluded %d / %d, %.1f s "
                                  "(need <= 1%%, < 600 s)",
                                  100.0 * mc.mean_relative_error_system,
                                  100.0 * mc.mean_relative_error_control, mc.excluded_system,
                                  mc.excluded_control, dt);
        if (mc.mean_relative_error_control > 0.01)
            detail += "; control draws keep every service power below the budget, so the"
                      " power queue never leaves zero and the index ranking turns static:"
                      " the shortfall against the exact optimum is the heuristic's own,"
                      " not simulation error";
        return {ok, detail};
    });

    // 8: the oracle agrees with itself: tight certificates, and replaying
    // its randomized policy reproduces the optimum
    guard(7, [&]() -> std::pair<bool, std::string> {
        if (oracle.occupation.empty()) return {false, "baseline LP unsolved"};
        StationaryRandomizedPolicy policy = extract_policy(olp, oracle.occupation);
        SimTrace t = run_randomized_policy(baseline.system, olp, policy, 1000000, 301);
        double err = relative_error(t.expected_throughput(), oracle.opt_value);
        bool ok = oracle.duality_gap < 1e-8 && oracle.flow_residual < 1e-9 && err <= 0.005;
        return {ok, strf("gap %.2e, residual %.2e, replay error %.4f%% "
                         "(need < 1e-8, < 1e-9, <= 0.5%%)",
                         oracle.duality_gap, oracle.flow_residual, 100.0 * err)};
    });

    // 9: the occupancy program collapses to the scanned one-subsystem rule
    guard(8, [&]() -> std::pair<bool, std::string> {
        double worst = 0.0;
        for (const SubsystemSpec& s : baseline.system.subsystems) {
            SystemSpec solo;
            solo.subsystems = {s};
            solo.power_budget = 1.0;
            solo.max_concurrent = 1;
            solo.tradeoff = baseline.system.tradeoff;
            OracleSolution sol = solve_lp(build_occupancy_lp(solo));
            double reference = grid_oracle_value(s, 1.0, 1e-5);
            worst = std::max(worst, std::abs(sol.opt_value - reference));
        }
        return {worst <= 1e-4, strf("worst |lp - grid| %.2e (need <= 1e-4)", worst)};
    });

    // 10: identical seeds give byte-identical tables
    guard(9, [&]() -> std::pair<bool, std::string> {
        ExperimentPlan sweep;
        sweep.mode = ExperimentMode::v_sweep;
        sweep.v_grid = {5.0, 40.0};
        sweep.horizon = 20000;
        sweep.seed = 7;
        bool sweep_ok = run_v_sweep(sweep, baseline).to_text() ==
                        run_v_sweep(sweep, baseline).to_text();

        ExperimentPlan rob;
        rob.mode = ExperimentMode::robustness;
        rob.v_grid = {10.0};
        rob.horizon = 20000;
        rob.seed = 7;
        bool rob_ok = run_robustness(rob, robust).to_text() ==
                      run_robustness(rob, robust).to_text();

        ExperimentPlan mc;
        mc.mode = ExperimentMode::monte_carlo;
        mc.replicates = 5;
        mc.horizon = 20000;
        mc.seed = 7;
        bool mc_ok = run_monte_carlo(mc, baseline).table.to_text() ==
                     run_monte_carlo(mc, baseline).table.to_text();
        bool ok = sweep_ok && rob_ok && mc_ok;
        return {ok, strf("sweep %s, robustness %s, randomized %s",
                         sweep_ok ? "identical" : "DIFFERS", rob_ok ? "identical" : "DIFFERS",
                         mc_ok ? "identical" : "DIFFERS")};
    });

    int failures = 0;
    for (size_t i = 0; i < crit.size(); ++i) {
        if (!crit[i].pass) ++failures;
        std::printf("[%2zu] %s %-24s %s\n", i + 1, crit[i].pass ? "PASS" : "FAIL", crit[i].name,
                    crit[i].detail.c_str());
    }
    std::printf("acceptance: %zu of %zu criteria passed\n", crit.size() - failures, crit.size());
    std::fflush(stdout);
    return failures;
}
