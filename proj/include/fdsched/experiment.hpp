#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "mdp.hpp"
#include "model.hpp"
#include "multi_user.hpp"
#include "rng.hpp"
#include "trace.hpp"

namespace fdsched {

enum class ExperimentMode { single_run, v_sweep, monte_carlo, oracle_only, robustness };

struct ExperimentPlan {
    ExperimentMode mode = ExperimentMode::single_run;
    std::vector<double> v_grid;
    int replicates = 1;
    long long horizon = 1000000;
    std::uint64_t seed = 1;
    std::string output;  // empty means stdout
};

inline void validate(const ExperimentPlan& plan) {
    if (plan.horizon < 1) throw std::invalid_argument("plan: horizon must be >= 1");
    if (plan.replicates < 1) throw std::invalid_argument("plan: replicates must be >= 1");
    bool needs_grid = plan.mode == ExperimentMode::v_sweep || plan.mode == ExperimentMode::robustness;
    if (needs_grid && plan.v_grid.empty())
        throw std::invalid_argument("plan: v_grid must be non-empty for sweep modes");
}

struct ResultTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> notes;  // emitted as trailing comment lines

    std::string to_text() const {
        std::string out;
        for (size_t i = 0; i < header.size(); ++i) {
            if (i) out += '\t';
            out += header[i];
        }
        out += '\n';
        for (const auto& row : rows) {
            for (size_t i = 0; i < row.size(); ++i) {
                if (i) out += '\t';
                out += row[i];
            }
            out += '\n';
        }
        for (const auto& note : notes) {
            out += "# ";
            out += note;
            out += '\n';
        }
        return out;
    }
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    RngStream s(base, salt ^ 0xA5A5A5A5A5A5A5A5ull);
    return s.next_u64();
}

// Runs fn(0..count-1), spreading across hardware threads when there are
// any to spare. fn must only touch its own index's output slot.
template <typename Fn>
void parallel_for(int count, Fn fn) {
    unsigned workers = std::thread::hardware_concurrency();
    if (workers > static_cast<unsigned>(count)) workers = static_cast<unsigned>(count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

namespace detail {

inline std::vector<std::string> run_columns() {
    return {"mode", "distribution", "v", "replicate", "seed", "slots",
            "throughput_expected", "throughput_realized", "throughput_se",
            "avg_power", "power_se", "avg_queue", "max_queue", "ceiling",
            "opt", "rel_error"};
}

inline std::vector<std::string> run_row(const std::string& mode, const std::string& dist,
                                        double v, int replicate, const SimTrace& t, double opt) {
    return {mode,
            dist,
            format_double(v),
            std::to_string(replicate),
            std::to_string(t.seed),
            std::to_string(t.slots),
            format_double(t.expected_throughput()),
            format_double(t.realized_throughput()),
            format_double(throughput_standard_error(t)),
            format_double(t.avg_power()),
            format_double(power_standard_error(t)),
            format_double(t.avg_queue()),
            format_double(t.max_queue),
            format_double(t.ceiling),
            format_double(opt),
            format_double(relative_error(t.expected_throughput(), opt))};
}

inline std::vector<std::string> oracle_row(const OracleSolution& sol) {
    std::vector<std::string> row(16, "-");
    row[0] = "oracle";
    row[6] = format_double(sol.opt_value);
    row[9] = format_double(sol.power_used);
    row[14] = format_double(sol.opt_value);
    row[15] = "0";
    return row;
}

inline SimOptions run_options() {
    SimOptions opt;
    opt.batch_count = 20;
    opt.check_prefix_power = true;
    return opt;
}

}  // namespace detail

inline ResultTable run_v_sweep(const ExperimentPlan& plan, const LoadedConfig& cfg) {
    validate(plan);
    OccupancyLp olp = build_occupancy_lp(cfg.system);
    OracleSolution oracle = solve_lp(olp);

    int v_count = static_cast<int>(plan.v_grid.size());
    int total = v_count * plan.replicates;
    std::vector<std::vector<std::string>> rows(total);
    parallel_for(total, [&](int i) {
        int vi = i / plan.replicates;
        int rep = i % plan.replicates;
        SystemSpec sys = cfg.system;
        sys.tradeoff = plan.v_grid[vi];
        std::uint64_t seed = derive_seed(plan.seed, (static_cast<std::uint64_t>(vi) << 20) | rep);
        SimTrace t = run_multi_user(sys, plan.horizon, seed, {}, detail::run_options());
        rows[i] = detail::run_row("v-sweep", "geometric", sys.tradeoff, rep, t, oracle.opt_value);
    });

    ResultTable table;
    table.header = detail::run_columns();
    table.rows = std::move(rows);
    table.rows.push_back(detail::oracle_row(oracle));
    return table;
}

inline ResultTable run_single_run(const ExperimentPlan& plan, const LoadedConfig& cfg) {
    validate(plan);
    OccupancyLp olp = build_occupancy_lp(cfg.system);
    OracleSolution oracle = solve_lp(olp);
    std::uint64_t seed = derive_seed(plan.seed, 0);
    SimTrace t = run_multi_user(cfg.system, plan.horizon, seed, {}, detail::run_options());

    ResultTable table;
    table.header = detail::run_columns();
    table.rows.push_back(detail::run_row("single-run", "geometric", cfg.system.tradeoff, 0, t,
                                         oracle.opt_value));
    table.rows.push_back(detail::oracle_row(oracle));
    return table;
}

// Same sweep under three file-length distributions with matched means:
// the geometric baseline the policy is tuned for, the configured uniform
// ranges, and Poisson calibrated so the clamped mean hits mean_file_size.
inline ResultTable run_robustness(const ExperimentPlan& plan, const LoadedConfig& cfg) {
    validate(plan);
    for (size_t n = 0; n < cfg.uniform_ranges.size(); ++n)
        if (!cfg.uniform_ranges[n].set)
            throw std::invalid_argument("robustness mode needs uniform_range for every subsystem");

    OccupancyLp olp = build_occupancy_lp(cfg.system);
    OracleSolution oracle = solve_lp(olp);

    std::vector<std::string> dist_names = {"geometric", "uniform", "poisson"};
    auto models_for = [&](int d) {
        std::vector<FileLengthModel> models;
        for (size_t n = 0; n < cfg.system.subsystems.size(); ++n) {
            const SubsystemSpec& s = cfg.system.subsystems[n];
            if (d == 0) models.push_back(FileLengthModel::geometric(1.0 / s.mean_file_size));
            else if (d == 1)
                models.push_back(FileLengthModel::uniform_int(cfg.uniform_ranges[n].lo,
                                                              cfg.uniform_ranges[n].hi));
            else models.push_back(FileLengthModel::poisson_with_mean(s.mean_file_size));
        }
        return models;
    };

    int v_count = static_cast<int>(plan.v_grid.size());
    int total = 3 * v_count;
    std::vector<std::vector<std::string>> rows(total);
    parallel_for(total, [&](int i) {
        int d = i / v_count;
        int vi = i % v_count;
        SystemSpec sys = cfg.system;
        sys.tradeoff = plan.v_grid[vi];
        std::uint64_t seed = derive_seed(plan.seed, (static_cast<std::uint64_t>(vi) << 20) | 0);
        SimTrace t = run_multi_user(sys, plan.horizon, seed, models_for(d), detail::run_options());
        rows[i] = detail::run_row("robustness", dist_names[d], sys.tradeoff, 0, t, oracle.opt_value);
    });

    ResultTable table;
    table.header = detail::run_columns();
    table.rows = std::move(rows);
    table.rows.push_back(detail::oracle_row(oracle));
    return table;
}

enum class McFamily { system_params, control_params };

// Fresh system drawn around a template: either new idle rates and mean
// file sizes (keeping each action's per-attempt success), or new power
// draws and per-attempt successes (keeping the arrival/length process).
// All draws are uniform in (0,1) with values below 1e-3 rejected.
inline SystemSpec randomize_system(const SystemSpec& base, McFamily family, RngStream& rng) {
    auto draw = [&]() {
        double u;
        do { u = rng.uniform01(); } while (u < 1e-3);
        return u;
    };
    SystemSpec sys = base;
    for (SubsystemSpec& s : sys.subsystems) {
        if (family == McFamily::system_params) {
            double lambda = draw(), mu = draw();
            std::vector<double> attempt_success(s.completion_prob.size(), 0.0);
            for (size_t a = 1; a < s.completion_prob.size(); ++a)
                attempt_success[a] = s.completion_prob[a] * s.mean_file_size;
            s.idle_rate = lambda;
            s.mean_file_size = 1.0 / mu;
            for (size_t a = 1; a < s.completion_prob.size(); ++a)
                s.completion_prob[a] = attempt_success[a] * mu;
        } else {
            double mu = 1.0 / s.mean_file_size;
            for (size_t a = 1; a < s.completion_prob.size(); ++a) {
                s.power[a] = draw();
                s.completion_prob[a] = draw() * mu;
            }
        }
    }
    return sys;
}

struct MonteCarloSummary {
    ResultTable table;
    double mean_relative_error_system = 0.0;
    double mean_relative_error_control = 0.0;
    int excluded_system = 0;
    int excluded_control = 0;
};

inline MonteCarloSummary run_monte_carlo(const ExperimentPlan& plan, const LoadedConfig& cfg) {
    validate(plan);
    MonteCarloSummary out;
    out.table.header = {"mode", "family", "replicate", "seed", "slots",
                        "objective", "opt", "rel_error"};

    for (int f = 0; f < 2; ++f) {
        McFamily family = f == 0 ? McFamily::system_params : McFamily::control_params;
        std::string family_name = f == 0 ? "system-params" : "control-params";
        std::vector<std::vector<std::string>> rows(plan.replicates);
        std::vector<double> errors(plan.replicates, -1.0);

        parallel_for(plan.replicates, [&](int rep) {
            std::uint64_t salt = (static_cast<std::uint64_t>(f + 1) << 32) | rep;
            RngStream param_rng(plan.seed, salt);
            SystemSpec sys = randomize_system(cfg.system, family, param_rng);
            std::uint64_t sim_seed = derive_seed(plan.seed, salt * 2 + 1);
            std::vector<std::string> row = {"monte-carlo", family_name, std::to_string(rep),
                                            std::to_string(sim_seed), std::to_string(plan.horizon)};
            try {
                OracleSolution oracle = solve_lp(build_occupancy_lp(sys));
                SimTrace t = run_multi_user(sys, plan.horizon, sim_seed, {}, detail::run_options());
                double err = relative_error(t.expected_throughput(), oracle.opt_value);
                row.push_back(format_double(t.expected_throughput()));
                row.push_back(format_double(oracle.opt_value));
                row.push_back(format_double(err));
                errors[rep] = err;
            } catch (const std::exception&) {
                row.push_back("-");
                row.push_back("-");
                row.push_back("excluded");
            }
            rows[rep] = std::move(row);
        });

        double sum = 0.0;
        int counted = 0, excluded = 0;
        for (double e : errors) {
            if (e < 0.0) ++excluded;
            else { sum += e; ++counted; }
        }
        double mean = counted ? sum / counted : 0.0;
        if (f == 0) { out.mean_relative_error_system = mean; out.excluded_system = excluded; }
        else { out.mean_relative_error_control = mean; out.excluded_control = excluded; }
        for (auto& row : rows) out.table.rows.push_back(std::move(row));
        out.table.notes.push_back("mean_relative_error_" + family_name + " " + format_double(mean));
        out.table.notes.push_back("excluded_" + family_name + " " + std::to_string(excluded));
    }
    out.table.notes.push_back("uniform_draw_rejection_threshold 0.001");
    return out;
}

inline ResultTable oracle_summary(const OccupancyLp& olp, const OracleSolution& sol) {
    ResultTable table;
    table.header = {"opt_value", "variables", "duality_gap", "flow_residual",
                    "power_used", "power_budget", "iterations"};
    table.rows.push_back({format_double(sol.opt_value), std::to_string(olp.variable_count()),
                          format_double(sol.duality_gap), format_double(sol.flow_residual),
                          format_double(sol.power_used), format_double(olp.power_budget),
                          std::to_string(sol.iterations)});
    return table;
}

// Text form of the occupation LP, one constraint per line.
inline std::string lp_to_text(const OccupancyLp& o) {
    auto term = [](std::string& s, double coef, int j, bool& first) {
        if (coef == 0.0) return;
        if (first) {
            s += format_double(coef);
            first = false;
        } else {
            s += coef < 0.0 ? " - " : " + ";
            s += format_double(std::abs(coef));
        }
        s += " x" + std::to_string(j);
    };
    std::string out = "Minimize\n obj: ";
    bool first = true;
    for (int j = 0; j < o.lp.variable_count; ++j) term(out, o.lp.objective[j], j, first);
    out += "\nSubject To\n";
    for (size_t i = 0; i < o.lp.rows.size(); ++i) {
        const auto& row = o.lp.rows[i];
        std::string name;
        if (i < static_cast<size_t>(o.kernel.state_count)) name = "flow_" + std::to_string(i);
        else if (i == static_cast<size_t>(o.kernel.state_count)) name = "mass";
        else name = "power";
        out += " " + name + ": ";
        first = true;
        for (int j = 0; j < o.lp.variable_count; ++j) term(out, row.coeffs[j], j, first);
        if (first) out += "0 x0";
        out += row.rel == Relation::eq ? " = " : " <= ";
        out += format_double(row.rhs);
        out += '\n';
    }
    out += "End\n";
    return out;
}

}  // namespace fdsched
