#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"
#include "rng.hpp"
#include "sim.hpp"
#include "simplex.hpp"
#include "trace.hpp"

namespace fdsched {

// Joint action of the whole system, one entry per subsystem, 0 for idle.
struct CompositeAction {
    std::vector<ActionId> per_subsystem;
};

// Exact slot-to-slot dynamics over composite states. State s encodes the
// active flags as bits: bit n set means subsystem n holds a file. For each
// state, actions lists every joint action that idles inactive subsystems
// and serves at most max_concurrent of the active ones, in ascending
// lexicographic order, so the all-idle action always sits at index 0.
struct TransitionKernel {
    int subsystem_count = 0;
    long long state_count = 0;
    std::vector<std::vector<CompositeAction>> actions;          // [state]
    std::vector<std::vector<std::vector<double>>> prob;         // [state][action][next]
};

inline TransitionKernel build_transition_kernel(const SystemSpec& sys) {
    validate(sys);
    int n_count = sys.subsystem_count();
    if (n_count > 12)
        throw std::invalid_argument("composite state space is 2^N; refusing N > 12");

    TransitionKernel k;
    k.subsystem_count = n_count;
    k.state_count = 1LL << n_count;
    k.actions.resize(k.state_count);
    k.prob.resize(k.state_count);

    for (long long s = 0; s < k.state_count; ++s) {
        std::vector<ActionId> current(n_count, 0);
        auto emit = [&](auto&& self, int n, int serving) -> void {
            if (n == n_count) {
                k.actions[s].push_back(CompositeAction{current});
                return;
            }
            self(self, n + 1, serving);  // leave subsystem n idle
            if ((s >> n) & 1) {
                for (ActionId a = 1; a < sys.subsystems[n].action_count(); ++a) {
                    if (serving + 1 > sys.max_concurrent) break;
                    current[n] = a;
                    self(self, n + 1, serving + 1);
                    current[n] = 0;
                }
            }
        };
        emit(emit, 0, 0);
        std::sort(k.actions[s].begin(), k.actions[s].end(),
                  [](const CompositeAction& a, const CompositeAction& b) {
                      return a.per_subsystem < b.per_subsystem;
                  });

        k.prob[s].resize(k.actions[s].size());
        for (size_t ai = 0; ai < k.actions[s].size(); ++ai) {
            const auto& act = k.actions[s][ai].per_subsystem;
            auto& row = k.prob[s][ai];
            row.assign(k.state_count, 0.0);
            for (long long next = 0; next < k.state_count; ++next) {
                double p = 1.0;
                for (int n = 0; n < n_count && p > 0.0; ++n) {
                    const SubsystemSpec& sub = sys.subsystems[n];
                    bool now = (s >> n) & 1, then = (next >> n) & 1;
                    double step;
                    if (now) {
                        double done = sub.completion_prob[act[n]];
                        step = then ? 1.0 - done : done;
                    } else {
                        step = then ? sub.idle_rate : 1.0 - sub.idle_rate;
                    }
                    p *= step;
                }
                row[next] = p;
            }
        }
    }
    return k;
}

// Occupation-measure program: one variable per (state, joint action) pair
// holding the long-run fraction of slots spent in that pair. Flow balance
// per state, total mass one, average power at most the budget; maximizing
// weighted expected units delivered per slot.
struct OccupancyLp {
    TransitionKernel kernel;
    std::vector<std::pair<long long, int>> variables;  // (state, action index)
    std::vector<double> reward;                        // per variable
    std::vector<double> power;                         // per variable
    double power_budget = 0.0;
    LinearProgram lp;                                  // min -reward . x

    long long variable_count() const { return static_cast<long long>(variables.size()); }
};

inline OccupancyLp build_occupancy_lp(const SystemSpec& sys) {
    OccupancyLp o;
    o.kernel = build_transition_kernel(sys);
    o.power_budget = sys.power_budget;

    for (long long s = 0; s < o.kernel.state_count; ++s) {
        for (size_t ai = 0; ai < o.kernel.actions[s].size(); ++ai) {
            const auto& act = o.kernel.actions[s][ai].per_subsystem;
            double reward = 0.0, power = 0.0;
            for (int n = 0; n < sys.subsystem_count(); ++n) {
                const SubsystemSpec& sub = sys.subsystems[n];
                reward += sub.weight * sub.mean_file_size * sub.completion_prob[act[n]];
                power += sub.power[act[n]];
            }
            o.variables.emplace_back(s, static_cast<int>(ai));
            o.reward.push_back(reward);
            o.power.push_back(power);
        }
    }

    int vars = static_cast<int>(o.variable_count());
    o.lp.variable_count = vars;
    o.lp.objective.resize(vars);
    for (int j = 0; j < vars; ++j) o.lp.objective[j] = -o.reward[j];

    for (long long next = 0; next < o.kernel.state_count; ++next) {
        LinearProgram::Row row;
        row.coeffs.assign(vars, 0.0);
        row.rel = Relation::eq;
        row.rhs = 0.0;
        for (int j = 0; j < vars; ++j) {
            auto [s, ai] = o.variables[j];
            row.coeffs[j] += o.kernel.prob[s][ai][next];
            if (s == next) row.coeffs[j] -= 1.0;
        }
        o.lp.rows.push_back(std::move(row));
    }
    {
        LinearProgram::Row row;
        row.coeffs.assign(vars, 1.0);
        row.rel = Relation::eq;
        row.rhs = 1.0;
        o.lp.rows.push_back(std::move(row));
    }
    {
        LinearProgram::Row row;
        row.coeffs = o.power;
        row.rel = Relation::le;
        row.rhs = sys.power_budget;
        o.lp.rows.push_back(std::move(row));
    }
    return o;
}

struct OracleSolution {
    double opt_value = 0.0;          // max long-run weighted units per slot
    std::vector<double> occupation;  // one entry per LP variable
    double duality_gap = 0.0;
    double flow_residual = 0.0;      // worst violation over flow/mass/power rows
    double power_used = 0.0;
    long long iterations = 0;
};

inline OracleSolution solve_lp(const OccupancyLp& o, double tol = 1e-9) {
    LpSolution s = solve_simplex(o.lp);
    if (s.status != LpStatus::optimal)
        throw std::runtime_error("occupation LP did not reach an optimum");
    if (s.max_primal_residual > tol)
        throw std::runtime_error("occupation LP residual above tolerance");

    OracleSolution out;
    out.opt_value = -s.objective;
    out.occupation = s.x;
    out.duality_gap = s.duality_gap;
    out.flow_residual = s.max_primal_residual;
    out.iterations = s.iterations;
    for (long long j = 0; j < o.variable_count(); ++j)
        out.power_used += o.power[j] * s.x[j];
    return out;
}

// Stationary rule extracted from an occupation measure: in each state,
// pick among that state's joint actions with probabilities proportional
// to their occupation mass. States the measure never visits idle.
struct StationaryRandomizedPolicy {
    std::vector<std::vector<double>> action_prob;  // [state][action index]
};

inline StationaryRandomizedPolicy extract_policy(const OccupancyLp& o,
                                                 const std::vector<double>& occupation) {
    if (occupation.size() != static_cast<size_t>(o.variable_count()))
        throw std::invalid_argument("occupation vector length mismatch");
    StationaryRandomizedPolicy p;
    p.action_prob.resize(o.kernel.state_count);
    for (long long s = 0; s < o.kernel.state_count; ++s)
        p.action_prob[s].assign(o.kernel.actions[s].size(), 0.0);

    std::vector<double> mass(o.kernel.state_count, 0.0);
    for (long long j = 0; j < o.variable_count(); ++j) {
        auto [s, ai] = o.variables[j];
        p.action_prob[s][ai] = std::max(occupation[j], 0.0);
        mass[s] += p.action_prob[s][ai];
    }
    for (long long s = 0; s < o.kernel.state_count; ++s) {
        if (mass[s] > 1e-12) {
            for (double& v : p.action_prob[s]) v /= mass[s];
        } else {
            p.action_prob[s].assign(o.kernel.actions[s].size(), 0.0);
            p.action_prob[s][0] = 1.0;  // all-idle is always action index 0
        }
    }
    return p;
}

// Closed-loop run of a stationary randomized rule on the matched
// two-state-per-subsystem dynamics, with the same accounting as the
// adaptive schedulers.
inline SimTrace run_randomized_policy(const SystemSpec& sys, const OccupancyLp& o,
                                      const StationaryRandomizedPolicy& policy,
                                      long long horizon, std::uint64_t seed) {
    validate(sys);
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    int n_count = sys.subsystem_count();

    std::vector<FileLengthModel> dist;
    for (const SubsystemSpec& s : sys.subsystems)
        dist.push_back(FileLengthModel::geometric(1.0 / s.mean_file_size));

    SimTrace trace;
    trace.slots = horizon;
    trace.tradeoff = sys.tradeoff;
    trace.budget = sys.power_budget;
    trace.seed = seed;
    trace.completions.assign(n_count, 0);

    std::vector<RngStream> rng;
    rng.reserve(n_count + 1);
    for (int i = 0; i <= n_count; ++i) rng.emplace_back(seed, static_cast<std::uint64_t>(i));

    std::vector<FileState> files(n_count);
    for (auto& f : files) f.active = true;
    long long state = o.kernel.state_count - 1;

    std::vector<ActionId> actions(n_count, 0);
    std::vector<StepOutcome> outcomes(n_count);
    for (long long t = 0; t < horizon; ++t) {
        const auto& probs = policy.action_prob[state];
        double u = rng[0].uniform01();
        size_t ai = 0;
        double acc = 0.0;
        for (size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) { ai = i; break; }
            if (i + 1 == probs.size()) ai = i;
        }
        actions = o.kernel.actions[state][ai].per_subsystem;
        for (int n = 0; n < n_count; ++n)
            outcomes[n] = step_subsystem(files[n], sys.subsystems[n], actions[n], dist[n], rng[n + 1]);
        accumulate_metrics(trace, sys, actions, outcomes);
        state = 0;
        for (int n = 0; n < n_count; ++n) {
            files[n] = outcomes[n].next;
            if (files[n].active) state |= 1LL << n;
        }
    }
    return trace;
}

}  // namespace fdsched
