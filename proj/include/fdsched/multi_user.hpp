#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "model.hpp"
#include "sim.hpp"
#include "single_user.hpp"

namespace fdsched {

struct SchedulerState {
    VirtualQueueState queue;
    std::vector<FileState> file_states;
    std::vector<FrameClock> frame_clocks;
};

struct IndexResult {
    double value = 0.0;
    ActionId best_action = 0;
};

// Priority score of one active subsystem: the best dpp_reward over its
// actions, never below zero since idling scores zero.
inline IndexResult subsystem_index(const SubsystemSpec& s, double backlog, double tradeoff) {
    IndexResult r;
    for (ActionId a = 1; a < s.action_count(); ++a) {
        double value = dpp_reward(s, a, backlog, tradeoff);
        if (value > r.value) {
            r.value = value;
            r.best_action = a;
        }
    }
    return r;
}

struct SlotDecision {
    std::vector<ActionId> actions;  // one per subsystem, 0 when unserved
    std::vector<int> active_set;    // subsystems granted a service slot
};

// Rank the active subsystems by index and grant the top max_concurrent
// slots. Ties go to the lower subsystem id; a granted subsystem still
// idles when even its best action scores zero.
inline SlotDecision schedule_slot(const SchedulerState& state, const SystemSpec& sys) {
    int n_count = sys.subsystem_count();
    SlotDecision d;
    d.actions.assign(n_count, 0);

    std::vector<std::pair<double, int>> ranked;
    std::vector<IndexResult> indices(n_count);
    for (int n = 0; n < n_count; ++n) {
        if (!state.file_states[n].active) continue;
        indices[n] = subsystem_index(sys.subsystems[n], state.queue.backlog, sys.tradeoff);
        ranked.emplace_back(indices[n].value, n);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    int grants = std::min<int>(sys.max_concurrent, static_cast<int>(ranked.size()));
    for (int i = 0; i < grants; ++i) {
        int n = ranked[i].second;
        d.actions[n] = indices[n].best_action;
        d.active_set.push_back(n);
    }
    std::sort(d.active_set.begin(), d.active_set.end());
    return d;
}

// Per-slot queue update: absorb the slot's total power draw, drain one
// budget unit, floor at zero.
inline VirtualQueueState queue_update_slot(VirtualQueueState q, const SlotDecision& d,
                                           const SystemSpec& sys) {
    double total = 0.0;
    for (int n = 0; n < sys.subsystem_count(); ++n)
        total += sys.subsystems[n].power[d.actions[n]];
    double next = q.backlog + total - sys.power_budget;
    if (next < 0.0) next = 0.0;
    if (next > q.ceiling + 1e-9)
        throw std::logic_error("virtual queue exceeded its deterministic ceiling");
    q.backlog = next;
    return q;
}

// Deterministic bound on the shared queue: once the backlog passes
// tradeoff * max weighted file value / cheapest power, every index is
// zero and nothing is served, so one slot can overshoot by at most the
// sum of per-subsystem peak draws minus the drain.
inline double queue_ceiling_multi(const SystemSpec& sys) {
    double c_max = 0.0, b_max = 0.0, p_min = std::numeric_limits<double>::infinity();
    double p_max_sum = 0.0;
    for (const SubsystemSpec& s : sys.subsystems) {
        c_max = std::max(c_max, s.weight);
        b_max = std::max(b_max, s.mean_file_size);
        double p_max = 0.0;
        for (ActionId a = 1; a < s.action_count(); ++a) {
            p_min = std::min(p_min, s.power[a]);
            p_max = std::max(p_max, s.power[a]);
        }
        p_max_sum += p_max;
    }
    double raw = sys.tradeoff * c_max * b_max / p_min + p_max_sum - sys.power_budget;
    return std::max(raw, 0.0);
}

// Slotted simulation of the full system. models supplies one file-length
// distribution per subsystem; empty means geometric with the matched mean,
// which reproduces the two-state chain the policy is tuned for.
inline SimTrace run_multi_user(const SystemSpec& sys, long long horizon, std::uint64_t seed,
                               const std::vector<FileLengthModel>& models = {},
                               const SimOptions& opt = {}) {
    validate(sys);
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    int n_count = sys.subsystem_count();

    std::vector<FileLengthModel> dist = models;
    if (dist.empty()) {
        for (const SubsystemSpec& s : sys.subsystems)
            dist.push_back(FileLengthModel::geometric(1.0 / s.mean_file_size));
    }
    if (static_cast<int>(dist.size()) != n_count)
        throw std::invalid_argument("need one file-length model per subsystem");
    for (int n = 0; n < n_count; ++n)
        if (dist[n].kind != FileLengthModel::Kind::exponential)
            for (ActionId a = 1; a < sys.subsystems[n].action_count(); ++a)
                packet_success_prob(sys.subsystems[n], a);

    SimTrace trace;
    trace.slots = horizon;
    trace.tradeoff = sys.tradeoff;
    trace.budget = sys.power_budget;
    trace.seed = seed;
    trace.ceiling = queue_ceiling_multi(sys);
    trace.completions.assign(n_count, 0);

    if (opt.batch_count > 0) trace.batches.assign(opt.batch_count, BatchStat{});

    std::vector<RngStream> rng;
    rng.reserve(n_count + 1);
    for (int i = 0; i <= n_count; ++i) rng.emplace_back(seed, static_cast<std::uint64_t>(i));

    SchedulerState state;
    state.queue = VirtualQueueState{0.0, trace.ceiling};
    state.file_states.assign(n_count, FileState{});
    state.frame_clocks.assign(n_count, FrameClock{});
    for (int n = 0; n < n_count; ++n) {
        state.file_states[n].active = true;
        if (dist[n].kind == FileLengthModel::Kind::uniform_int ||
            dist[n].kind == FileLengthModel::Kind::poisson) {
            state.file_states[n].size = sample_file_length(dist[n], rng[n + 1]);
            state.file_states[n].remaining = state.file_states[n].size;
        }
    }

    std::vector<StepOutcome> outcomes(n_count);
    double cum_power = 0.0;
    for (long long t = 0; t < horizon; ++t) {
        SlotDecision d = schedule_slot(state, sys);
        for (int n = 0; n < n_count; ++n)
            outcomes[n] = step_subsystem(state.file_states[n], sys.subsystems[n], d.actions[n],
                                         dist[n], rng[n + 1]);
        SlotTotals totals = accumulate_metrics(trace, sys, d.actions, outcomes);
        state.queue = queue_update_slot(state.queue, d, sys);
        for (int n = 0; n < n_count; ++n) {
            bool was_active = state.file_states[n].active;
            state.file_states[n] = outcomes[n].next;
            FrameClock& clock = state.frame_clocks[n];
            if (was_active && outcomes[n].completed) clock.in_idle = true;
            if (!was_active && outcomes[n].next.active) {
                clock.in_idle = false;
                clock.frame_start_slot = t + 1;
                ++clock.frame_index;
            }
        }

        cum_power += totals.power;
        if (opt.check_prefix_power)
            detail::check_prefix_power(cum_power, sys.power_budget, t + 1, state.queue.backlog);
        trace.queue_sum += state.queue.backlog;
        trace.max_queue = std::max(trace.max_queue, state.queue.backlog);
        if (opt.batch_count > 0) {
            BatchStat& b = trace.batches[detail::batch_of(t, horizon, opt.batch_count)];
            ++b.slots;
            b.expected_gain += totals.expected_gain;
            b.realized_gain += totals.realized_gain;
            b.power += totals.power;
        }
        trace.push_record({t, totals.expected_gain, totals.realized_gain, totals.power,
                           state.queue.backlog},
                          opt.record_capacity);
    }
    return trace;
}

}  // namespace fdsched
