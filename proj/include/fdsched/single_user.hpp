#pragma once

#include <algorithm>
#include <stdexcept>

#include "model.hpp"
#include "sim.hpp"

namespace fdsched {

// Position inside the current renewal frame of a single-subsystem run.
// A frame spans one service attempt plus, when the attempt completes the
// file, the inactive stretch until the next request lands.
struct FrameClock {
    long long frame_index = 0;
    long long frame_start_slot = 0;
    bool in_idle = false;
};

// Greedy frame-start rule: pick the action whose dpp_reward is largest,
// lowest action id on ties. Action 0 scores zero, so the subsystem idles
// whenever every service action is under water.
inline ActionId choose_action_single(const SubsystemSpec& s, double backlog, double tradeoff) {
    ActionId best = 0;
    double best_value = 0.0;
    for (ActionId a = 1; a < s.action_count(); ++a) {
        double value = dpp_reward(s, a, backlog, tradeoff);
        if (value > best_value) {
            best_value = value;
            best = a;
        }
    }
    return best;
}

// Frame-end bookkeeping: the queue absorbs the attempt's power draw and
// drains budget-per-slot over the frame, floored at zero.
inline VirtualQueueState queue_update_frame(VirtualQueueState q, const SubsystemSpec& s,
                                            ActionId a, long long frame_len, double budget) {
    double next = q.backlog + s.power[a] - budget * static_cast<double>(frame_len);
    if (next < 0.0) next = 0.0;
    if (next > q.ceiling + 1e-9)
        throw std::logic_error("virtual queue exceeded its deterministic ceiling");
    q.backlog = next;
    return q;
}

// Largest backlog the greedy rule can ever produce: past
// tradeoff*weight*mean_file_size/p_min every service action has negative
// reward, so the queue only drains, and one final attempt plus an
// unlucky one-slot frame adds at most p_max - budget.
inline double queue_ceiling_single(const SubsystemSpec& s, double tradeoff, double budget) {
    double p_min = std::numeric_limits<double>::infinity();
    double p_max = 0.0;
    for (ActionId a = 1; a < s.action_count(); ++a) {
        p_min = std::min(p_min, s.power[a]);
        p_max = std::max(p_max, s.power[a]);
    }
    double raw = tradeoff * s.weight * s.mean_file_size / p_min + p_max - budget;
    return std::max(raw, 0.0);
}

// Simulate the renewal chain for horizon slots. The subsystem starts with
// a file in hand. truth, when given, supplies the dynamics the world
// actually follows while the policy keeps planning with s; it must share
// s's action count and powers.
inline SimTrace run_single_user(const SubsystemSpec& s, double tradeoff, double budget,
                                long long horizon, std::uint64_t seed,
                                const SimOptions& opt = {},
                                const SubsystemSpec* truth = nullptr) {
    validate(s);
    const SubsystemSpec& world = truth ? *truth : s;
    if (truth) {
        validate(*truth, "truth");
        if (truth->action_count() != s.action_count())
            throw std::invalid_argument("truth dynamics must share the action set");
    }
    if (!(budget > 0.0)) throw std::invalid_argument("budget must be > 0");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");

    SimTrace trace;
    trace.tradeoff = tradeoff;
    trace.budget = budget;
    trace.seed = seed;
    trace.ceiling = queue_ceiling_single(s, tradeoff, budget);
    trace.completions.assign(1, 0);
    trace.frame_length_hist.assign(512, 0);
    if (opt.batch_count > 0) trace.batches.assign(opt.batch_count, BatchStat{});

    RngStream rng(seed, 1);
    VirtualQueueState q{0.0, trace.ceiling};
    FrameClock clock;
    double cum_power = 0.0;
    long long slot = 0;

    ActionId frame_action = 0;
    auto finish_slot = [&](double expected, double realized, double power, bool frame_end) {
        cum_power += power;
        trace.expected_gain_sum += expected;
        trace.realized_gain_sum += realized;
        trace.power_sum += power;
        if (opt.batch_count > 0) {
            BatchStat& b = trace.batches[detail::batch_of(slot, horizon, opt.batch_count)];
            ++b.slots;
            b.expected_gain += expected;
            b.realized_gain += realized;
            b.power += power;
        }
        if (frame_end) {
            long long len = slot - clock.frame_start_slot + 1;
            q = queue_update_frame(q, s, frame_action, len, budget);
            size_t bin = std::min<long long>(len, static_cast<long long>(trace.frame_length_hist.size()) - 1);
            ++trace.frame_length_hist[bin];
            ++clock.frame_index;
            if (opt.check_prefix_power)
                detail::check_prefix_power(cum_power, budget, slot + 1, q.backlog);
        }
        trace.queue_sum += q.backlog;
        trace.max_queue = std::max(trace.max_queue, q.backlog);
        trace.push_record({slot, expected, realized, power, q.backlog}, opt.record_capacity);
        ++slot;
    };

    while (slot < horizon) {
        clock.frame_start_slot = slot;
        clock.in_idle = false;
        frame_action = choose_action_single(s, q.backlog, tradeoff);
        bool completed = rng.bernoulli(world.completion_prob[frame_action]);
        double expected = s.weight * s.mean_file_size * s.completion_prob[frame_action];
        double realized = completed ? s.weight * world.mean_file_size : 0.0;
        finish_slot(expected, realized, s.power[frame_action], !completed);
        if (!completed) continue;
        ++trace.completions[0];
        clock.in_idle = true;
        while (slot < horizon) {
            bool activated = rng.bernoulli(world.idle_rate);
            finish_slot(0.0, 0.0, 0.0, activated);
            if (activated) break;
        }
    }

    trace.slots = horizon;
    return trace;
}

}  // namespace fdsched
