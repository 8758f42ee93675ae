#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "model.hpp"
#include "rng.hpp"
#include "trace.hpp"

namespace fdsched {

struct StepOutcome {
    FileState next;
    bool completed = false;
    double delivered = 0.0;  // unweighted units credited this slot
};

// Per-attempt success probability recovered from the matched-mean
// construction: completion_prob[a] was built as packet_rate * success, and
// the mean packet count is 1/packet_rate.
inline double packet_success_prob(const SubsystemSpec& s, ActionId a) {
    double q = s.completion_prob[a] * s.mean_file_size;
    if (q > 1.0 + 1e-9)
        throw std::invalid_argument("completion_prob * mean_file_size exceeds 1; not a packet system");
    return std::min(q, 1.0);
}

inline long long sample_file_length(const FileLengthModel& m, RngStream& rng) {
    switch (m.kind) {
        case FileLengthModel::Kind::geometric:
            return rng.geometric_trials(m.packet_rate);
        case FileLengthModel::Kind::uniform_int:
            return rng.uniform_int(m.lo, m.hi);
        case FileLengthModel::Kind::poisson:
            return std::max<long long>(1, rng.poisson(m.mean_size));
        case FileLengthModel::Kind::exponential:
            return 1;  // memoryless model, no explicit length is tracked
    }
    return 1;
}

// Advance one subsystem by one slot. Inactive subsystems may only take
// action 0 and turn active with probability idle_rate. Active subsystems
// under a memoryless model finish outright with probability
// completion_prob[a]; under a packet model each slot lands one packet with
// the recovered per-attempt success probability.
inline StepOutcome step_subsystem(const FileState& st, const SubsystemSpec& spec, ActionId a,
                                  const FileLengthModel& model, RngStream& rng) {
    StepOutcome out;
    if (!st.active) {
        if (a != 0)
            throw std::logic_error("service action on an inactive subsystem");
        if (rng.bernoulli(spec.idle_rate)) {
            out.next.active = true;
            if (model.kind == FileLengthModel::Kind::uniform_int ||
                model.kind == FileLengthModel::Kind::poisson) {
                out.next.size = sample_file_length(model, rng);
                out.next.remaining = out.next.size;
            }
        }
        return out;
    }

    out.next = st;
    if (a == 0) return out;

    switch (model.kind) {
        case FileLengthModel::Kind::geometric: {
            double done = model.packet_rate * packet_success_prob(spec, a);
            if (rng.bernoulli(std::min(done, 1.0))) {
                out.completed = true;
                out.delivered = model.mean();
                out.next = FileState{};
            }
            break;
        }
        case FileLengthModel::Kind::exponential: {
            if (rng.bernoulli(spec.completion_prob[a])) {
                out.completed = true;
                out.delivered = model.mean();
                out.next = FileState{};
            }
            break;
        }
        case FileLengthModel::Kind::uniform_int:
        case FileLengthModel::Kind::poisson: {
            if (rng.bernoulli(packet_success_prob(spec, a))) {
                out.next.remaining -= 1;
                if (out.next.remaining <= 0) {
                    out.completed = true;
                    out.delivered = static_cast<double>(st.size);
                    out.next = FileState{};
                }
            }
            break;
        }
    }
    return out;
}

struct SlotTotals {
    double expected_gain = 0.0;
    double realized_gain = 0.0;
    double power = 0.0;
};

// Fold one slot's decisions and outcomes into the running trace sums.
inline SlotTotals accumulate_metrics(SimTrace& trace, const SystemSpec& sys,
                                     const std::vector<ActionId>& actions,
                                     const std::vector<StepOutcome>& outcomes) {
    SlotTotals t;
    for (int n = 0; n < sys.subsystem_count(); ++n) {
        const SubsystemSpec& s = sys.subsystems[n];
        ActionId a = actions[n];
        t.expected_gain += s.weight * s.mean_file_size * s.completion_prob[a];
        t.power += s.power[a];
        if (outcomes[n].completed) {
            t.realized_gain += s.weight * outcomes[n].delivered;
            ++trace.completions[n];
        }
    }
    trace.expected_gain_sum += t.expected_gain;
    trace.realized_gain_sum += t.realized_gain;
    trace.power_sum += t.power;
    return t;
}

inline double relative_error(double objective, double optimum) {
    if (!(optimum > 0.0))
        throw std::domain_error("relative_error: reference optimum must be positive");
    return std::abs(objective - optimum) / optimum;
}

namespace detail {

inline int batch_of(long long slot, long long horizon, int batch_count) {
    return static_cast<int>((slot * batch_count) / horizon);
}

inline void check_prefix_power(double cum_power, double budget, long long t_next, double backlog) {
    double bound = budget * static_cast<double>(t_next) + backlog;
    if (cum_power > bound + 1e-9 * (1.0 + bound))
        throw std::logic_error("cumulative power exceeded budget*t + queue backlog");
}

}  // namespace detail

}  // namespace fdsched
