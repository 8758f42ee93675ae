#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdsched {

// Index into a subsystem's action set. Action 0 always means "stay idle".
using ActionId = int;

// One download subsystem. It alternates between an inactive phase (waiting
// for the next request) and an active phase (holding a file to deliver).
// While inactive it turns active with probability idle_rate each slot.
// While active, taking action a completes the whole file with probability
// completion_prob[a] in that slot and draws power[a].
struct SubsystemSpec {
    double idle_rate = 0.0;
    double mean_file_size = 0.0;
    std::vector<double> completion_prob;  // [0] must be 0
    std::vector<double> power;            // [0] must be 0
    double weight = 1.0;

    int action_count() const { return static_cast<int>(completion_prob.size()); }
};

struct SystemSpec {
    std::vector<SubsystemSpec> subsystems;
    double power_budget = 0.0;   // cap on the long-run average of total power
    int max_concurrent = 1;      // at most this many subsystems served per slot
    double tradeoff = 0.0;       // throughput-vs-queue knob used by the policies

    int subsystem_count() const { return static_cast<int>(subsystems.size()); }
};

// Virtual queue that accumulates power overdraft. backlog is the current
// value; ceiling is the deterministic bound the policy guarantees, kept
// alongside so simulation loops can assert it every update.
struct VirtualQueueState {
    double backlog = 0.0;
    double ceiling = std::numeric_limits<double>::infinity();
};

// Download progress of one subsystem. For memoryless file models only
// `active` is meaningful; packet models track the sampled total size and
// how many packets are still owed.
struct FileState {
    bool active = false;
    long long remaining = 0;
    long long size = 0;
};

// Distribution of file lengths used by the simulator. geometric and
// exponential are memoryless in the slot domain; uniform_int and poisson
// sample an explicit packet count up front.
struct FileLengthModel {
    enum class Kind { geometric, exponential, uniform_int, poisson };

    Kind kind = Kind::geometric;
    double packet_rate = 1.0;   // geometric: per-packet termination probability
    double mean_size = 1.0;     // exponential mean; poisson raw rate before clamping
    long long lo = 1, hi = 1;   // uniform_int bounds, inclusive

    static FileLengthModel geometric(double packet_rate) {
        if (!(packet_rate > 0.0) || packet_rate > 1.0)
            throw std::invalid_argument("geometric file model needs packet_rate in (0,1]");
        FileLengthModel m;
        m.kind = Kind::geometric;
        m.packet_rate = packet_rate;
        return m;
    }

    static FileLengthModel exponential(double mean_size) {
        if (!(mean_size > 0.0))
            throw std::invalid_argument("exponential file model needs mean_size > 0");
        FileLengthModel m;
        m.kind = Kind::exponential;
        m.mean_size = mean_size;
        return m;
    }

    static FileLengthModel uniform_int(long long lo, long long hi) {
        if (lo < 1 || hi < lo)
            throw std::invalid_argument("uniform file model needs 1 <= lo <= hi");
        FileLengthModel m;
        m.kind = Kind::uniform_int;
        m.lo = lo;
        m.hi = hi;
        return m;
    }

    // Raw Poisson(rate) sampling, clamped below at one packet.
    static FileLengthModel poisson(double rate) {
        if (!(rate > 0.0))
            throw std::invalid_argument("poisson file model needs rate > 0");
        FileLengthModel m;
        m.kind = Kind::poisson;
        m.mean_size = rate;
        return m;
    }

    // Picks the Poisson rate so the clamped mean rate + exp(-rate) hits
    // target_mean. Newton iteration; the map is strictly increasing.
    static FileLengthModel poisson_with_mean(double target_mean) {
        if (!(target_mean > 1.0))
            throw std::invalid_argument("clamped poisson mean must exceed 1");
        double rate = target_mean;
        for (int i = 0; i < 100; ++i) {
            double f = rate + std::exp(-rate) - target_mean;
            double df = 1.0 - std::exp(-rate);
            double next = rate - f / df;
            if (next <= 0.0) next = rate / 2.0;
            if (std::abs(next - rate) < 1e-14 * (1.0 + rate)) { rate = next; break; }
            rate = next;
        }
        return poisson(rate);
    }

    double mean() const {
        switch (kind) {
            case Kind::geometric:   return 1.0 / packet_rate;
            case Kind::exponential: return mean_size;
            case Kind::uniform_int: return 0.5 * static_cast<double>(lo + hi);
            case Kind::poisson:     return mean_size + std::exp(-mean_size);
        }
        return 0.0;
    }
};

// Mean number of slots from one service decision to the next one, when the
// active-phase action is a: one slot if the file survives, otherwise one
// slot plus a geometric inactive phase of mean 1/idle_rate.
inline double expected_frame_length(const SubsystemSpec& s, ActionId a) {
    return 1.0 + s.completion_prob[a] / s.idle_rate;
}

// Per-slot completion probability of an exponentially distributed file of
// mean mean_size when the action moves transmit_rate units and the attempt
// succeeds with probability success_prob.
inline double phi_from_exponential(double transmit_rate, double mean_size, double success_prob) {
    return success_prob * (1.0 - std::exp(-transmit_rate / mean_size));
}

// Per-slot completion probability when files are geometric packet counts
// with termination probability packet_rate and each slot lands one packet
// with probability success_prob.
inline double phi_from_geometric(double packet_rate, double success_prob) {
    return packet_rate * success_prob;
}

// Expected per-frame gain rate of taking action a now: weighted throughput
// scaled by tradeoff, minus the power bill charged against the virtual
// queue, divided by the mean frame length the action induces.
inline double dpp_reward(const SubsystemSpec& s, ActionId a, double backlog, double tradeoff) {
    double phi = s.completion_prob[a];
    double gain = tradeoff * s.weight * s.mean_file_size * phi - backlog * s.power[a];
    return gain / (1.0 + phi / s.idle_rate);
}

inline void validate(const SubsystemSpec& s, const std::string& label = "subsystem") {
    auto fail = [&](const std::string& why) {
        throw std::invalid_argument(label + ": " + why);
    };
    if (!(s.idle_rate > 0.0) || s.idle_rate > 1.0) fail("idle_rate must be in (0,1]");
    if (!(s.mean_file_size > 0.0)) fail("mean_file_size must be > 0");
    if (!(s.weight > 0.0)) fail("weight must be > 0");
    if (s.completion_prob.size() != s.power.size()) fail("completion_prob/power size mismatch");
    if (s.completion_prob.size() < 2) fail("need the idle action plus at least one service action");
    if (s.completion_prob[0] != 0.0 || s.power[0] != 0.0) fail("action 0 must be free and inert");
    for (size_t a = 1; a < s.completion_prob.size(); ++a) {
        double phi = s.completion_prob[a];
        if (!(phi >= 0.0) || phi > 1.0) fail("completion_prob out of [0,1]");
        if (!(s.power[a] > 0.0)) fail("non-idle actions must draw positive power");
    }
}

inline void validate(const SystemSpec& sys) {
    if (sys.subsystems.empty())
        throw std::invalid_argument("system: needs at least one subsystem");
    if (sys.max_concurrent < 1 || sys.max_concurrent > sys.subsystem_count())
        throw std::invalid_argument("system: max_concurrent must be in [1, subsystem count]");
    if (!(sys.power_budget > 0.0))
        throw std::invalid_argument("system: power_budget must be > 0");
    if (!(sys.tradeoff >= 0.0))
        throw std::invalid_argument("system: tradeoff must be >= 0");
    for (int n = 0; n < sys.subsystem_count(); ++n)
        validate(sys.subsystems[n], "subsystem " + std::to_string(n));
}

}  // namespace fdsched
