#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace fdsched {

// One slot of a simulation, kept only when recording is switched on.
struct SlotRecord {
    long long slot = 0;
    double expected_gain = 0.0;  // weighted mean units completed this slot
    double realized_gain = 0.0;  // weighted units actually credited this slot
    double power = 0.0;
    double queue_after = 0.0;
};

// Partial sums over one contiguous batch of slots, for standard errors.
struct BatchStat {
    long long slots = 0;
    double expected_gain = 0.0;
    double realized_gain = 0.0;
    double power = 0.0;
};

struct SimOptions {
    long long record_capacity = 0;   // keep the last this-many SlotRecords
    int batch_count = 0;             // split the horizon into this many batches
    bool check_prefix_power = false; // assert cumulative power <= budget*t + queue
};

struct SimTrace {
    long long slots = 0;
    double tradeoff = 0.0;
    double budget = 0.0;
    std::uint64_t seed = 0;

    double expected_gain_sum = 0.0;
    double realized_gain_sum = 0.0;
    double power_sum = 0.0;
    double queue_sum = 0.0;
    double max_queue = 0.0;
    double ceiling = 0.0;

    std::vector<long long> completions;        // per subsystem
    std::vector<long long> frame_length_hist;  // index = frame length, last bin collects the tail
    std::vector<BatchStat> batches;
    std::vector<SlotRecord> records;           // ring buffer, use records_in_order()
    long long records_seen = 0;

    double expected_throughput() const { return slots ? expected_gain_sum / slots : 0.0; }
    double realized_throughput() const { return slots ? realized_gain_sum / slots : 0.0; }
    double avg_power() const { return slots ? power_sum / slots : 0.0; }
    double avg_queue() const { return slots ? queue_sum / slots : 0.0; }

    void push_record(const SlotRecord& r, long long capacity) {
        if (capacity <= 0) return;
        if (static_cast<long long>(records.size()) < capacity)
            records.push_back(r);
        else
            records[records_seen % capacity] = r;
        ++records_seen;
    }

    std::vector<SlotRecord> records_in_order() const {
        if (records_seen <= static_cast<long long>(records.size())) return records;
        std::vector<SlotRecord> out;
        out.reserve(records.size());
        long long cap = static_cast<long long>(records.size());
        long long start = records_seen % cap;
        for (long long i = 0; i < cap; ++i)
            out.push_back(records[(start + i) % cap]);
        return out;
    }
};

// Standard error of the per-slot mean of one metric, from batch means.
// extract pulls the wanted sum out of a BatchStat.
template <typename Extract>
double batch_standard_error(const SimTrace& trace, Extract extract) {
    size_t b = trace.batches.size();
    if (b < 2) return 0.0;
    std::vector<double> means;
    means.reserve(b);
    for (const auto& batch : trace.batches) {
        if (batch.slots <= 0) return 0.0;
        means.push_back(extract(batch) / static_cast<double>(batch.slots));
    }
    double avg = 0.0;
    for (double m : means) avg += m;
    avg /= static_cast<double>(b);
    double var = 0.0;
    for (double m : means) var += (m - avg) * (m - avg);
    var /= static_cast<double>(b - 1);
    return std::sqrt(var / static_cast<double>(b));
}

inline double throughput_standard_error(const SimTrace& trace) {
    return batch_standard_error(trace, [](const BatchStat& s) { return s.expected_gain; });
}

inline double power_standard_error(const SimTrace& trace) {
    return batch_standard_error(trace, [](const BatchStat& s) { return s.power; });
}

}  // namespace fdsched
