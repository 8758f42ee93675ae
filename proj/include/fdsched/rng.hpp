#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fdsched {

// Seeded random stream. Every (seed, stream) pair gives an independent
// deterministic sequence; sampling avoids std:: distribution objects so the
// produced numbers are identical across standard library implementations.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : engine_(mix(mix(seed, 0x9E3779B97F4A7C15ull) ^ stream, 0xBF58476D1CE4E5B9ull)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0,1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    long long uniform_int(long long lo, long long hi) {
        double u = uniform01();
        long long span = hi - lo + 1;
        long long v = lo + static_cast<long long>(u * static_cast<double>(span));
        return v > hi ? hi : v;
    }

    // Number of Bernoulli(p) trials up to and including the first success.
    long long geometric_trials(double p) {
        if (p >= 1.0) return 1;
        double u = uniform01();
        double g = std::floor(std::log1p(-u) / std::log1p(-p));
        long long v = 1 + static_cast<long long>(g);
        return v < 1 ? 1 : v;
    }

    long long poisson(double rate) {
        long long total = 0;
        while (rate > 500.0) {
            total += poisson_small(500.0);
            rate -= 500.0;
        }
        return total + poisson_small(rate);
    }

private:
    long long poisson_small(double rate) {
        double limit = std::exp(-rate);
        long long k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }

    static std::uint64_t mix(std::uint64_t x, std::uint64_t salt) {
        x += salt;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace fdsched
