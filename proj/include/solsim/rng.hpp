#pragma once
/*
Counter-based splittable RNG.

Every random draw in a run is a pure function of a 64-bit key assembled from
(seed, replication, stream id, round t) plus a per-stream counter. Streams
never share state, so memoized learner nodes, adversaries, and concurrent
replications all get reproducible, collision-free randomness. The mixer is
the splitmix64 finalizer, which is statistically solid for simulation use.
*/
#include <cmath>
#include <cstdint>

namespace solsim {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t key_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Fixed stream salts; node streams are derived from the node's canonical key.
enum : std::uint64_t {
    kStreamAdversary = 0xADull,
    kStreamLabels    = 0x1Bull,
    kStreamNode      = 0x40Dull,
    kStreamDiag      = 0xD1Aull,
};

class RngStream {
public:
    RngStream() : key_(0), ctr_(0) {}
    explicit RngStream(std::uint64_t key) : key_(key), ctr_(0) {}

    static RngStream keyed(std::uint64_t seed, std::uint64_t replication,
                           std::uint64_t stream, std::uint64_t t = 0) {
        std::uint64_t k = key_combine(seed, replication);
        k = key_combine(k, stream);
        k = key_combine(k, t);
        return RngStream(k);
    }

    std::uint64_t next_u64() { return mix64(key_ + 0x632be59bd9b4e019ULL * ++ctr_); }

    // Uniform in [0,1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller (deterministic, no library distributions).
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    bool next_bernoulli(double p) { return next_double() < p; }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
};

} // namespace solsim
