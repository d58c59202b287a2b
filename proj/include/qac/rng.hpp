#pragma once

#include <cstdint>

namespace qac {

/// SplitMix64 (Steele/Lea/Flood). Chosen over std::mt19937_64 because the
/// standard distributions are implementation-defined; every draw made by
/// this project must be bit-reproducible across compilers.
struct SplitMix64 {
    std::uint64_t state = 0;

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 significant bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by rejection sampling (no modulo bias).
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * ((~std::uint64_t{0} / bound));
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % bound;
    }
};

/// Seed for the sub-stream `stream_id` of a master seed: one SplitMix64
/// step applied to master + (stream_id + 1) * golden-gamma. Documented so
/// other implementations can reproduce draw sequences exactly.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream_id) {
    SplitMix64 g{master + (stream_id + 1) * 0x9E3779B97F4A7C15ull};
    return g.next();
}

/// Per-node draw stream. Node j's stream depends only on (master seed, j),
/// so adding or removing trace output never shifts anyone's draws.
class NodeRng {
public:
    NodeRng(std::uint64_t master_seed, int node)
        : gen_{substream_seed(master_seed, static_cast<std::uint64_t>(node))} {}

    double next() { return gen_.next_double(); }

private:
    SplitMix64 gen_;
};

} // namespace qac
