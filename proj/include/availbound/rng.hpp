#pragma once

#include <cstdint>
#include <random>

namespace availbound {

// Stream domains keep independent parts of a run (trajectories, coupling
// runs, audits...) on non-overlapping substreams of one root seed.
namespace rngdom {
inline constexpr std::uint64_t simulate = 0x01;
inline constexpr std::uint64_t stationary = 0x02;
inline constexpr std::uint64_t couple = 0x03;
inline constexpr std::uint64_t pair_draw = 0x04;
inline constexpr std::uint64_t audit = 0x05;
inline constexpr std::uint64_t test = 0x7f;
} // namespace rngdom

// Deterministic uniform source. Uniforms are produced from the raw engine
// output (not std::uniform_real_distribution) so that sequences are
// identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Independent substream addressed by (domain, index), derived from the
    // root seed. Workers can be sharded across threads without coordination;
    // results depend only on the index, never on scheduling.
    static Rng stream(std::uint64_t root_seed, std::uint64_t domain, std::uint64_t index) {
        std::uint64_t s = splitmix(root_seed);
        s = splitmix(s ^ domain);
        s = splitmix(s ^ index);
        return Rng(s);
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0,1) with 53 random bits; never returns 1.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
};

} // namespace availbound
