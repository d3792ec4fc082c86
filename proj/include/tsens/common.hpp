#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace tsens {

/// Error type thrown by every module for contract violations and bad input.
struct TsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic uniform RNG. The mapping from engine output to doubles is
/// done by hand because std::uniform_real_distribution is
/// implementation-defined and would break cross-toolchain reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::mt19937_64 engine_;
};

/// Seed fan-out scheme: stream id = phase<<32 | kind_id<<16 | restart, mixed
/// with the master seed through splitmix64. Streams are keyed by trainer kind
/// rather than list position, so adding or reordering trainers does not
/// perturb the seeds of the others.
inline std::uint64_t job_seed(std::uint64_t master, std::uint64_t phase,
                              std::uint64_t kind_id, std::uint64_t restart) {
    const std::uint64_t stream = (phase << 32) | (kind_id << 16) | restart;
    return splitmix64(master ^ splitmix64(stream));
}

} // namespace tsens
