#pragma once

#include <cstdint>
#include <random>

namespace relbc::rng {

// Stateless 64-bit mixer (splitmix64 finalizer). Used to derive independent
// substream seeds from a master seed so that every sub-result is reproducible
// regardless of execution order or parallelism.
inline std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed derivation tree:
//   trial seed   = derive(master, kTrial, trial_index)
//   role streams = derive(trial_seed, <tag>, index)
// Each derived seed feeds one std::mt19937_64.
enum StreamTag : std::uint64_t {
    kTrial = 1,
    kProtocol = 2,      // A_c's draws: x, decline padding
    kChallenge = 3,     // B_c's draws: L, subset J
    kBobStrings = 4,    // B_0/B_1 draws: L^i (CHSH2/CHSH3)
    kDeviceShared = 5,  // per-pair hidden shared randomness
    kDeviceNoise = 6,   // per-measurement noise events
    kAliceStrings = 7,  // RCCBC S^0, S^1
    kAnalysis = 8,      // bootstrap etc.
    kPreAgreed = 9,     // publicly pre-agreed strings (L^0 when not configured)
    kDualRun = 10,      // sub-seeds for the two halves of a dual run
};

inline std::uint64_t derive(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0) noexcept {
    return mix(seed ^ mix(static_cast<std::uint64_t>(tag) * 0xD6E8FEB86659FD93ULL + index));
}

inline std::mt19937_64 make_engine(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0) {
    return std::mt19937_64(derive(seed, tag, index));
}

inline int uniform_bit(std::mt19937_64& eng) {
    return static_cast<int>(eng() & 1ULL);
}

// Uniform real in [0,1) with 53-bit resolution.
inline double uniform_unit(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace relbc::rng
