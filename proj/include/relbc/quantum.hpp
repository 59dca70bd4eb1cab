#pragma once

/// Singlet-pair measurement statistics and the untrusted-device abstraction:
/// honest devices sample exact singlet correlations, noisy devices add
/// independent per-round errors/losses, and malicious devices run declarative
/// programs that may read their setting, location, memory and hidden shared
/// randomness.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relbc/geometry.hpp"
#include "relbc/rng.hpp"

namespace relbc::quantum {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Measurement direction in the agreed plane, angle normalized to [0, 2pi).
struct Direction {
    double angle = 0.0;

    static Direction normalized(double a);
};

enum class Role { Committer, Unveiler };
enum class Side { A, B };

/// The four agreed directions plus the outcome-sign convention flag for the
/// unveiler side. Constraints (as axes, i.e. modulo pi): X perpendicular to Y,
/// X' perpendicular to Y', X separated from X' by pi/4, Y from Y' by pi/4.
struct DirectionSet {
    Direction x_dir, y_dir, xp_dir, yp_dir;
    bool outcome_flip_unveiler = false;
};

bool direction_set_valid(const DirectionSet& ds);

/// Fixed convention under which every settings pair (x, y) wins the round
/// condition t XOR s = x AND y with probability (2+sqrt(2))/4. Chosen by
/// exhaustive search over the 16 sign/flip conventions (see tests).
DirectionSet canonical_direction_set();

/// Joint outcome probabilities P(t,s), index (t<<1)|s, for singlet halves
/// measured along theta_a and theta_b: P(t=s) = (1 - cos d)/2 split evenly,
/// P(t != s) = (1 + cos d)/2 split evenly, d = theta_a - theta_b.
/// Outcome bit 0 stands for +1, bit 1 for -1.
std::array<double, 4> singlet_joint_distribution(Direction theta_a, Direction theta_b);

/// Setting-to-direction map: committer bit 1 -> X, 0 -> Y; unveiler bit 1 ->
/// X', 0 -> Y' (the exponent notation (X)^L (Y)^{1-L}).
Direction direction_for_bit(const DirectionSet& ds, Role role, int program_bit);

/// Average over the four settings pairs of P(t XOR s = x AND y) under singlet
/// statistics, applying the unveiler flip convention. Throws on invalid sets.
double honest_round_win_probability(const DirectionSet& ds);

/// Per-round settings-win predicate.
inline bool chsh_round_win(int x, int y, int t, int s) {
    return ((t ^ s) & 1) == (x & y & 1);
}

// ---------------------------------------------------------------------------
// Devices

enum class DeviceKind { HonestSinglet, Malicious };

/// Everything a malicious program may read. l0_bit is the public pre-agreed
/// challenge bit at this device's in-block position (variants where L0 is
/// public knowledge bakeable into hardware), -1 otherwise.
struct DeviceContext {
    int pair_index = 0;    // absolute index in the registry
    int block_size = 0;    // N
    Side side = Side::A;
    int setting_bit = -1;  // protocol-level bit dialed in (-1 if unknown)
    geometry::SpacetimePoint location;
    int l0_bit = -1;
    std::uint64_t shared_rand = 0;  // hidden randomness common to both halves
    std::int64_t memory = 0;        // this half's persistent memory
};

/// Rule predicate; unset fields match anything.
struct RulePredicate {
    std::optional<geometry::SpacetimePoint> near_point;
    double near_radius = 0.0;  // spatial radius for near_point
    std::optional<int> setting_is;
    std::optional<std::int64_t> memory_is;

    bool matches(const DeviceContext& ctx) const;
};

/// What a matched rule outputs and how it updates memory. Memory encoding
/// for recorded bits: 0 = empty, 1 + bit otherwise.
enum class OutputExpr {
    Honest,     // fall through to honest singlet sampling
    Zero,
    One,
    Setting,    // echo the dialed setting bit
    Memory,     // recorded bit, 0 if empty
    SharedBit,  // low bit of the hidden shared randomness
    InferredX,  // block XOR (setting == l0 ? 0 : 1); the memory-attack read
};

enum class MemoryExpr {
    Keep,
    Clear,
    StoreSetting,
    StoreInferredX,
};

struct DeviceRule {
    RulePredicate when;
    OutputExpr output = OutputExpr::Honest;
    MemoryExpr memory = MemoryExpr::Keep;
};

/// First-match rule list; an empty list (or no match) means honest behavior.
struct DeviceProgram {
    std::vector<DeviceRule> rules;
};

/// Device behavior description shared by all devices on one side of a run.
/// delta: combined error/loss rate for honest sampling; loss_fraction: the
/// probability that a noise event is a loss rather than a fair coin flip.
struct DeviceSpec {
    DeviceKind kind = DeviceKind::HonestSinglet;
    double delta = 0.0;
    double loss_fraction = 0.5;
    DeviceProgram program;
};

struct MeasureResult {
    int outcome = 0;
    bool lost = false;
};

/// One CHSH round as scored by the verifier.
struct RoundRecord {
    int setting_committer = 0;  // x
    int setting_unveiler = 0;   // y
    int outcome_committer = 0;  // t
    int outcome_unveiler = 0;   // s
    bool lost = false;
};

/// Lightweight per-device generator (splitmix64); cheap enough to hold one
/// per pair side.
struct SplitMix {
    std::uint64_t state = 0;

    std::uint64_t next() { return rng::mix(state++); }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    int bit() { return static_cast<int>(next() & 1ULL); }
};

/// 2N singlet pairs, each measurable exactly once per side. Honest sampling:
/// the first side measured draws its uniform marginal, the second draws the
/// conditional given the first — exact singlet statistics with no state
/// vectors. Malicious invocations never collapse the pair.
class EntangledRegistry {
  public:
    EntangledRegistry(std::size_t pair_count, std::uint64_t seed);

    std::size_t pair_count() const { return pairs_.size(); }

    bool side_consumed(std::size_t pair_index, Side side) const;
    std::int64_t memory(std::size_t pair_index, Side side) const;
    void set_memory(std::size_t pair_index, Side side, std::int64_t value);
    std::uint64_t shared_rand(std::size_t pair_index) const;

    /// Consume one side of one pair. ctx supplies the program-visible fields
    /// other than shared_rand/memory, which the registry fills in.
    MeasureResult measure(std::size_t pair_index, Side side, Direction direction,
                          const DeviceSpec& device, DeviceContext ctx, SplitMix& rng);

  private:
    struct PairState {
        bool consumed_a = false, consumed_b = false;
        bool collapsed = false;       // an honest measurement fixed one side
        Side collapsed_side = Side::A;
        double collapsed_angle = 0.0;
        int collapsed_outcome = 0;
        std::uint64_t shared_rand = 0;
        std::int64_t memory_a = 0, memory_b = 0;
    };

    PairState& at(std::size_t pair_index);
    const PairState& at(std::size_t pair_index) const;

    std::vector<PairState> pairs_;
};

}  // namespace relbc::quantum
