#include "relbc/quantum.hpp"

#include <cmath>
#include <stdexcept>

namespace relbc::quantum {

Direction Direction::normalized(double a) {
    if (!std::isfinite(a)) throw std::invalid_argument("Direction: angle must be finite");
    a = std::fmod(a, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return Direction{a};
}

namespace {

// Separation of two directions treated as axes: |a - b| reduced mod pi, then
// folded to [0, pi/2].
double axis_separation(Direction a, Direction b) {
    double d = std::fabs(a.angle - b.angle);
    d = std::fmod(d, kPi);
    return std::min(d, kPi - d);
}

bool near_angle(double value, double target) {
    return std::fabs(value - target) < 1e-9;
}

}  // namespace

bool direction_set_valid(const DirectionSet& ds) {
    return near_angle(axis_separation(ds.x_dir, ds.y_dir), kPi / 2) &&
           near_angle(axis_separation(ds.xp_dir, ds.yp_dir), kPi / 2) &&
           near_angle(axis_separation(ds.x_dir, ds.xp_dir), kPi / 4) &&
           near_angle(axis_separation(ds.y_dir, ds.yp_dir), kPi / 4);
}

DirectionSet canonical_direction_set() {
    // Verified by the 16-convention search: all four settings pairs win the
    // round condition with probability (2+sqrt(2))/4 under this choice.
    DirectionSet ds;
    ds.x_dir = Direction::normalized(0.0);
    ds.y_dir = Direction::normalized(3.0 * kPi / 2.0);
    ds.xp_dir = Direction::normalized(kPi / 4.0);
    ds.yp_dir = Direction::normalized(3.0 * kPi / 4.0);
    ds.outcome_flip_unveiler = false;
    return ds;
}

std::array<double, 4> singlet_joint_distribution(Direction theta_a, Direction theta_b) {
    const double c = std::cos(theta_a.angle - theta_b.angle);
    const double same = (1.0 - c) / 4.0;  // each of (0,0), (1,1)
    const double diff = (1.0 + c) / 4.0;  // each of (0,1), (1,0)
    return {same, diff, diff, same};
}

Direction direction_for_bit(const DirectionSet& ds, Role role, int program_bit) {
    if (program_bit != 0 && program_bit != 1) {
        throw std::invalid_argument("direction_for_bit: program_bit must be 0 or 1");
    }
    if (role == Role::Committer) return program_bit ? ds.x_dir : ds.y_dir;
    return program_bit ? ds.xp_dir : ds.yp_dir;
}

double honest_round_win_probability(const DirectionSet& ds) {
    if (!direction_set_valid(ds)) {
        throw std::invalid_argument("honest_round_win_probability: invalid direction set");
    }
    double total = 0.0;
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            const auto joint = singlet_joint_distribution(
                direction_for_bit(ds, Role::Committer, x),
                direction_for_bit(ds, Role::Unveiler, y));
            double win = 0.0;
            for (int t = 0; t < 2; ++t) {
                for (int s = 0; s < 2; ++s) {
                    const int reported = ds.outcome_flip_unveiler ? (s ^ 1) : s;
                    if (chsh_round_win(x, y, t, reported)) win += joint[(t << 1) | s];
                }
            }
            total += win;
        }
    }
    return total / 4.0;
}

// ---------------------------------------------------------------------------

bool RulePredicate::matches(const DeviceContext& ctx) const {
    if (near_point) {
        if (geometry::spatial_distance(*near_point, ctx.location) > near_radius) return false;
    }
    if (setting_is && ctx.setting_bit != *setting_is) return false;
    if (memory_is && ctx.memory != *memory_is) return false;
    return true;
}

namespace {

int inferred_x(const DeviceContext& ctx) {
    // A block-(x XOR i) device handed setting bit L^i_j can recover x when
    // L^0 is public: i = 0 iff the setting equals the public bit.
    if (ctx.block_size <= 0 || ctx.l0_bit < 0 || ctx.setting_bit < 0) return 0;
    const int block = ctx.pair_index / ctx.block_size;
    const int i = (ctx.setting_bit == ctx.l0_bit) ? 0 : 1;
    return (block ^ i) & 1;
}

int decode_memory_bit(std::int64_t memory) {
    return memory > 0 ? static_cast<int>((memory - 1) & 1) : 0;
}

}  // namespace

EntangledRegistry::EntangledRegistry(std::size_t pair_count, std::uint64_t seed)
    : pairs_(pair_count) {
    for (std::size_t k = 0; k < pair_count; ++k) {
        pairs_[k].shared_rand = rng::derive(seed, rng::kDeviceShared, k);
    }
}

EntangledRegistry::PairState& EntangledRegistry::at(std::size_t pair_index) {
    if (pair_index >= pairs_.size()) {
        throw std::out_of_range("EntangledRegistry: pair index out of range");
    }
    return pairs_[pair_index];
}

const EntangledRegistry::PairState& EntangledRegistry::at(std::size_t pair_index) const {
    if (pair_index >= pairs_.size()) {
        throw std::out_of_range("EntangledRegistry: pair index out of range");
    }
    return pairs_[pair_index];
}

bool EntangledRegistry::side_consumed(std::size_t pair_index, Side side) const {
    const auto& p = at(pair_index);
    return side == Side::A ? p.consumed_a : p.consumed_b;
}

std::int64_t EntangledRegistry::memory(std::size_t pair_index, Side side) const {
    const auto& p = at(pair_index);
    return side == Side::A ? p.memory_a : p.memory_b;
}

void EntangledRegistry::set_memory(std::size_t pair_index, Side side, std::int64_t value) {
    auto& p = at(pair_index);
    (side == Side::A ? p.memory_a : p.memory_b) = value;
}

std::uint64_t EntangledRegistry::shared_rand(std::size_t pair_index) const {
    return at(pair_index).shared_rand;
}

MeasureResult EntangledRegistry::measure(std::size_t pair_index, Side side,
                                         Direction direction, const DeviceSpec& device,
                                         DeviceContext ctx, SplitMix& rng) {
    auto& p = at(pair_index);
    bool& consumed = (side == Side::A) ? p.consumed_a : p.consumed_b;
    if (consumed) {
        throw std::logic_error("EntangledRegistry::measure: side already consumed");
    }
    consumed = true;

    ctx.pair_index = static_cast<int>(pair_index);
    ctx.side = side;
    ctx.shared_rand = p.shared_rand;
    std::int64_t& memory = (side == Side::A) ? p.memory_a : p.memory_b;
    ctx.memory = memory;

    if (device.kind == DeviceKind::Malicious) {
        for (const auto& rule : device.program.rules) {
            if (!rule.when.matches(ctx)) continue;
            switch (rule.memory) {
                case MemoryExpr::Keep: break;
                case MemoryExpr::Clear: memory = 0; break;
                case MemoryExpr::StoreSetting:
                    memory = 1 + (ctx.setting_bit > 0 ? 1 : 0);
                    break;
                case MemoryExpr::StoreInferredX: memory = 1 + inferred_x(ctx); break;
            }
            std::optional<MeasureResult> forced;
            switch (rule.output) {
                case OutputExpr::Honest: break;  // fall through to sampling below
                case OutputExpr::Zero: forced = MeasureResult{0, false}; break;
                case OutputExpr::One: forced = MeasureResult{1, false}; break;
                case OutputExpr::Setting:
                    forced = MeasureResult{ctx.setting_bit > 0 ? 1 : 0, false};
                    break;
                case OutputExpr::Memory:
                    forced = MeasureResult{decode_memory_bit(ctx.memory), false};
                    break;
                case OutputExpr::SharedBit:
                    forced = MeasureResult{static_cast<int>(p.shared_rand & 1ULL), false};
                    break;
                case OutputExpr::InferredX: forced = MeasureResult{inferred_x(ctx), false}; break;
            }
            if (forced) return *forced;
            break;  // first matching rule decides; Honest falls through
        }
    }

    if (device.delta > 0.0 && rng.unit() < device.delta) {
        // Noise event: loss or an uncorrelated fair coin; the pair itself is
        // left untouched (the partner's marginal is uniform either way).
        if (rng.unit() < device.loss_fraction) return {0, true};
        return {rng.bit(), false};
    }
    if (!p.collapsed) {
        p.collapsed = true;
        p.collapsed_side = side;
        p.collapsed_angle = direction.angle;
        p.collapsed_outcome = rng.bit();  // uniform marginal
        return {p.collapsed_outcome, false};
    }
    if (p.collapsed_side == side) {
        // Partner invocation was malicious/noise; this honest re-query of the
        // same side cannot happen (consumed flag), so the collapse belongs to
        // the partner side.
        throw std::logic_error("EntangledRegistry::measure: inconsistent collapse state");
    }
    // Conditional sample given the already-fixed partner outcome.
    const Direction a = (side == Side::A) ? direction : Direction{p.collapsed_angle};
    const Direction b = (side == Side::A) ? Direction{p.collapsed_angle} : direction;
    const auto joint = singlet_joint_distribution(a, b);
    const int partner = p.collapsed_outcome;
    double p_this0;
    if (side == Side::A) {
        p_this0 = joint[(0 << 1) | partner] / (joint[(0 << 1) | partner] + joint[(1 << 1) | partner]);
    } else {
        p_this0 = joint[(partner << 1) | 0] / (joint[(partner << 1) | 0] + joint[(partner << 1) | 1]);
    }
    return {rng.unit() < p_this0 ? 0 : 1, false};
}

}  // namespace relbc::quantum
