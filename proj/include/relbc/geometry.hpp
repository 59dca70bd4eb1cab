#pragma once

/// Minkowski geometry in a single agreed inertial frame, natural units c = 1.
/// Signature (+,-,-,-): interval_squared > 0 is timelike, < 0 spacelike.

#include <array>
#include <string>
#include <vector>

namespace relbc::geometry {

inline constexpr double kLightlikeTolerance = 1e-9;

struct SpacetimePoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const SpacetimePoint&) const = default;
};

enum class CausalRelation {
    TimelikeFuture,   // q inside the future light cone of p
    TimelikePast,     // q inside the past light cone of p
    LightlikeFuture,  // q on the future cone boundary of p
    LightlikePast,    // q on the past cone boundary of p
    Spacelike,        // no causal order
    Coincident,       // p == q exactly
};

bool is_finite(const SpacetimePoint& p);

/// dt^2 - dx^2 - dy^2 - dz^2 for the displacement p -> q.
double interval_squared(const SpacetimePoint& p, const SpacetimePoint& q);

/// Euclidean spatial separation |q.xyz - p.xyz|.
double spatial_distance(const SpacetimePoint& p, const SpacetimePoint& q);

/// Classify q relative to p. Lightlike classification uses an absolute
/// tolerance on the squared interval; exact equality wins over tolerance.
CausalRelation causal_relation(const SpacetimePoint& p, const SpacetimePoint& q);

inline bool causally_reachable(const SpacetimePoint& from, const SpacetimePoint& to) {
    auto r = causal_relation(from, to);
    return r == CausalRelation::TimelikeFuture || r == CausalRelation::LightlikeFuture ||
           r == CausalRelation::Coincident;
}

/// Commitment arena: the commit point P and the two unveiling points Q_0, Q_1.
struct ProtocolLayout {
    SpacetimePoint commit_point;                  // P
    std::array<SpacetimePoint, 2> unveil_points;  // Q_0, Q_1

    /// Spatial separation d between P and Q_i. Recorded for reporting; no
    /// protocol rule depends on it quantitatively.
    double distance(int i) const { return spatial_distance(commit_point, unveil_points.at(i & 1)); }
};

struct LayoutCheck {
    bool ok = true;
    std::vector<std::string> violations;
};

/// A layout is admissible when P, Q_0, Q_1 are pairwise spacelike separated
/// and both unveiling points lie at a strictly later frame time than P (the
/// fixed-frame positive-duration condition). All coordinates must be finite.
LayoutCheck validate_layout(const ProtocolLayout& layout);

/// Earliest spacetime point on the straight segment P -> Q_i whose causal
/// future contains (weakly) both endpoints' forward cones' data, i.e. the
/// earliest point at which messages emitted at P and at Q_i can both have
/// arrived. Degenerate cases: if Q_i is lightlike-future of P the answer is
/// Q_i itself; if both share a spatial position it is that position at the
/// later emission time. Throws std::invalid_argument on non-finite input.
SpacetimePoint earliest_joint_reception(const ProtocolLayout& layout, int i);

/// Same computation for an arbitrary pair of emission events.
SpacetimePoint earliest_joint_reception(const SpacetimePoint& p, const SpacetimePoint& q);

/// Boost along +x with velocity v (|v| < 1). Pure coordinate change; used to
/// check frame invariance of causal classifications.
SpacetimePoint lorentz_boost_x(const SpacetimePoint& p, double v);

}  // namespace relbc::geometry
