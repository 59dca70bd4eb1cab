#include "relbc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relbc::geometry {

bool is_finite(const SpacetimePoint& p) {
    return std::isfinite(p.t) && std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

double interval_squared(const SpacetimePoint& p, const SpacetimePoint& q) {
    const double dt = q.t - p.t;
    const double dx = q.x - p.x;
    const double dy = q.y - p.y;
    const double dz = q.z - p.z;
    return dt * dt - dx * dx - dy * dy - dz * dz;
}

double spatial_distance(const SpacetimePoint& p, const SpacetimePoint& q) {
    const double dx = q.x - p.x;
    const double dy = q.y - p.y;
    const double dz = q.z - p.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

CausalRelation causal_relation(const SpacetimePoint& p, const SpacetimePoint& q) {
    if (p == q) return CausalRelation::Coincident;
    const double s2 = interval_squared(p, q);
    const double dt = q.t - p.t;
    if (std::fabs(s2) <= kLightlikeTolerance) {
        // A pair with dt == 0 cannot sit on a light cone; treat the tolerance
        // hit as the spacelike micro-separation it really is.
        if (dt > 0.0) return CausalRelation::LightlikeFuture;
        if (dt < 0.0) return CausalRelation::LightlikePast;
        return CausalRelation::Spacelike;
    }
    if (s2 > 0.0) return dt > 0.0 ? CausalRelation::TimelikeFuture : CausalRelation::TimelikePast;
    return CausalRelation::Spacelike;
}

LayoutCheck validate_layout(const ProtocolLayout& layout) {
    LayoutCheck check;
    auto fail = [&check](std::string msg) {
        check.ok = false;
        check.violations.push_back(std::move(msg));
    };

    if (!is_finite(layout.commit_point)) fail("commit point has non-finite coordinates");
    for (int i = 0; i < 2; ++i) {
        if (!is_finite(layout.unveil_points[i]))
            fail("unveil point Q" + std::to_string(i) + " has non-finite coordinates");
    }
    if (!check.ok) return check;

    for (int i = 0; i < 2; ++i) {
        const auto rel = causal_relation(layout.commit_point, layout.unveil_points[i]);
        if (rel != CausalRelation::Spacelike) {
            fail("unveil point Q" + std::to_string(i) + " is not spacelike separated from P");
        }
        if (!(layout.unveil_points[i].t > layout.commit_point.t)) {
            fail("unveil point Q" + std::to_string(i) +
                 " does not lie at a strictly later frame time than P");
        }
    }
    const auto rel01 = causal_relation(layout.unveil_points[0], layout.unveil_points[1]);
    if (rel01 != CausalRelation::Spacelike) {
        fail("unveil points Q0 and Q1 are not spacelike separated");
    }
    return check;
}

SpacetimePoint earliest_joint_reception(const SpacetimePoint& p, const SpacetimePoint& q) {
    if (!is_finite(p) || !is_finite(q)) {
        throw std::invalid_argument("earliest_joint_reception: non-finite input point");
    }
    const double d = spatial_distance(p, q);
    if (d == 0.0) {
        SpacetimePoint r = p;
        r.t = std::max(p.t, q.t);
        return r;
    }
    // Along the segment p.xyz -> q.xyz parametrised by s in [0,1], light from
    // p arrives at time p.t + s*d and light from q at q.t + (1-s)*d. The
    // max of the two is minimised where they cross; clamping handles the
    // degenerate (causally ordered) cases.
    double s = ((q.t - p.t) + d) / (2.0 * d);
    s = std::clamp(s, 0.0, 1.0);
    SpacetimePoint r;
    r.x = p.x + s * (q.x - p.x);
    r.y = p.y + s * (q.y - p.y);
    r.z = p.z + s * (q.z - p.z);
    r.t = std::max(p.t + s * d, q.t + (1.0 - s) * d);
    return r;
}

SpacetimePoint earliest_joint_reception(const ProtocolLayout& layout, int i) {
    if (i != 0 && i != 1) {
        throw std::invalid_argument("earliest_joint_reception: unveil index must be 0 or 1");
    }
    return earliest_joint_reception(layout.commit_point, layout.unveil_points[i]);
}

SpacetimePoint lorentz_boost_x(const SpacetimePoint& p, double v) {
    if (!(std::fabs(v) < 1.0)) {
        throw std::invalid_argument("lorentz_boost_x: |v| must be < 1");
    }
    const double gamma = 1.0 / std::sqrt(1.0 - v * v);
    SpacetimePoint r = p;
    r.t = gamma * (p.t - v * p.x);
    r.x = gamma * (p.x - v * p.t);
    return r;
}

}  // namespace relbc::geometry
