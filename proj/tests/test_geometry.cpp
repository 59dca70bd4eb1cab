#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "relbc/geometry.hpp"

namespace geo = relbc::geometry;
using geo::CausalRelation;
using geo::SpacetimePoint;

namespace {

SpacetimePoint pt(double t, double x, double y = 0.0, double z = 0.0) {
    return SpacetimePoint{t, x, y, z};
}

SpacetimePoint random_point(std::mt19937_64& eng, double span = 5.0) {
    std::uniform_real_distribution<double> coord(-span, span);
    return pt(coord(eng), coord(eng), coord(eng), coord(eng));
}

// Brute-force reference for earliest_joint_reception: scan the straight
// segment between the spatial positions and minimize the later of the two
// light-arrival times.
SpacetimePoint grid_joint_reception(const SpacetimePoint& p, const SpacetimePoint& q) {
    const double d = geo::spatial_distance(p, q);
    double best_time = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    const int steps = 2'000'000;
    for (int k = 0; k <= steps; ++k) {
        const double s = static_cast<double>(k) / steps;
        const double arrival = std::max(p.t + s * d, q.t + (1.0 - s) * d);
        if (arrival < best_time) {
            best_time = arrival;
            best_s = s;
        }
    }
    SpacetimePoint r;
    r.t = best_time;
    r.x = p.x + best_s * (q.x - p.x);
    r.y = p.y + best_s * (q.y - p.y);
    r.z = p.z + best_s * (q.z - p.z);
    return r;
}

}  // namespace

TEST_CASE("interval squared") {
    CHECK(geo::interval_squared(pt(0, 0), pt(0, 0)) == 0.0);
    // Lightlike: unit time, unit space.
    CHECK(geo::interval_squared(pt(0, 0), pt(1, 0, 0, 1)) == 0.0);
    // Time separation 1, spatial separation 2.
    CHECK(geo::interval_squared(pt(0, 0), pt(1, 2)) == doctest::Approx(-3.0));
    // Symmetric in its arguments.
    std::mt19937_64 eng(1);
    for (int i = 0; i < 100; ++i) {
        const auto p = random_point(eng);
        const auto q = random_point(eng);
        CHECK(geo::interval_squared(p, q) == doctest::Approx(geo::interval_squared(q, p)));
    }
}

TEST_CASE("causal classification") {
    CHECK(geo::causal_relation(pt(0, 0), pt(0, 0)) == CausalRelation::Coincident);
    CHECK(geo::causal_relation(pt(0, 0), pt(1, 3)) == CausalRelation::Spacelike);
    CHECK(geo::causal_relation(pt(0, 0), pt(2, 0)) == CausalRelation::TimelikeFuture);
    CHECK(geo::causal_relation(pt(0, 0), pt(-2, 0)) == CausalRelation::TimelikePast);
    CHECK(geo::causal_relation(pt(0, 0), pt(1, 1)) == CausalRelation::LightlikeFuture);
    CHECK(geo::causal_relation(pt(0, 0), pt(-1, 1)) == CausalRelation::LightlikePast);
}

TEST_CASE("causal relation antisymmetry on random pairs") {
    std::mt19937_64 eng(2);
    auto inverse = [](CausalRelation r) {
        switch (r) {
            case CausalRelation::TimelikeFuture: return CausalRelation::TimelikePast;
            case CausalRelation::TimelikePast: return CausalRelation::TimelikeFuture;
            case CausalRelation::LightlikeFuture: return CausalRelation::LightlikePast;
            case CausalRelation::LightlikePast: return CausalRelation::LightlikeFuture;
            default: return r;
        }
    };
    for (int i = 0; i < 500; ++i) {
        const auto p = random_point(eng);
        const auto q = random_point(eng);
        CHECK(geo::causal_relation(q, p) == inverse(geo::causal_relation(p, q)));
    }
}

TEST_CASE("lightlike tolerance band") {
    // Just inside/outside the exact cone but within tolerance: lightlike.
    CHECK(geo::causal_relation(pt(0, 0), pt(1.0, 1.0 + 1e-12)) == CausalRelation::LightlikeFuture);
    CHECK(geo::causal_relation(pt(0, 0), pt(1.0 + 1e-12, 1.0)) == CausalRelation::LightlikeFuture);
    // Far outside the band: classified by sign.
    CHECK(geo::causal_relation(pt(0, 0), pt(1.0, 1.0 + 1e-3)) == CausalRelation::Spacelike);
    CHECK(geo::causal_relation(pt(0, 0), pt(1.0 + 1e-3, 1.0)) == CausalRelation::TimelikeFuture);
}

TEST_CASE("interval is invariant under x-boosts") {
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> vel(-0.95, 0.95);
    for (int i = 0; i < 300; ++i) {
        const auto p = random_point(eng);
        const auto q = random_point(eng);
        const double v = vel(eng);
        const double before = geo::interval_squared(p, q);
        const double after =
            geo::interval_squared(geo::lorentz_boost_x(p, v), geo::lorentz_boost_x(q, v));
        CHECK(after == doctest::Approx(before).epsilon(1e-9));
    }
    CHECK_THROWS_AS((void)geo::lorentz_boost_x(pt(0, 0), 1.0), std::invalid_argument);
}

TEST_CASE("layout validation") {
    geo::ProtocolLayout ok;
    ok.commit_point = pt(0, 0);
    ok.unveil_points[0] = pt(0.25, -1);
    ok.unveil_points[1] = pt(0.25, 1);
    CHECK(geo::validate_layout(ok).ok);
    CHECK(ok.distance(0) == doctest::Approx(1.0));
    CHECK(ok.distance(1) == doctest::Approx(1.0));

    // Q0 coincident with P: not spacelike.
    auto bad = ok;
    bad.unveil_points[0] = bad.commit_point;
    auto check = geo::validate_layout(bad);
    CHECK_FALSE(check.ok);
    REQUIRE(!check.violations.empty());

    // Fixed-frame positive duration: unveiling strictly later than P.
    bad = ok;
    bad.unveil_points[0] = pt(-0.25, -1);
    CHECK_FALSE(geo::validate_layout(bad).ok);
    bad.unveil_points[0] = pt(0.0, -1);
    CHECK_FALSE(geo::validate_layout(bad).ok);

    // Unveil points must be mutually spacelike.
    bad = ok;
    bad.unveil_points[1] = pt(3.0, -1.5);
    CHECK_FALSE(geo::validate_layout(bad).ok);

    bad = ok;
    bad.unveil_points[0].x = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(geo::validate_layout(bad).ok);
}

TEST_CASE("admissible layouts are pairwise spacelike") {
    std::mt19937_64 eng(4);
    int admissible = 0;
    for (int i = 0; i < 2000; ++i) {
        geo::ProtocolLayout layout;
        layout.commit_point = random_point(eng, 1.0);
        layout.unveil_points[0] = random_point(eng, 3.0);
        layout.unveil_points[1] = random_point(eng, 3.0);
        if (!geo::validate_layout(layout).ok) continue;
        ++admissible;
        CHECK(geo::causal_relation(layout.commit_point, layout.unveil_points[0]) ==
              CausalRelation::Spacelike);
        CHECK(geo::causal_relation(layout.commit_point, layout.unveil_points[1]) ==
              CausalRelation::Spacelike);
        CHECK(geo::causal_relation(layout.unveil_points[0], layout.unveil_points[1]) ==
              CausalRelation::Spacelike);
        CHECK(layout.unveil_points[0].t > layout.commit_point.t);
    }
    CHECK(admissible > 50);  // the sampler actually exercises the positive branch
}

TEST_CASE("earliest joint reception matches a grid-search oracle") {
    // Worked example: P at the origin, Q at spatial distance 1, t = 0.5.
    const auto r = geo::earliest_joint_reception(pt(0, 0), pt(0.5, 1));
    CHECK(r.t == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(r.x == doctest::Approx(0.75).epsilon(1e-12));

    std::mt19937_64 eng(5);
    int checked = 0;
    while (checked < 25) {
        const auto p = random_point(eng, 2.0);
        const auto q = random_point(eng, 2.0);
        if (geo::causal_relation(p, q) != CausalRelation::Spacelike) continue;
        ++checked;
        const auto fast = geo::earliest_joint_reception(p, q);
        const auto slow = grid_joint_reception(p, q);
        CHECK(fast.t == doctest::Approx(slow.t).epsilon(1e-6));
        CHECK(geo::spatial_distance(fast, slow) < 1e-5);
        // The point actually receives light from both emissions.
        CHECK(geo::causally_reachable(p, fast));
        CHECK(geo::causally_reachable(q, fast));
    }
}

TEST_CASE("joint reception degenerate cases") {
    // Q lightlike-future of P: reception at Q itself.
    const auto q = pt(1, 1);
    const auto r = geo::earliest_joint_reception(pt(0, 0), q);
    CHECK(r.t == doctest::Approx(q.t));
    CHECK(r.x == doctest::Approx(q.x));
    // Common spatial position: later emission time wins.
    const auto same = geo::earliest_joint_reception(pt(0.25, 2), pt(1.5, 2));
    CHECK(same.t == doctest::Approx(1.5));
    CHECK(same.x == doctest::Approx(2.0));
    // Timelike order: the later event's own point suffices.
    const auto inside = geo::earliest_joint_reception(pt(0, 0), pt(3, 1));
    CHECK(geo::causally_reachable(pt(0, 0), inside));
    CHECK(geo::causally_reachable(pt(3, 1), inside));
    CHECK_THROWS_AS(
        (void)geo::earliest_joint_reception(pt(std::numeric_limits<double>::infinity(), 0),
                                            pt(0, 0)),
        std::invalid_argument);
}

TEST_CASE("symmetric layouts give mirror-symmetric verdict points") {
    geo::ProtocolLayout layout;
    layout.commit_point = pt(0, 0);
    layout.unveil_points[0] = pt(0.5, -1);
    layout.unveil_points[1] = pt(0.5, 1);
    const auto v0 = geo::earliest_joint_reception(layout, 0);
    const auto v1 = geo::earliest_joint_reception(layout, 1);
    CHECK(v0.t == doctest::Approx(v1.t).epsilon(1e-12));
    CHECK(v0.x == doctest::Approx(-v1.x).epsilon(1e-12));
    CHECK(v0.y == doctest::Approx(v1.y));
    CHECK(v0.z == doctest::Approx(v1.z));
}
