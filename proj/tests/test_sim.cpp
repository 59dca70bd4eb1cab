#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "relbc/geometry.hpp"
#include "relbc/sim.hpp"

namespace geo = relbc::geometry;
using geo::SpacetimePoint;
using relbc::harness::CausalityFault;
using relbc::harness::EventLoop;
using relbc::harness::Vec3;
using relbc::harness::Worldline;

namespace {

// Independent reception oracle: per worldline region, solve
// |pos(t) - src| = t - t_e in closed form (linear motion gives a quadratic)
// and take the earliest admissible root.
double oracle_reception(const std::vector<std::pair<double, Vec3>>& knots,
                        const SpacetimePoint& e) {
    const Vec3 src{e.x, e.y, e.z};
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](double t, double lo, double hi) {
        if (t >= e.t - 1e-12 && t >= lo - 1e-9 && t <= hi + 1e-9) best = std::min(best, t);
    };
    auto static_candidate = [&](const Vec3& pos, double lo, double hi) {
        consider(e.t + relbc::harness::distance(pos, src), lo, hi);
    };
    static_candidate(knots.front().second, -std::numeric_limits<double>::infinity(),
                     knots.front().first);
    static_candidate(knots.back().second, knots.back().first,
                     std::numeric_limits<double>::infinity());
    for (std::size_t k = 1; k < knots.size(); ++k) {
        const auto [t0, a] = knots[k - 1];
        const auto [t1, b] = knots[k];
        const Vec3 u{(b.x - a.x) / (t1 - t0), (b.y - a.y) / (t1 - t0), (b.z - a.z) / (t1 - t0)};
        const Vec3 m{a.x - u.x * t0 - src.x, a.y - u.y * t0 - src.y, a.z - u.z * t0 - src.z};
        // (|u|^2 - 1) t^2 + 2 (m.u + t_e) t + |m|^2 - t_e^2 = 0
        const double A = u.x * u.x + u.y * u.y + u.z * u.z - 1.0;
        const double B = 2.0 * (m.x * u.x + m.y * u.y + m.z * u.z + e.t);
        const double C = m.x * m.x + m.y * m.y + m.z * m.z - e.t * e.t;
        const double disc = B * B - 4.0 * A * C;
        if (disc < 0.0) continue;
        const double root = std::sqrt(disc);
        consider((-B + root) / (2.0 * A), t0, t1);
        consider((-B - root) / (2.0 * A), t0, t1);
    }
    return best;
}

}  // namespace

TEST_CASE("vector distance") {
    CHECK(relbc::harness::distance({0, 0, 0}, {3, 4, 0}) == doctest::Approx(5.0));
    CHECK(relbc::harness::distance({1, 2, 3}, {1, 2, 3}) == 0.0);
}

TEST_CASE("fixed worldlines never move") {
    const auto w = Worldline::fixed({2, -1, 0.5});
    for (double t : {-10.0, 0.0, 3.75}) {
        const Vec3 p = w.position_at(t);
        CHECK(p.x == 2.0);
        CHECK(p.y == -1.0);
        CHECK(p.z == 0.5);
        const SpacetimePoint sp = w.point_at(t);
        CHECK(sp.t == t);
        CHECK(sp.x == 2.0);
    }
}

TEST_CASE("knot validation") {
    Worldline w;
    w.add_knot(0.0, {0, 0, 0});
    CHECK_THROWS_AS(w.add_knot(0.0, {1, 0, 0}), std::invalid_argument);   // time must increase
    CHECK_THROWS_AS(w.add_knot(-1.0, {1, 0, 0}), std::invalid_argument);  // no going back
    CHECK_THROWS_AS(w.add_knot(1.0, {1, 0, 0}), std::invalid_argument);   // exactly light speed
    CHECK_THROWS_AS(w.add_knot(1.0, {2, 0, 0}), std::invalid_argument);   // superluminal
    CHECK_NOTHROW(w.add_knot(1.0, {0.999, 0, 0}));
    CHECK_THROWS_AS(Worldline{}.position_at(0.0), std::logic_error);
}

TEST_CASE("piecewise linear interpolation") {
    Worldline w;
    w.add_knot(0.0, {0, 0, 0}).add_knot(2.0, {1, 0, 0}).add_knot(4.0, {1, 1, 0});
    CHECK(w.position_at(-5.0).x == 0.0);  // static before the first knot
    CHECK(w.position_at(1.0).x == doctest::Approx(0.5));
    CHECK(w.position_at(2.0).x == doctest::Approx(1.0));
    CHECK(w.position_at(3.0).x == doctest::Approx(1.0));
    CHECK(w.position_at(3.0).y == doctest::Approx(0.5));
    CHECK(w.position_at(9.0).y == 1.0);  // static after the last knot
}

TEST_CASE("reception time for static agents") {
    const auto w = Worldline::fixed({3, 4, 0});
    // Light-travel delay is exactly the spatial distance.
    CHECK(w.reception_time({1.0, 0, 0, 0}) == doctest::Approx(6.0).epsilon(1e-12));
    // Emission at the agent's own position arrives immediately.
    CHECK(w.reception_time({2.5, 3, 4, 0}) == 2.5);
}

TEST_CASE("reception matches the closed-form oracle on random worldlines") {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    std::uniform_real_distribution<double> hop(0.2, 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 400; ++trial) {
        std::vector<std::pair<double, Vec3>> knots;
        double t = coord(eng);
        Vec3 pos{coord(eng), coord(eng), coord(eng)};
        Worldline w;
        const int segments = 1 + static_cast<int>(unit(eng) * 4);
        knots.emplace_back(t, pos);
        w.add_knot(t, pos);
        for (int k = 0; k < segments; ++k) {
            const double dt = hop(eng);
            // Pick a displacement with speed at most 0.9.
            const double speed = 0.9 * unit(eng);
            const double theta = 2.0 * M_PI * unit(eng);
            const double zc = 2.0 * unit(eng) - 1.0;
            const double rho = std::sqrt(1.0 - zc * zc);
            pos = Vec3{pos.x + speed * dt * rho * std::cos(theta),
                       pos.y + speed * dt * rho * std::sin(theta), pos.z + speed * dt * zc};
            t += dt;
            knots.emplace_back(t, pos);
            w.add_knot(t, pos);
        }
        const SpacetimePoint e{coord(eng), coord(eng), coord(eng), coord(eng)};
        const double fast = w.reception_time(e);
        const double slow = oracle_reception(knots, e);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
        CHECK(fast >= e.t);
        // The reception event sits on (or within rounding of) the light cone,
        // unless the agent was already inside it at emission time.
        const double lag0 = relbc::harness::distance(w.position_at(e.t), {e.x, e.y, e.z});
        if (lag0 > 1e-9) {
            const SpacetimePoint rx = w.point_at(fast);
            CHECK(std::fabs(geo::interval_squared(e, rx)) < 1e-6);
        }
    }
}

TEST_CASE("courier outruns the wavefront until it stops") {
    // An agent leaves the origin region at 0.9c and parks at x = -1 at t = 0.5.
    const double depart = 0.5 - 1.0 / 0.9;
    Worldline w;
    w.add_knot(depart, {0, 0, 0}).add_knot(0.5, {-1, 0, 0});
    // Light emitted at the origin at t = 0 only catches it after it stops.
    CHECK(w.reception_time({0.0, 0, 0, 0}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("event loop ordering and tie-breaks") {
    EventLoop loop;
    std::vector<std::string> log;
    std::vector<double> times;
    loop.schedule(1.0, 2, [&] { log.push_back("c"); });
    loop.schedule(-3.5, 7, [&] {
        log.push_back("a");
        times.push_back(loop.now());
    });
    loop.schedule(1.0, 1, [&] { log.push_back("b"); });
    loop.schedule(1.0, 2, [&] { log.push_back("d"); });  // same slot: insertion order
    loop.run();
    CHECK(log == std::vector<std::string>{"a", "b", "c", "d"});
    REQUIRE(times.size() == 1);
    CHECK(times[0] == -3.5);
    CHECK(loop.now() == 1.0);
}

TEST_CASE("actions can extend the schedule") {
    EventLoop loop;
    std::vector<int> order;
    loop.schedule(0.0, 0, [&] {
        order.push_back(0);
        loop.schedule(2.0, 0, [&] { order.push_back(2); });
        loop.schedule(1.0, 0, [&] { order.push_back(1); });
    });
    loop.run();
    CHECK(order == std::vector<int>{0, 1, 2});
}

TEST_CASE("scheduling into the past is rejected") {
    EventLoop loop;
    bool threw = false;
    loop.schedule(5.0, 0, [&] {
        try {
            loop.schedule(4.0, 0, [] {});
        } catch (const std::logic_error&) {
            threw = true;
        }
    });
    loop.run();
    CHECK(threw);
    CHECK_THROWS_AS(loop.schedule(std::numeric_limits<double>::quiet_NaN(), 0, [] {}),
                    std::invalid_argument);
}

TEST_CASE("delivery demands causal reachability") {
    const SpacetimePoint from{0, 0, 0, 0};
    CHECK_NOTHROW((void)relbc::harness::deliver(from, SpacetimePoint{2, 1, 0, 0}));  // timelike
    CHECK_NOTHROW((void)relbc::harness::deliver(from, SpacetimePoint{1, 1, 0, 0}));  // lightlike
    CHECK_NOTHROW((void)relbc::harness::deliver(from, from));                        // same event
    CHECK_THROWS_AS((void)relbc::harness::deliver(from, SpacetimePoint{1, 3, 0, 0}),
                    CausalityFault);  // spacelike
    CHECK_THROWS_AS((void)relbc::harness::deliver(from, SpacetimePoint{-1, 0, 0, 0}),
                    CausalityFault);  // past
}

TEST_CASE("joint reception points are reachable by static verifiers") {
    geo::ProtocolLayout layout;
    layout.commit_point = {0, 0, 0, 0};
    layout.unveil_points[0] = {0.5, -1, 0, 0};
    layout.unveil_points[1] = {0.5, 1, 0, 0};
    REQUIRE(geo::validate_layout(layout).ok);
    for (int i : {0, 1}) {
        const auto v = geo::earliest_joint_reception(layout, i);
        const auto verifier = Worldline::fixed({v.x, v.y, v.z});
        // Light from both emission sites arrives exactly at the verdict time.
        CHECK(verifier.reception_time(layout.commit_point) ==
              doctest::Approx(v.t).epsilon(1e-12));
        CHECK(verifier.reception_time(layout.unveil_points[i]) ==
              doctest::Approx(v.t).epsilon(1e-12));
        CHECK_NOTHROW((void)relbc::harness::deliver(layout.commit_point, v));
        CHECK_NOTHROW((void)relbc::harness::deliver(layout.unveil_points[i], v));
    }
}
