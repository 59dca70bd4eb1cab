#include "relbc/sim.hpp"

#include <cmath>

namespace relbc::harness {

double distance(const Vec3& a, const Vec3& b) {
    const double dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Worldline Worldline::fixed(const Vec3& position) {
    Worldline w;
    w.knots_.push_back({0.0, position});
    return w;
}

Worldline& Worldline::add_knot(double t, const Vec3& position) {
    if (!knots_.empty()) {
        const auto& last = knots_.back();
        if (t <= last.t) {
            throw std::invalid_argument("Worldline: knot times must increase");
        }
        const double v = distance(last.pos, position) / (t - last.t);
        if (v >= 1.0) {
            throw std::invalid_argument("Worldline: segment at or above light speed");
        }
    }
    knots_.push_back({t, position});
    return *this;
}

Vec3 Worldline::position_at(double t) const {
    if (knots_.empty()) throw std::logic_error("Worldline: empty");
    if (t <= knots_.front().t) return knots_.front().pos;
    for (std::size_t k = 1; k < knots_.size(); ++k) {
        if (t <= knots_[k].t) {
            const auto& p = knots_[k - 1];
            const auto& q = knots_[k];
            const double s = (t - p.t) / (q.t - p.t);
            return {p.pos.x + s * (q.pos.x - p.pos.x), p.pos.y + s * (q.pos.y - p.pos.y),
                    p.pos.z + s * (q.pos.z - p.pos.z)};
        }
    }
    return knots_.back().pos;
}

geometry::SpacetimePoint Worldline::point_at(double t) const {
    const Vec3 p = position_at(t);
    return {t, p.x, p.y, p.z};
}

double Worldline::reception_time(const geometry::SpacetimePoint& emission) const {
    // f(t) = |pos(t) - x_e| - (t - t_e) is strictly decreasing (speeds < 1),
    // so the reception time is its unique root at or after t_e.
    const Vec3 src = spatial(emission);
    auto lag = [&](double t) { return distance(position_at(t), src) - (t - emission.t); };
    if (lag(emission.t) <= 0.0) return emission.t;  // co-located (or past-lit) already

    double lo = emission.t;
    double hi = emission.t + 1.0;
    while (lag(hi) > 0.0) {
        lo = hi;
        hi = emission.t + 2.0 * (hi - emission.t);
        if (hi - emission.t > 1e15) {
            throw std::logic_error("Worldline::reception_time: no reception found");
        }
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (lag(mid) > 0.0 ? lo : hi) = mid;
    }
    return hi;
}

void EventLoop::schedule(double time, int agent_order, std::function<void()> action) {
    if (!std::isfinite(time)) throw std::invalid_argument("EventLoop: non-finite time");
    if (time < now_) throw std::logic_error("EventLoop: scheduling into the past");
    queue_.push(ScheduledEvent{time, agent_order, next_sequence_++, std::move(action)});
}

void EventLoop::run() {
    while (!queue_.empty()) {
        // No const-ref pop: the action may schedule, invalidating top().
        ScheduledEvent ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        ev.action();
    }
}

geometry::SpacetimePoint deliver(const geometry::SpacetimePoint& from,
                                 const geometry::SpacetimePoint& to_agent_at) {
    if (!geometry::causally_reachable(from, to_agent_at)) {
        throw CausalityFault("message demanded outside the causal future of its emission");
    }
    return to_agent_at;
}

}  // namespace relbc::harness
