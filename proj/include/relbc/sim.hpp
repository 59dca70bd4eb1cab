#pragma once

/// Deterministic discrete-event core: piecewise-linear agent worldlines with
/// sub-light speeds, light-speed message delivery, and a single-threaded
/// event loop with a fixed tie-break order. Simulated time is continuous.

#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "relbc/geometry.hpp"

namespace relbc::harness {

/// Raised when protocol logic demands a reception at a point outside the
/// causal future of the emission. A test assertion, never silently ignored.
struct CausalityFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 spatial(const geometry::SpacetimePoint& p) { return {p.x, p.y, p.z}; }
double distance(const Vec3& a, const Vec3& b);

/// Piecewise-linear trajectory. Static before the first knot and after the
/// last; each segment must move strictly slower than light.
class Worldline {
  public:
    static Worldline fixed(const Vec3& position);

    /// Knots must be appended in strictly increasing time order.
    Worldline& add_knot(double t, const Vec3& position);

    Vec3 position_at(double t) const;
    geometry::SpacetimePoint point_at(double t) const;

    /// Earliest reception time on this worldline of a light-speed signal
    /// emitted at `emission` (never earlier than the emission itself).
    double reception_time(const geometry::SpacetimePoint& emission) const;

  private:
    struct Knot {
        double t;
        Vec3 pos;
    };
    std::vector<Knot> knots_;
};

/// One pending action. Execution order: (time, agent_order, sequence).
struct ScheduledEvent {
    double time = 0.0;
    int agent_order = 0;  // deterministic per-agent tie-break rank
    std::int64_t sequence = 0;
    std::function<void()> action;
};

class EventLoop {
  public:
    void schedule(double time, int agent_order, std::function<void()> action);
    /// Drain the queue. Actions may schedule further events.
    void run();
    double now() const { return now_; }

  private:
    struct Later {
        bool operator()(const ScheduledEvent& a, const ScheduledEvent& b) const {
            if (a.time != b.time) return a.time > b.time;
            if (a.agent_order != b.agent_order) return a.agent_order > b.agent_order;
            return a.sequence > b.sequence;
        }
    };
    std::priority_queue<ScheduledEvent, std::vector<ScheduledEvent>, Later> queue_;
    std::int64_t next_sequence_ = 0;
    double now_ = -std::numeric_limits<double>::infinity();
};

/// Reception point for a message demanded at a fixed target point: the
/// target must lie in the (weak) causal future of the emission.
/// Throws CausalityFault otherwise.
geometry::SpacetimePoint deliver(const geometry::SpacetimePoint& from,
                                 const geometry::SpacetimePoint& to_agent_at);

}  // namespace relbc::harness
