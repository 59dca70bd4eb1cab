#pragma once

/// Scenario layer on top of the protocol runs: named honest/attack setups,
/// seeded multi-trial execution with aggregate statistics, the histogram
/// hiding-advantage estimator, and the static transcript audit.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relbc/adversary.hpp"
#include "relbc/protocols.hpp"
#include "relbc/quantum.hpp"
#include "relbc/sim.hpp"

namespace relbc::harness {

enum class Flow {
    Single,       // one protocol instance per trial
    Dual,         // two-run decline wrapper per trial
    MemoryReuse,  // two chained instances; run 2 inherits run 1 device memory
};

/// What Alice and her agents do. When a strategy is set the devices are
/// bypassed entirely (classical cheating).
struct AliceBehavior {
    std::optional<int> commit_bit = 0;  // nullopt = decline
    bool unveil0 = true;
    bool unveil1 = true;
    bool invoke_without_unveil = false;
    std::optional<adversary::ReducedStrategy> chsh_strategy;
    std::optional<adversary::RccbcStrategy> rccbc_strategy;
};

struct Scenario {
    std::string name;
    protocols::ProtocolConfig config;
    Flow flow = Flow::Single;
    AliceBehavior alice;
    /// Overrides for Alice's untrusted hardware; unset = honest at config
    /// noise.
    std::optional<quantum::DeviceSpec> a_side_override;
    std::optional<quantum::DeviceSpec> b_side_override;
    /// MemoryReuse only: run-1 agents feed challenges into the devices even
    /// though they never unveil (the unsafe, uncoordinated mode) when false.
    bool coordinated = true;
    unsigned repeat = 1;
    /// Draw the committed bit fresh per trial (used for hiding estimates);
    /// otherwise alice.commit_bit applies to every trial.
    bool randomize_commit_bit = false;
    /// Dual flow only: flip a per-trial coin between committing (to a fresh
    /// random bit) and declining; the hiding label becomes commit-vs-decline.
    bool randomize_decline = false;
};

struct HidingEstimate {
    double advantage = 0.0;  // in [0, 1/2]
    double std_error = 0.0;  // bootstrap
    std::array<std::size_t, 2> samples{0, 0};
};

struct ScenarioStats {
    unsigned trials = 0;
    std::array<unsigned, 2> accepted{0, 0};
    std::array<unsigned, 2> rejected{0, 0};
    std::array<unsigned, 2> not_unveiled{0, 0};
    /// Trials whose committed bit was accepted / whose opposite bit was.
    unsigned committed_bit_accepts = 0;
    unsigned other_bit_accepts = 0;
    std::array<double, 2> mean_statistic{0.0, 0.0};
    std::optional<HidingEstimate> hiding;  // set when every label has >= 2 views
};

struct ScenarioResult {
    std::string name;
    ScenarioStats stats;
    /// One entry per trial (two for MemoryReuse: run 1 then run 2).
    std::vector<protocols::RunResult> runs;
    /// (hidden label, canonical pre-unveil view) pairs feeding the hiding
    /// estimator; the label is the committed bit, or run 1's secret x for
    /// MemoryReuse.
    std::vector<std::pair<int, std::string>> labeled_views;
};

/// Execute `repeat` seeded trials; trial k runs with seed
/// derive(config.seed, kTrial, k), so results are identical at any `jobs`
/// level (trials run in parallel, aggregation stays in trial order).
/// Propagates protocol faults.
ScenarioResult run_scenario(const Scenario& scenario, unsigned jobs = 1);

/// Named builtin scenarios (honest baselines and the attack narratives).
/// Throws std::invalid_argument for unknown names.
Scenario builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

/// Empirical best-guess advantage over 1/2 for distinguishing the two view
/// distributions: half the total variation between the per-label histograms,
/// with a bootstrap standard error. Requires >= 2 samples per label.
HidingEstimate estimate_hiding_advantage(const std::vector<std::string>& views_label0,
                                         const std::vector<std::string>& views_label1,
                                         std::uint64_t seed = 0);

struct AuditReport {
    bool pass = true;
    std::vector<std::string> violations;
};

/// Static causality/no-signalling audit of one transcript: receptions must
/// causally follow matching emissions, dependencies must be earlier events of
/// the same agent, agents move no faster than light between their events, and
/// no long payload reappears outside the light cone of the draw that created
/// it (unless relayed through a valid reception).
AuditReport audit_no_signalling(const protocols::Transcript& transcript);

}  // namespace relbc::harness
