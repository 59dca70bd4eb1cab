#pragma once

/// Protocol state machines: the three CHSH commitment variants, the
/// random-code classical protocol, and the dual-run decline wrapper. Runs
/// execute over the discrete-event core and produce causally-ordered
/// transcripts plus per-bit verdicts.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relbc/adversary.hpp"
#include "relbc/bitmath.hpp"
#include "relbc/bitstring.hpp"
#include "relbc/geometry.hpp"
#include "relbc/quantum.hpp"

namespace relbc::protocols {

enum class Variant { CHSH1, CHSH2, CHSH3, RCCBC };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

enum class VerifierPlacement { EarliestJoint, CommitSite, UnveilSite };

/// The layout used throughout the examples: commit point at the origin, the
/// two unveiling points spacelike separated from it and from each other.
geometry::ProtocolLayout default_layout();

struct ProtocolConfig {
    Variant variant = Variant::CHSH1;
    bool dual = false;  // wrap the (CHSH) variant in the two-run decline scheme
    unsigned n = 8;
    double xi = 0.05;      // CHSH robustness parameter
    double c_param = 1.0;  // RCCBC window constant
    double delta = 0.0;    // per-measurement error/loss rate
    double loss_fraction = 0.5;
    geometry::ProtocolLayout layout = default_layout();
    std::optional<bitmath::BitString> l0;  // CHSH1 pre-agreed challenge (else from seed)
    std::uint64_t seed = 0;
    double travel_speed = 0.9;
    VerifierPlacement placement = VerifierPlacement::EarliestJoint;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    /// The pre-agreed public L0 for CHSH1 (config value or seed-derived).
    bitmath::BitString effective_l0() const;
};

/// A_c's secret block bookkeeping. A_i holds the b-side block x XOR i;
/// committing to b measures the a-side block x XOR b, so committer and the
/// matching unveiler consume partner halves of the same pairs.
struct CommitState {
    int x = 0;
    std::optional<int> b;
    std::array<int, 2> agent_block{0, 1};  // agent_block[i] = x XOR i
};

inline int commit_block_index(int x, int b) { return (x ^ b) & 1; }
inline int unveil_block_index(int x, int i) { return (x ^ i) & 1; }

/// Outcome bits plus per-position loss flags.
struct OutcomeString {
    bitmath::BitString bits;
    bitmath::BitString lost;

    std::string render() const;  // '0'/'1', lost positions as '?'
};

struct TranscriptEvent {
    int id = 0;
    double time = 0.0;
    std::string agent;
    geometry::SpacetimePoint point;
    std::string type;   // draw | invoke | emit | recv | verdict
    std::string label;  // payload kind: L, O, O0, S0J, ...
    std::string payload;
    int source_id = -1;          // recv: the emit event it consumes
    std::vector<int> deps;       // same-agent prerequisites
};

struct Transcript {
    std::vector<TranscriptEvent> events;

    std::string render() const;  // line-oriented, stable field order
};

enum class Outcome { Accepted, Rejected, NotUnveiled };

std::string outcome_name(Outcome o);

struct VerdictEntry {
    Outcome outcome = Outcome::NotUnveiled;
    double statistic = 0.0;  // CHSH score or RCCBC distance
    geometry::SpacetimePoint where;
    std::string reason;
};

struct Verdict {
    std::array<VerdictEntry, 2> bits;
};

/// CHSH acceptance test in mismatch form: accepted iff the number of rounds
/// violating t XOR s = x AND y (lost rounds count as violations) is strictly
/// below mismatch_threshold(n, xi). statistic = score = n - mismatches.
VerdictEntry verify_chsh(const OutcomeString& o, const OutcomeString& o_i,
                         const bitmath::BitString& l, const bitmath::BitString& l_i,
                         unsigned n, double xi);

/// What A_c and her agents decide to do.
struct Decisions {
    std::optional<int> commit_bit;  // none = decline (broadcast random bits)
    bool unveil0 = true;
    bool unveil1 = true;
    /// Uncoordinated agents: feed challenges into the devices even when not
    /// unveiling (and discard the outputs). The unsafe device-reuse mode.
    bool invoke_without_unveil = false;
};

/// Device wiring for one run; defaults are honest devices at config noise.
struct DeviceSetup {
    quantum::DeviceSpec a_side;
    quantum::DeviceSpec b_side;
    std::vector<std::int64_t> initial_memory_a;  // optional, size 2N
    std::vector<std::int64_t> initial_memory_b;

    static DeviceSetup honest(const ProtocolConfig& config);
};

/// Classical cheating overrides; when set, Alice's agents ignore the devices
/// and answer from the pre-agreed tables.
struct AdversaryOverride {
    const adversary::ReducedStrategy* chsh = nullptr;
    const adversary::RccbcStrategy* rccbc = nullptr;
};

/// Bob-side view before any unveiling data arrives, used for hiding
/// estimates. Canonicalized to a deterministic "k=v;..." string.
struct BobView {
    std::map<std::string, std::string> fields;

    std::string canonical() const;
};

struct RunResult {
    Transcript transcript;
    Verdict verdict;
    CommitState state;
    BobView pre_unveil_view;
    /// Device memories after the run (index = pair), for reuse scenarios.
    std::vector<std::int64_t> final_memory_a;
    std::vector<std::int64_t> final_memory_b;
};

/// Execute one CHSH-variant run end to end. Throws CausalityFault on layout
/// faults and std::invalid_argument on bad configs.
RunResult run_chsh_variant(const ProtocolConfig& config, const Decisions& decisions,
                           const AdversaryOverride& override_ = {},
                           const DeviceSetup* setup = nullptr);

/// Execute one random-code run. decisions.commit_bit must be set.
RunResult run_rccbc(const ProtocolConfig& config, const Decisions& decisions,
                    const AdversaryOverride& override_ = {});

struct DualIntent {
    std::optional<int> commit_bit;  // none = decline (differing inner commitments)
    bool unveil = true;             // all inner unveilings on/off together
};

struct DualResult {
    RunResult run_a;
    RunResult run_b;
    Verdict combined;  // Accepted(b) iff both inner runs accepted b
    BobView pre_unveil_view;
};

/// Two simultaneous inner runs; committing to b means committing b in both,
/// declining commits different values. Inner variant must be a CHSH variant.
DualResult run_dual(const ProtocolConfig& config, const DualIntent& intent);

/// Convenience dispatcher on config.variant (and config.dual).
RunResult run_protocol(const ProtocolConfig& config, const Decisions& decisions,
                       const AdversaryOverride& override_ = {},
                       const DeviceSetup* setup = nullptr);

}  // namespace relbc::protocols
