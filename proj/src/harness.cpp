#include "relbc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "relbc/rng.hpp"

namespace relbc::harness {

namespace {

using protocols::Decisions;
using protocols::DeviceSetup;
using protocols::Outcome;
using protocols::ProtocolConfig;
using protocols::RunResult;
using protocols::Variant;

void account(ScenarioStats& stats, const RunResult& run, std::optional<int> committed) {
    ++stats.trials;
    for (int i = 0; i < 2; ++i) {
        const auto si = static_cast<std::size_t>(i);
        const auto& entry = run.verdict.bits[si];
        switch (entry.outcome) {
            case Outcome::Accepted: ++stats.accepted[si]; break;
            case Outcome::Rejected: ++stats.rejected[si]; break;
            case Outcome::NotUnveiled: ++stats.not_unveiled[si]; break;
        }
        stats.mean_statistic[si] += entry.statistic;
    }
    if (committed) {
        const auto b = static_cast<std::size_t>(*committed & 1);
        if (run.verdict.bits[b].outcome == Outcome::Accepted) ++stats.committed_bit_accepts;
        if (run.verdict.bits[1 - b].outcome == Outcome::Accepted) ++stats.other_bit_accepts;
    }
}

DeviceSetup setup_from(const Scenario& scenario, const ProtocolConfig& cfg) {
    DeviceSetup setup = DeviceSetup::honest(cfg);
    if (scenario.a_side_override) setup.a_side = *scenario.a_side_override;
    if (scenario.b_side_override) setup.b_side = *scenario.b_side_override;
    return setup;
}

// The device program that records the inferred block-assignment secret while
// otherwise behaving honestly.
quantum::DeviceSpec recording_device() {
    quantum::DeviceSpec spec;
    spec.kind = quantum::DeviceKind::Malicious;
    quantum::DeviceRule rule;
    rule.output = quantum::OutputExpr::Honest;
    rule.memory = quantum::MemoryExpr::StoreInferredX;
    spec.program.rules.push_back(rule);
    return spec;
}

// The reused device that answers from its recorded memory.
quantum::DeviceSpec replaying_device() {
    quantum::DeviceSpec spec;
    spec.kind = quantum::DeviceKind::Malicious;
    quantum::DeviceRule rule;
    rule.output = quantum::OutputExpr::Memory;
    spec.program.rules.push_back(rule);
    return spec;
}

// Everything one trial produces; aggregation happens afterwards in trial
// order so parallel execution cannot change the result.
struct TrialOutput {
    protocols::Verdict verdict;
    std::optional<int> committed;
    int label = 0;
    std::string view;
    std::vector<RunResult> runs;
};

TrialOutput run_trial(const Scenario& scenario, unsigned trial) {
    const std::uint64_t tseed = rng::derive(scenario.config.seed, rng::kTrial, trial);
    auto label_eng = rng::make_engine(tseed, rng::kAnalysis, 0);

    std::optional<int> commit = scenario.alice.commit_bit;
    if (scenario.randomize_commit_bit) commit = rng::uniform_bit(label_eng);

    protocols::AdversaryOverride adv;
    if (scenario.alice.chsh_strategy) adv.chsh = &*scenario.alice.chsh_strategy;
    if (scenario.alice.rccbc_strategy) adv.rccbc = &*scenario.alice.rccbc_strategy;

    TrialOutput out;

    switch (scenario.flow) {
        case Flow::Single: {
            ProtocolConfig cfg = scenario.config;
            cfg.seed = tseed;
            cfg.dual = false;
            Decisions dec;
            dec.commit_bit = commit;
            dec.unveil0 = scenario.alice.unveil0;
            dec.unveil1 = scenario.alice.unveil1;
            dec.invoke_without_unveil = scenario.alice.invoke_without_unveil;
            const DeviceSetup setup = setup_from(scenario, cfg);
            RunResult run = (cfg.variant == Variant::RCCBC)
                                ? protocols::run_rccbc(cfg, dec, adv)
                                : protocols::run_chsh_variant(cfg, dec, adv, &setup);
            out.verdict = run.verdict;
            out.committed = commit;
            out.label = commit.value_or(0);
            out.view = run.pre_unveil_view.canonical();
            out.runs.push_back(std::move(run));
            break;
        }
        case Flow::Dual: {
            ProtocolConfig cfg = scenario.config;
            cfg.seed = tseed;
            cfg.dual = false;
            protocols::DualIntent intent;
            intent.commit_bit = commit;
            intent.unveil = scenario.alice.unveil0 && scenario.alice.unveil1;
            if (scenario.randomize_decline) {
                const bool do_commit = rng::uniform_bit(label_eng) == 1;
                out.label = do_commit ? 1 : 0;
                if (do_commit) {
                    intent.commit_bit = rng::uniform_bit(label_eng);
                } else {
                    intent.commit_bit.reset();
                }
            } else {
                out.label = intent.commit_bit.value_or(0);
            }
            auto dual = protocols::run_dual(cfg, intent);
            out.verdict = dual.combined;
            out.committed = intent.commit_bit;
            out.view = dual.pre_unveil_view.canonical();
            out.runs.push_back(std::move(dual.run_a));
            out.runs.push_back(std::move(dual.run_b));
            break;
        }
        case Flow::MemoryReuse: {
            // Run 1: a commitment that is never unveiled; the b-side
            // devices try to record the block-assignment secret, which
            // succeeds only if the agents feed them the challenges.
            ProtocolConfig cfg1 = scenario.config;
            cfg1.seed = rng::derive(tseed, rng::kDualRun, 0);
            cfg1.dual = false;
            Decisions dec1;
            dec1.commit_bit = commit;
            dec1.unveil0 = dec1.unveil1 = false;
            dec1.invoke_without_unveil = !scenario.coordinated;
            DeviceSetup setup1 = DeviceSetup::honest(cfg1);
            if (scenario.a_side_override) setup1.a_side = *scenario.a_side_override;
            setup1.b_side = scenario.b_side_override.value_or(recording_device());
            RunResult run1 = protocols::run_chsh_variant(cfg1, dec1, {}, &setup1);

            // Run 2: a fresh honest-looking protocol with the run-1
            // b-side devices recycled into Alice's commitment hardware.
            ProtocolConfig cfg2 = scenario.config;
            cfg2.seed = rng::derive(tseed, rng::kDualRun, 1);
            cfg2.dual = false;
            Decisions dec2;
            dec2.commit_bit = rng::uniform_bit(label_eng);
            DeviceSetup setup2 = DeviceSetup::honest(cfg2);
            setup2.a_side = replaying_device();
            setup2.initial_memory_a = run1.final_memory_b;
            RunResult run2 = protocols::run_chsh_variant(cfg2, dec2, {}, &setup2);

            out.verdict = run2.verdict;
            out.committed = dec2.commit_bit;
            out.label = run1.state.x;
            out.view = run2.pre_unveil_view.canonical();
            out.runs.push_back(std::move(run1));
            out.runs.push_back(std::move(run2));
            break;
        }
    }
    return out;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& scenario, unsigned jobs) {
    scenario.config.validate();
    if (scenario.repeat == 0) {
        throw std::invalid_argument("run_scenario: repeat must be positive");
    }
    const bool has_strategy =
        scenario.alice.chsh_strategy.has_value() || scenario.alice.rccbc_strategy.has_value();
    if (scenario.flow != Flow::Single && has_strategy) {
        throw std::invalid_argument("run_scenario: strategies apply to the single flow only");
    }
    if (scenario.flow == Flow::Dual &&
        (scenario.a_side_override || scenario.b_side_override)) {
        throw std::invalid_argument("run_scenario: device overrides unsupported in dual flow");
    }
    if (scenario.flow == Flow::MemoryReuse && scenario.config.variant != Variant::CHSH1) {
        throw std::invalid_argument(
            "run_scenario: memory-reuse flow requires chsh1 (public challenge strings)");
    }

    std::vector<TrialOutput> trials(scenario.repeat);
    const unsigned workers = std::min<unsigned>(std::max(1u, jobs), scenario.repeat);
    if (workers <= 1) {
        for (unsigned trial = 0; trial < scenario.repeat; ++trial) {
            trials[trial] = run_trial(scenario, trial);
        }
    } else {
        std::atomic<unsigned> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const unsigned trial = next.fetch_add(1);
                    if (trial >= scenario.repeat) return;
                    try {
                        trials[trial] = run_trial(scenario, trial);
                    } catch (...) {
                        const std::lock_guard<std::mutex> lock(error_mutex);
                        if (!error) error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    ScenarioResult out;
    out.name = scenario.name;
    std::vector<std::string> views0, views1;
    for (auto& trial : trials) {
        RunResult scored;
        scored.verdict = trial.verdict;
        account(out.stats, scored, trial.committed);
        (trial.label == 0 ? views0 : views1).push_back(trial.view);
        out.labeled_views.emplace_back(trial.label, std::move(trial.view));
        for (auto& run : trial.runs) out.runs.push_back(std::move(run));
    }

    for (auto& m : out.stats.mean_statistic) {
        m /= static_cast<double>(out.stats.trials);
    }
    if (views0.size() >= 2 && views1.size() >= 2) {
        out.stats.hiding = estimate_hiding_advantage(
            views0, views1, rng::derive(scenario.config.seed, rng::kAnalysis, 1));
    }
    return out;
}

Scenario builtin_scenario(const std::string& name) {
    Scenario sc;
    sc.name = name;
    sc.config.seed = 0x5eedbead;

    if (name == "honest-chsh1") {
        sc.config.variant = Variant::CHSH1;
        sc.config.n = 10000;
        sc.config.xi = 0.05;
        sc.repeat = 100;
        sc.randomize_commit_bit = true;
        return sc;
    }
    if (name == "honest-chsh2" || name == "honest-chsh3") {
        sc.config.variant = name == "honest-chsh2" ? Variant::CHSH2 : Variant::CHSH3;
        sc.config.n = 2000;
        sc.config.xi = 0.05;
        sc.repeat = 50;
        sc.randomize_commit_bit = true;
        return sc;
    }
    if (name == "honest-rccbc") {
        sc.config.variant = Variant::RCCBC;
        sc.config.n = 32;
        sc.config.c_param = 1.0;
        sc.repeat = 400;
        sc.randomize_commit_bit = true;
        return sc;
    }
    if (name == "noisy-chsh1") {
        sc.config.variant = Variant::CHSH1;
        sc.config.n = 10000;
        sc.config.xi = 0.05;
        sc.config.delta = 0.02;
        sc.repeat = 100;
        sc.randomize_commit_bit = true;
        return sc;
    }
    if (name == "hiding-chsh1") {
        sc.config.variant = Variant::CHSH1;
        sc.config.n = 2;
        sc.config.xi = 0.05;
        sc.repeat = 10000;
        sc.randomize_commit_bit = true;
        return sc;
    }
    if (name == "hiding-constant" || name == "hiding-location" || name == "hiding-memoryful") {
        // Rigged committer-side hardware; the broadcast data must stay
        // independent of the committed bit regardless of the program.
        sc.config.variant = Variant::CHSH1;
        sc.config.n = 2;
        sc.config.xi = 0.05;
        sc.repeat = 10000;
        sc.randomize_commit_bit = true;
        quantum::DeviceSpec spec;
        spec.kind = quantum::DeviceKind::Malicious;
        if (name == "hiding-constant") {
            quantum::DeviceRule rule;
            rule.output = quantum::OutputExpr::One;
            spec.program.rules.push_back(rule);
        } else if (name == "hiding-location") {
            quantum::DeviceRule rule;
            rule.when.near_point = sc.config.layout.commit_point;
            rule.when.near_radius = 0.25;
            rule.output = quantum::OutputExpr::Setting;
            spec.program.rules.push_back(rule);
        } else {
            quantum::DeviceRule first;  // first invocation: record the setting
            first.when.memory_is = 0;
            first.output = quantum::OutputExpr::Honest;
            first.memory = quantum::MemoryExpr::StoreSetting;
            quantum::DeviceRule later;  // afterwards: replay what was stored
            later.output = quantum::OutputExpr::Memory;
            spec.program.rules.push_back(first);
            spec.program.rules.push_back(later);
        }
        sc.a_side_override = spec;
        return sc;
    }
    if (name == "dual-commit") {
        sc.config.variant = Variant::CHSH1;
        sc.config.n = 2000;
        sc.config.xi = 0.05;
        sc.flow = Flow::Dual;
        sc.alice.commit_bit = 1;
        sc.repeat = 50;
        return sc;
    }
    if (name == "dual-decline") {
        sc.config.variant = Variant::CHSH1;
        sc.config.n = 1;
        sc.config.xi = 0.05;
        sc.flow = Flow::Dual;
        sc.repeat = 20000;  // ~1e4 view samples on each side of the comparison
        sc.randomize_decline = true;
        return sc;
    }
    if (name == "cheat-chsh1") {
        sc.config.variant = Variant::CHSH1;
        sc.config.n = 4;
        sc.config.xi = 0.05;
        sc.config.l0 = bitmath::BitString::zeros(4);
        sc.repeat = 512;
        sc.alice.commit_bit.reset();
        sc.alice.chsh_strategy =
            adversary::brute_force_epsilon_chsh(4, 0.05, bitmath::BitString::zeros(4)).best;
        return sc;
    }
    if (name == "location-attack") {
        sc.config.variant = Variant::CHSH1;
        sc.config.n = 1000;
        sc.config.xi = 0.05;
        sc.repeat = 50;
        sc.alice.commit_bit = 0;
        quantum::DeviceSpec spec;
        spec.kind = quantum::DeviceKind::Malicious;
        quantum::DeviceRule rule;
        rule.when.near_point = sc.config.layout.unveil_points[0];
        rule.when.near_radius = 0.25;
        rule.output = quantum::OutputExpr::Zero;
        spec.program.rules.push_back(rule);
        sc.b_side_override = spec;
        return sc;
    }
    if (name == "memory-attack-reuse" || name == "memory-attack-coordinated") {
        sc.config.variant = Variant::CHSH1;
        sc.config.n = 2;
        sc.config.xi = 0.05;
        sc.flow = Flow::MemoryReuse;
        sc.coordinated = name == "memory-attack-coordinated";
        sc.repeat = 10000;
        sc.randomize_commit_bit = true;
        return sc;
    }
    throw std::invalid_argument("builtin_scenario: unknown scenario '" + name + "'");
}

std::vector<std::string> builtin_scenario_names() {
    return {"honest-chsh1",    "honest-chsh2",        "honest-chsh3",
            "honest-rccbc",    "noisy-chsh1",         "hiding-chsh1",
            "hiding-constant", "hiding-location",     "hiding-memoryful",
            "dual-commit",     "dual-decline",        "cheat-chsh1",
            "location-attack", "memory-attack-reuse", "memory-attack-coordinated"};
}

HidingEstimate estimate_hiding_advantage(const std::vector<std::string>& views_label0,
                                         const std::vector<std::string>& views_label1,
                                         std::uint64_t seed) {
    if (views_label0.size() < 2 || views_label1.size() < 2) {
        throw std::invalid_argument(
            "estimate_hiding_advantage: need at least 2 samples per label");
    }
    // Dictionary-encode the views once; bootstrap then works on small ints.
    std::map<std::string, int> dict;
    auto encode = [&](const std::vector<std::string>& views) {
        std::vector<int> codes;
        codes.reserve(views.size());
        for (const auto& v : views) {
            auto it = dict.emplace(v, static_cast<int>(dict.size())).first;
            codes.push_back(it->second);
        }
        return codes;
    };
    const std::vector<int> codes0 = encode(views_label0);
    const std::vector<int> codes1 = encode(views_label1);
    const std::size_t cells = dict.size();

    auto advantage_of = [&](const std::vector<int>& a, const std::vector<int>& b) {
        std::vector<double> h0(cells, 0.0), h1(cells, 0.0);
        for (int c : a) h0[static_cast<std::size_t>(c)] += 1.0;
        for (int c : b) h1[static_cast<std::size_t>(c)] += 1.0;
        double sum = 0.0;
        for (std::size_t k = 0; k < cells; ++k) {
            sum += std::fabs(h0[k] / static_cast<double>(a.size()) -
                             h1[k] / static_cast<double>(b.size()));
        }
        return 0.25 * sum;  // half the total variation
    };

    HidingEstimate est;
    est.advantage = advantage_of(codes0, codes1);
    est.samples = {views_label0.size(), views_label1.size()};

    auto eng = rng::make_engine(seed, rng::kAnalysis, 0);
    constexpr int kBootstrap = 200;
    std::vector<double> replicates;
    replicates.reserve(kBootstrap);
    std::uniform_int_distribution<std::size_t> pick0(0, codes0.size() - 1);
    std::uniform_int_distribution<std::size_t> pick1(0, codes1.size() - 1);
    std::vector<int> r0(codes0.size()), r1(codes1.size());
    for (int b = 0; b < kBootstrap; ++b) {
        for (auto& c : r0) c = codes0[pick0(eng)];
        for (auto& c : r1) c = codes1[pick1(eng)];
        replicates.push_back(advantage_of(r0, r1));
    }
    double mean = 0.0;
    for (double r : replicates) mean += r;
    mean /= kBootstrap;
    double var = 0.0;
    for (double r : replicates) var += (r - mean) * (r - mean);
    est.std_error = std::sqrt(var / (kBootstrap - 1));
    return est;
}

AuditReport audit_no_signalling(const protocols::Transcript& transcript) {
    AuditReport report;
    auto violate = [&](std::string msg) {
        report.pass = false;
        report.violations.push_back(std::move(msg));
    };
    const auto& events = transcript.events;

    std::map<std::string, const protocols::TranscriptEvent*> last_of_agent;
    for (std::size_t k = 0; k < events.size(); ++k) {
        const auto& e = events[k];
        const std::string tag = "e" + std::to_string(e.id);
        if (e.id != static_cast<int>(k)) violate(tag + ": non-sequential id");
        if (!std::isfinite(e.time) || !geometry::is_finite(e.point)) {
            violate(tag + ": non-finite coordinates");
            continue;
        }
        if (e.time != e.point.t) violate(tag + ": event time differs from location time");

        auto [it, fresh] = last_of_agent.try_emplace(e.agent, &e);
        if (!fresh) {
            const auto* prev = it->second;
            if (e.time < prev->time) {
                violate(tag + ": agent " + e.agent + " moves backwards in time");
            } else if (geometry::spatial_distance(prev->point, e.point) >
                       (e.time - prev->time) + geometry::kLightlikeTolerance) {
                violate(tag + ": agent " + e.agent + " travels faster than light");
            }
            it->second = &e;
        }

        if (e.type == "recv") {
            if (e.source_id < 0 || e.source_id >= static_cast<int>(events.size())) {
                violate(tag + ": reception without a valid source");
            } else {
                const auto& src = events[static_cast<std::size_t>(e.source_id)];
                if (src.type != "emit") violate(tag + ": reception source is not an emission");
                if (src.label != e.label || src.payload != e.payload) {
                    violate(tag + ": reception alters the message");
                }
                if (!geometry::causally_reachable(src.point, e.point)) {
                    violate(tag + ": reception of '" + e.label +
                            "' outside the causal future of its emission");
                }
            }
        } else if (e.source_id >= 0) {
            violate(tag + ": non-reception event cites a source");
        }

        for (int d : e.deps) {
            if (d < 0 || d >= e.id) {
                violate(tag + ": dependency does not precede the event");
                continue;
            }
            const auto& de = events[static_cast<std::size_t>(d)];
            if (de.agent != e.agent) violate(tag + ": dependency crosses agents");
            if (de.time > e.time) violate(tag + ": dependency is later in time");
        }
    }

    // A long payload appearing verbatim at an agent that neither drew it nor
    // received it, outside the light cone of its origin, is a leak.
    constexpr std::size_t kMinTracked = 16;
    for (const auto& d : events) {
        if (d.type != "draw" || d.payload.size() < kMinTracked) continue;
        for (const auto& e : events) {
            if (e.type != "emit" && e.type != "invoke") continue;
            if (e.agent == d.agent || e.payload != d.payload) continue;
            if (geometry::causally_reachable(d.point, e.point)) continue;
            bool relayed = false;
            for (const auto& r : events) {
                if (r.id >= e.id) break;
                if (r.type == "recv" && r.agent == e.agent && r.payload == e.payload) {
                    relayed = true;
                    break;
                }
            }
            if (!relayed) {
                violate("e" + std::to_string(e.id) + ": payload of draw e" +
                        std::to_string(d.id) + " reappears outside its light cone");
            }
        }
    }

    // Verdicts must lie in the causal future of the broadcasts they judge.
    for (const auto& v : events) {
        if (v.type != "verdict") continue;
        const std::string which = v.label.size() ? v.label.substr(v.label.size() - 1) : "";
        for (const auto& e : events) {
            if (e.type != "emit") continue;
            const bool commitment = e.label == "O" || e.label == "S0J" || e.label == "S1J" ||
                                    e.label == "SJbar";
            const bool unveiling = e.label == "O" + which || e.label == "U" + which;
            if (!commitment && !unveiling) continue;
            if (!geometry::causally_reachable(e.point, v.point)) {
                violate("e" + std::to_string(v.id) + ": verdict outside the causal future of '" +
                        e.label + "'");
            }
        }
    }
    return report;
}

}  // namespace relbc::harness
