#include "relbc/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include "relbc/rng.hpp"
#include "relbc/sim.hpp"

namespace relbc::protocols {

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_point(const geometry::SpacetimePoint& p) {
    return "(" + fmt_g(p.t) + "," + fmt_g(p.x) + "," + fmt_g(p.y) + "," + fmt_g(p.z) + ")";
}

// Deterministic tie-break rank per agent; verifiers run after everyone else
// at equal times so same-instant broadcasts are visible to them.
int agent_order(const std::string& agent) {
    if (agent == "Ac") return 0;
    if (agent == "A0") return 1;
    if (agent == "A1") return 2;
    if (agent == "Bc") return 3;
    if (agent == "B0") return 4;
    if (agent == "B1") return 5;
    if (agent == "V0") return 6;
    if (agent == "V1") return 7;
    return 8;
}

geometry::SpacetimePoint at_position_of(double t, const geometry::SpacetimePoint& p) {
    return {t, p.x, p.y, p.z};
}

geometry::SpacetimePoint verdict_point(const ProtocolConfig& cfg, int i) {
    const auto& p = cfg.layout.commit_point;
    const auto& q = cfg.layout.unveil_points[static_cast<std::size_t>(i)];
    const double d = geometry::spatial_distance(p, q);
    switch (cfg.placement) {
        case VerifierPlacement::EarliestJoint:
            return geometry::earliest_joint_reception(p, q);
        case VerifierPlacement::CommitSite:
            return at_position_of(std::max(p.t, q.t + d), p);
        case VerifierPlacement::UnveilSite:
            return at_position_of(std::max(q.t, p.t + d), q);
    }
    throw std::logic_error("verdict_point: unknown placement");
}

// Transcript assembly shared by the runs. Events are appended in event-loop
// execution order, so ids are already causally sorted per agent.
struct Recorder {
    harness::EventLoop loop;
    Transcript transcript;

    int record(double time, const std::string& agent, const geometry::SpacetimePoint& point,
               const char* type, std::string label, std::string payload, int source_id = -1,
               std::vector<int> deps = {}) {
        TranscriptEvent ev;
        ev.id = static_cast<int>(transcript.events.size());
        ev.time = time;
        ev.agent = agent;
        ev.point = point;
        ev.type = type;
        ev.label = std::move(label);
        ev.payload = std::move(payload);
        ev.source_id = source_id;
        ev.deps = std::move(deps);
        transcript.events.push_back(std::move(ev));
        return transcript.events.back().id;
    }

    // Record a reception of `source` at `target`, enforcing causal delivery.
    int receive(const std::string& agent, const geometry::SpacetimePoint& emission,
                const geometry::SpacetimePoint& target, const TranscriptEvent& source,
                std::vector<int> deps = {}) {
        const auto where = harness::deliver(emission, target);
        return record(where.t, agent, where, "recv", source.label, source.payload, source.id,
                      std::move(deps));
    }
};

// Measure one block of pairs on one side; returns reported outcomes with the
// unveiler-side reporting convention applied.
OutcomeString measure_block(quantum::EntangledRegistry& reg, unsigned block, unsigned n,
                            quantum::Side side, quantum::Role role,
                            const bitmath::BitString& settings, const quantum::DeviceSpec& spec,
                            const bitmath::BitString& l0_public,
                            const geometry::SpacetimePoint& where, std::uint64_t seed) {
    const auto ds = quantum::canonical_direction_set();
    OutcomeString out;
    out.bits = bitmath::BitString::zeros(n);
    out.lost = bitmath::BitString::zeros(n);
    for (unsigned j = 0; j < n; ++j) {
        const std::size_t pair = static_cast<std::size_t>(block) * n + j;
        const int bit = settings.get(j) ? 1 : 0;
        quantum::DeviceContext ctx;
        ctx.block_size = static_cast<int>(n);
        ctx.setting_bit = bit;
        ctx.location = where;
        ctx.l0_bit = l0_public.empty() ? -1 : (l0_public.get(j) ? 1 : 0);
        quantum::SplitMix dev_rng{
            rng::derive(seed, rng::kDeviceNoise,
                        pair * 2 + (side == quantum::Side::B ? 1u : 0u))};
        const auto res = reg.measure(pair, side, quantum::direction_for_bit(ds, role, bit),
                                     spec, ctx, dev_rng);
        if (res.lost) {
            out.lost.set(j, true);
        } else {
            int reported = res.outcome;
            if (role == quantum::Role::Unveiler && ds.outcome_flip_unveiler) reported ^= 1;
            out.bits.set(j, reported == 1);
        }
    }
    return out;
}

std::string subset_payload(const std::vector<unsigned>& positions) {
    std::string s;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        if (k) s += ',';
        s += std::to_string(positions[k]);
    }
    return s;
}

std::string labeled_payload(const std::vector<unsigned>& positions,
                            const bitmath::BitString& bits) {
    std::string s;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        if (k) s += ',';
        s += std::to_string(positions[k]);
        s += ':';
        s += bits.get(k) ? '1' : '0';
    }
    return s;
}

}  // namespace

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::CHSH1: return "chsh1";
        case Variant::CHSH2: return "chsh2";
        case Variant::CHSH3: return "chsh3";
        case Variant::RCCBC: return "rccbc";
    }
    throw std::logic_error("variant_name: unknown variant");
}

Variant variant_from_name(const std::string& name) {
    if (name == "chsh1") return Variant::CHSH1;
    if (name == "chsh2") return Variant::CHSH2;
    if (name == "chsh3") return Variant::CHSH3;
    if (name == "rccbc") return Variant::RCCBC;
    throw std::invalid_argument("variant_from_name: unknown variant '" + name + "'");
}

geometry::ProtocolLayout default_layout() {
    geometry::ProtocolLayout layout;
    layout.commit_point = {0.0, 0.0, 0.0, 0.0};
    layout.unveil_points[0] = {0.5, -1.0, 0.0, 0.0};
    layout.unveil_points[1] = {0.5, 1.0, 0.0, 0.0};
    return layout;
}

void ProtocolConfig::validate() const {
    const bool chsh = variant != Variant::RCCBC;
    if (n == 0) throw std::invalid_argument("ProtocolConfig: n must be positive");
    if (!chsh && (n % 2 != 0)) {
        throw std::invalid_argument("ProtocolConfig: n must be even for rccbc");
    }
    if (chsh) {
        if (!(xi > 0.0) || !(xi < bitmath::xi_upper_limit())) {
            throw std::invalid_argument(
                "ProtocolConfig: xi must lie in (0, 1/(2*sqrt(2)) - 1/4)");
        }
    } else {
        if (!std::isfinite(c_param) || !(c_param > 0.0)) {
            throw std::invalid_argument("ProtocolConfig: c_param must be positive");
        }
    }
    if (!(delta >= 0.0) || !(delta < 1.0)) {
        throw std::invalid_argument("ProtocolConfig: delta must lie in [0, 1)");
    }
    if (!(loss_fraction >= 0.0) || !(loss_fraction <= 1.0)) {
        throw std::invalid_argument("ProtocolConfig: loss_fraction must lie in [0, 1]");
    }
    if (!(travel_speed > 0.0) || !(travel_speed < 1.0)) {
        throw std::invalid_argument("ProtocolConfig: travel_speed must lie in (0, 1)");
    }
    if (dual && !chsh) {
        throw std::invalid_argument("ProtocolConfig: dual mode applies to CHSH variants only");
    }
    if (l0 && variant != Variant::CHSH1) {
        throw std::invalid_argument("ProtocolConfig: l0 is meaningful for chsh1 only");
    }
    if (l0 && l0->size() != n) {
        throw std::invalid_argument("ProtocolConfig: l0 length must equal n");
    }
    const auto check = geometry::validate_layout(layout);
    if (!check.ok) {
        std::string msg = "ProtocolConfig: invalid layout";
        for (const auto& v : check.violations) msg += "; " + v;
        throw std::invalid_argument(msg);
    }
}

bitmath::BitString ProtocolConfig::effective_l0() const {
    if (l0) return *l0;
    auto eng = rng::make_engine(seed, rng::kPreAgreed, 0);
    return bitmath::BitString::random(n, eng);
}

std::string OutcomeString::render() const {
    std::string s;
    s.reserve(bits.size());
    for (std::size_t j = 0; j < bits.size(); ++j) {
        if (j < lost.size() && lost.get(j)) {
            s += '?';
        } else {
            s += bits.get(j) ? '1' : '0';
        }
    }
    return s;
}

std::string Transcript::render() const {
    std::string out;
    for (const auto& e : events) {
        out += 'e';
        out += std::to_string(e.id);
        out += " t=" + fmt_g(e.time);
        out += ' ' + e.agent;
        out += " @" + fmt_point(e.point);
        out += ' ' + e.type;
        out += ' ' + e.label;
        out += " payload=" + (e.payload.empty() ? std::string("-") : e.payload);
        out += " src=";
        out += e.source_id < 0 ? std::string("-") : std::to_string(e.source_id);
        out += " deps=";
        if (e.deps.empty()) {
            out += '-';
        } else {
            for (std::size_t k = 0; k < e.deps.size(); ++k) {
                if (k) out += ',';
                out += std::to_string(e.deps[k]);
            }
        }
        out += '\n';
    }
    return out;
}

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Accepted: return "accepted";
        case Outcome::Rejected: return "rejected";
        case Outcome::NotUnveiled: return "not-unveiled";
    }
    throw std::logic_error("outcome_name: unknown outcome");
}

VerdictEntry verify_chsh(const OutcomeString& o, const OutcomeString& o_i,
                         const bitmath::BitString& l, const bitmath::BitString& l_i,
                         unsigned n, double xi) {
    if (o.bits.size() != n || o_i.bits.size() != n || l.size() != n || l_i.size() != n) {
        throw std::invalid_argument("verify_chsh: length mismatch");
    }
    unsigned mismatches = 0;
    for (unsigned j = 0; j < n; ++j) {
        const bool lost = (j < o.lost.size() && o.lost.get(j)) ||
                          (j < o_i.lost.size() && o_i.lost.get(j));
        if (lost || ((o.bits.get(j) ^ o_i.bits.get(j)) != (l.get(j) && l_i.get(j)))) {
            ++mismatches;
        }
    }
    const long long limit = bitmath::mismatch_pass_limit(n, xi);
    VerdictEntry entry;
    entry.outcome = (static_cast<long long>(mismatches) <= limit) ? Outcome::Accepted
                                                                  : Outcome::Rejected;
    entry.statistic = static_cast<double>(n - mismatches);
    entry.reason = "mismatches=" + std::to_string(mismatches) +
                   " pass-limit=" + std::to_string(limit);
    return entry;
}

DeviceSetup DeviceSetup::honest(const ProtocolConfig& config) {
    DeviceSetup s;
    s.a_side.kind = quantum::DeviceKind::HonestSinglet;
    s.a_side.delta = config.delta;
    s.a_side.loss_fraction = config.loss_fraction;
    s.b_side = s.a_side;
    return s;
}

std::string BobView::canonical() const {
    std::string s;
    for (const auto& [k, v] : fields) {
        s += k;
        s += '=';
        s += v;
        s += ';';
    }
    return s;
}

RunResult run_chsh_variant(const ProtocolConfig& config, const Decisions& decisions,
                           const AdversaryOverride& override_, const DeviceSetup* setup) {
    config.validate();
    if (config.variant == Variant::RCCBC) {
        throw std::invalid_argument("run_chsh_variant: config selects rccbc");
    }
    const unsigned n = config.n;
    const DeviceSetup devices = setup ? *setup : DeviceSetup::honest(config);
    const adversary::ReducedStrategy* cheat = override_.chsh;
    if (cheat) {
        if (cheat->d_offset.size() != n || cheat->response.size() != (1ull << n)) {
            throw std::invalid_argument("run_chsh_variant: strategy shape mismatch");
        }
    }

    // Geometry and timing.
    const auto p_commit = config.layout.commit_point;
    const auto& q = config.layout.unveil_points;
    std::array<double, 2> depart{};
    for (int i = 0; i < 2; ++i) {
        const double d = geometry::spatial_distance(p_commit, q[static_cast<std::size_t>(i)]);
        depart[static_cast<std::size_t>(i)] =
            d > 0.0 ? q[static_cast<std::size_t>(i)].t - d / config.travel_speed
                    : q[static_cast<std::size_t>(i)].t;
    }
    const double t_prep = std::min({p_commit.t, depart[0], depart[1]});
    const auto prep_point = at_position_of(t_prep, p_commit);
    const std::array<geometry::SpacetimePoint, 2> verdicts_at{verdict_point(config, 0),
                                                              verdict_point(config, 1)};

    // Randomness streams.
    auto protocol_eng = rng::make_engine(config.seed, rng::kProtocol);
    auto challenge_eng = rng::make_engine(config.seed, rng::kChallenge);
    std::array<std::mt19937_64, 2> unveiler_eng{rng::make_engine(config.seed, rng::kBobStrings, 0),
                                                rng::make_engine(config.seed, rng::kBobStrings, 1)};

    // Pre-agreed / pre-shared challenge strings.
    bitmath::BitString l0_public;  // empty unless CHSH1
    if (config.variant == Variant::CHSH1) l0_public = config.effective_l0();

    quantum::EntangledRegistry registry(2 * static_cast<std::size_t>(n), config.seed);
    auto seed_memory = [&](const std::vector<std::int64_t>& init, quantum::Side side) {
        if (init.empty()) return;
        if (init.size() != 2 * static_cast<std::size_t>(n)) {
            throw std::invalid_argument("run_chsh_variant: initial memory size must be 2n");
        }
        for (std::size_t k = 0; k < init.size(); ++k) registry.set_memory(k, side, init[k]);
    };
    seed_memory(devices.initial_memory_a, quantum::Side::A);
    seed_memory(devices.initial_memory_b, quantum::Side::B);

    const bool committed = decisions.commit_bit.has_value() || cheat != nullptr;
    std::array<bool, 2> will_unveil{committed && decisions.unveil0,
                                    committed && decisions.unveil1};
    std::array<bool, 2> will_probe{};
    for (int i = 0; i < 2; ++i) {
        will_probe[static_cast<std::size_t>(i)] =
            !will_unveil[static_cast<std::size_t>(i)] && decisions.invoke_without_unveil &&
            cheat == nullptr;
    }

    Recorder rec;
    RunResult result;
    result.state.x = 0;

    // Shared run state filled in by the scheduled phases.
    struct {
        bitmath::BitString l;
        std::array<bitmath::BitString, 2> l_i;
        OutcomeString o;
        std::array<OutcomeString, 2> o_i;
        int id_emit_l = -1, id_emit_o = -1;
        std::array<int, 2> id_emit_li{-1, -1}, id_emit_oi{-1, -1};
        std::array<int, 2> id_recv_devices{-1, -1};
        std::array<int, 2> id_preshare_emit{-1, -1}, id_preshare_recv{-1, -1};
        std::array<std::vector<int>, 2> verdict_deps;
    } st;

    // --- Preparation phase -------------------------------------------------
    rec.loop.schedule(t_prep, agent_order("Ac"), [&] {
        result.state.x = rng::uniform_bit(protocol_eng);
        result.state.b = decisions.commit_bit;
        result.state.agent_block = {result.state.x, result.state.x ^ 1};
        const int id_x = rec.record(t_prep, "Ac", prep_point, "draw", "x",
                                    std::to_string(result.state.x));
        rec.record(t_prep, "Ac", prep_point, "draw", "pairs", std::to_string(2 * n), -1, {id_x});
        for (int i = 0; i < 2; ++i) {
            const auto si = static_cast<std::size_t>(i);
            const int block = unveil_block_index(result.state.x, i);
            const int id_emit =
                rec.record(t_prep, "Ac", prep_point, "emit", "devices" + std::to_string(i),
                           "block=" + std::to_string(block), -1, {id_x});
            st.id_recv_devices[si] = rec.receive("A" + std::to_string(i), prep_point, prep_point,
                                                 rec.transcript.events[static_cast<std::size_t>(
                                                     id_emit)]);
        }
        if (config.variant == Variant::CHSH2) {
            // B_c draws the unveiling challenge in advance and sends each
            // agent its half: L^0 as drawn, L^1 its bitwise complement.
            const auto lpre = bitmath::BitString::random(n, challenge_eng);
            const int id_draw =
                rec.record(t_prep, "Bc", prep_point, "draw", "Lpre", lpre.str());
            st.l_i[0] = lpre;
            st.l_i[1] = ~lpre;
            for (int i = 0; i < 2; ++i) {
                const auto si = static_cast<std::size_t>(i);
                st.id_preshare_emit[si] =
                    rec.record(t_prep, "Bc", prep_point, "emit", "Lpre" + std::to_string(i),
                               st.l_i[si].str(), -1, {id_draw});
            }
        }
    });

    // CHSH2 pre-share receptions at the unveiling sites.
    if (config.variant == Variant::CHSH2) {
        for (int i = 0; i < 2; ++i) {
            const auto si = static_cast<std::size_t>(i);
            const double arrival =
                t_prep + geometry::spatial_distance(p_commit, q[si]);
            rec.loop.schedule(arrival, agent_order("B" + std::to_string(i)), [&, i, si, arrival] {
                const auto target = at_position_of(arrival, q[si]);
                st.id_preshare_recv[si] = rec.receive(
                    "B" + std::to_string(i), prep_point, target,
                    rec.transcript.events[static_cast<std::size_t>(st.id_preshare_emit[si])]);
            });
        }
    }

    // --- Commitment phase at P ---------------------------------------------
    rec.loop.schedule(p_commit.t, agent_order("Bc"), [&] {
        st.l = bitmath::BitString::random(n, challenge_eng);
        const int id_draw_l = rec.record(p_commit.t, "Bc", p_commit, "draw", "L", st.l.str());
        st.id_emit_l =
            rec.record(p_commit.t, "Bc", p_commit, "emit", "L", st.l.str(), -1, {id_draw_l});
        const int id_recv_l = rec.receive(
            "Ac", p_commit, p_commit, rec.transcript.events[static_cast<std::size_t>(st.id_emit_l)]);

        std::vector<int> o_deps{id_recv_l};
        if (!committed) {
            // Decline: broadcast fresh random bits instead of measurements.
            st.o.bits = bitmath::BitString::random(n, protocol_eng);
            st.o.lost = bitmath::BitString::zeros(n);
            o_deps.push_back(
                rec.record(p_commit.t, "Ac", p_commit, "draw", "pad", st.o.render()));
        } else if (cheat) {
            st.o.bits = cheat->response[st.l.to_bits()];
            st.o.lost = bitmath::BitString::zeros(n);
        } else {
            const int block = commit_block_index(result.state.x, *decisions.commit_bit);
            st.o = measure_block(registry, static_cast<unsigned>(block), n, quantum::Side::A,
                                 quantum::Role::Committer, st.l, devices.a_side, l0_public,
                                 p_commit, config.seed);
            o_deps.push_back(rec.record(p_commit.t, "Ac", p_commit, "invoke", "commit",
                                        st.o.render(), -1, {id_recv_l}));
        }
        st.id_emit_o =
            rec.record(p_commit.t, "Ac", p_commit, "emit", "O", st.o.render(), -1, o_deps);
        rec.receive("Bc", p_commit, p_commit,
                    rec.transcript.events[static_cast<std::size_t>(st.id_emit_o)]);
        // Bob's pre-unveil evidence about the commitment is the data Alice
        // sent; his own challenge randomness carries no information about b.
        result.pre_unveil_view.fields["variant"] = variant_name(config.variant);
        result.pre_unveil_view.fields["O"] = st.o.render();
    });

    // --- Unveiling phases at Q_0, Q_1 ---------------------------------------
    for (int i = 0; i < 2; ++i) {
        const auto si = static_cast<std::size_t>(i);
        rec.loop.schedule(q[si].t, agent_order("A" + std::to_string(i)), [&, i, si] {
            const std::string ai = "A" + std::to_string(i);
            const std::string bi = "B" + std::to_string(i);
            const std::string li_label = "L" + std::to_string(i);

            // B_i supplies the challenge string for this site.
            std::vector<int> li_deps;
            switch (config.variant) {
                case Variant::CHSH1:
                    st.l_i[si] = (i == 0) ? l0_public : ~l0_public;
                    break;
                case Variant::CHSH2:
                    li_deps.push_back(st.id_preshare_recv[si]);
                    break;
                case Variant::CHSH3: {
                    st.l_i[si] = bitmath::BitString::random(n, unveiler_eng[si]);
                    li_deps.push_back(rec.record(q[si].t, bi, q[si], "draw", li_label,
                                                 st.l_i[si].str()));
                    break;
                }
                case Variant::RCCBC: break;  // unreachable
            }
            st.id_emit_li[si] = rec.record(q[si].t, bi, q[si], "emit", li_label,
                                           st.l_i[si].str(), -1, li_deps);
            const int id_recv_li = rec.receive(
                ai, q[si], q[si],
                rec.transcript.events[static_cast<std::size_t>(st.id_emit_li[si])]);

            if (will_unveil[si]) {
                std::vector<int> oi_deps{st.id_recv_devices[si], id_recv_li};
                if (cheat) {
                    st.o_i[si].bits = (i == 0) ? bitmath::BitString::zeros(n) : cheat->d_offset;
                    st.o_i[si].lost = bitmath::BitString::zeros(n);
                } else {
                    const int block = unveil_block_index(result.state.x, i);
                    st.o_i[si] = measure_block(registry, static_cast<unsigned>(block), n,
                                               quantum::Side::B, quantum::Role::Unveiler,
                                               st.l_i[si], devices.b_side, l0_public, q[si],
                                               config.seed);
                    oi_deps.push_back(rec.record(q[si].t, ai, q[si], "invoke",
                                                 "unveil" + std::to_string(i),
                                                 st.o_i[si].render(), -1,
                                                 {st.id_recv_devices[si], id_recv_li}));
                }
                st.id_emit_oi[si] =
                    rec.record(q[si].t, ai, q[si], "emit", "O" + std::to_string(i),
                               st.o_i[si].render(), -1, oi_deps);
            } else if (will_probe[si]) {
                // Uncoordinated agent: feeds the challenge into the devices
                // anyway and discards the outputs.
                const int block = unveil_block_index(result.state.x, i);
                const auto probed = measure_block(registry, static_cast<unsigned>(block), n,
                                                  quantum::Side::B, quantum::Role::Unveiler,
                                                  st.l_i[si], devices.b_side, l0_public, q[si],
                                                  config.seed);
                rec.record(q[si].t, ai, q[si], "invoke", "probe" + std::to_string(i),
                           probed.render(), -1, {st.id_recv_devices[si], id_recv_li});
            }
        });
    }

    // --- Verifier receptions and verdicts ------------------------------------
    for (int i = 0; i < 2; ++i) {
        const auto si = static_cast<std::size_t>(i);
        const std::string vi = "V" + std::to_string(i);
        const auto v_point = verdicts_at[si];
        // The emit ids are assigned only once the earlier phases execute, so
        // the receptions dereference them lazily through a stable pointer.
        auto schedule_recv = [&](const geometry::SpacetimePoint& from, const int* emit_id) {
            // Mathematically every required arrival precedes the verdict
            // time; the clamp keeps rounding from reordering them.
            const double arrival =
                std::min(from.t + geometry::spatial_distance(from, v_point), v_point.t);
            rec.loop.schedule(arrival, agent_order(vi),
                              [&rec, &st, si, vi, v_point, from, arrival, emit_id] {
                const auto target = at_position_of(arrival, v_point);
                st.verdict_deps[si].push_back(
                    rec.receive(vi, from, target,
                                rec.transcript.events[static_cast<std::size_t>(*emit_id)]));
            });
        };
        schedule_recv(p_commit, &st.id_emit_l);
        schedule_recv(p_commit, &st.id_emit_o);
        schedule_recv(q[si], &st.id_emit_li[si]);
        if (will_unveil[si]) schedule_recv(q[si], &st.id_emit_oi[si]);

        rec.loop.schedule(v_point.t, agent_order(vi), [&, i, si, v_point, vi] {
            VerdictEntry entry;
            if (!will_unveil[si]) {
                entry.outcome = Outcome::NotUnveiled;
                entry.statistic = 0.0;
                entry.reason = committed ? "agent did not unveil" : "no commitment made";
            } else {
                entry = verify_chsh(st.o, st.o_i[si], st.l, st.l_i[si], n, config.xi);
            }
            entry.where = v_point;
            result.verdict.bits[si] = entry;
            rec.record(v_point.t, vi, v_point, "verdict", "verdict" + std::to_string(i),
                       outcome_name(entry.outcome) + ";stat=" + fmt_g(entry.statistic), -1,
                       st.verdict_deps[si]);
        });
    }

    rec.loop.run();

    result.transcript = std::move(rec.transcript);
    result.final_memory_a.reserve(2 * static_cast<std::size_t>(n));
    result.final_memory_b.reserve(2 * static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < 2 * static_cast<std::size_t>(n); ++k) {
        result.final_memory_a.push_back(registry.memory(k, quantum::Side::A));
        result.final_memory_b.push_back(registry.memory(k, quantum::Side::B));
    }
    return result;
}

RunResult run_rccbc(const ProtocolConfig& config, const Decisions& decisions,
                    const AdversaryOverride& override_) {
    config.validate();
    if (config.variant != Variant::RCCBC) {
        throw std::invalid_argument("run_rccbc: config does not select rccbc");
    }
    const adversary::RccbcStrategy* cheat = override_.rccbc;
    if (!cheat && !decisions.commit_bit) {
        throw std::invalid_argument("run_rccbc: commit_bit required for an honest run");
    }
    if (cheat && (cheat->s0_full.size() != config.n || cheat->s1_full.size() != config.n)) {
        throw std::invalid_argument("run_rccbc: strategy shape mismatch");
    }
    const unsigned n = config.n;
    const unsigned half = n / 2;

    const auto p_commit = config.layout.commit_point;
    const auto& q = config.layout.unveil_points;
    std::array<double, 2> depart{};
    for (int i = 0; i < 2; ++i) {
        const double d = geometry::spatial_distance(p_commit, q[static_cast<std::size_t>(i)]);
        depart[static_cast<std::size_t>(i)] =
            d > 0.0 ? q[static_cast<std::size_t>(i)].t - d / config.travel_speed
                    : q[static_cast<std::size_t>(i)].t;
    }
    const double t_prep = std::min({p_commit.t, depart[0], depart[1]});
    const auto prep_point = at_position_of(t_prep, p_commit);
    const std::array<geometry::SpacetimePoint, 2> verdicts_at{verdict_point(config, 0),
                                                              verdict_point(config, 1)};

    auto strings_eng = rng::make_engine(config.seed, rng::kAliceStrings);
    auto challenge_eng = rng::make_engine(config.seed, rng::kChallenge);

    const int preferred = decisions.commit_bit.value_or(0);
    const bool unveil_any = decisions.unveil0 || decisions.unveil1;
    std::array<bool, 2> will_unveil{decisions.unveil0, decisions.unveil1};

    Recorder rec;
    RunResult result;
    result.state.x = 0;
    result.state.b = decisions.commit_bit;
    (void)unveil_any;

    struct {
        std::array<bitmath::BitString, 2> s;
        std::vector<unsigned> subset, complement;
        adversary::RccbcStrategy::Claims claims;
        bool window_ok = false;
        double labeled_distance = 0.0;
        std::array<int, 2> id_recv_s{-1, -1};
        int id_emit_j = -1;
        std::array<int, 2> id_emit_u{-1, -1};
        int id_emit_s0j = -1, id_emit_s1j = -1, id_emit_sjbar = -1;
        std::array<std::vector<int>, 2> verdict_deps;
        bool rejected_at_commit = false;
    } st;

    // --- Preparation: draw the two strings and hand them out ----------------
    rec.loop.schedule(t_prep, agent_order("Ac"), [&] {
        if (cheat) {
            st.s = {cheat->s0_full, cheat->s1_full};
        } else {
            st.s[0] = bitmath::BitString::random(n, strings_eng);
            st.s[1] = bitmath::BitString::random(n, strings_eng);
        }
        std::array<int, 2> draw_ids{};
        for (int i = 0; i < 2; ++i) {
            const auto si = static_cast<std::size_t>(i);
            draw_ids[si] = rec.record(t_prep, "Ac", prep_point, "draw", "S" + std::to_string(i),
                                      st.s[si].str());
        }
        for (int i = 0; i < 2; ++i) {
            const auto si = static_cast<std::size_t>(i);
            const int id_emit =
                rec.record(t_prep, "Ac", prep_point, "emit", "S" + std::to_string(i),
                           st.s[si].str(), -1, {draw_ids[si]});
            st.id_recv_s[si] = rec.receive(
                "A" + std::to_string(i), prep_point, prep_point,
                rec.transcript.events[static_cast<std::size_t>(id_emit)]);
        }
    });

    // --- Commitment at P: subset challenge and claims ------------------------
    rec.loop.schedule(p_commit.t, agent_order("Bc"), [&] {
        // Draw a uniformly random size-n/2 subset (partial Fisher-Yates over
        // the position list, then sorted for canonical order).
        std::vector<unsigned> positions(n);
        for (unsigned j = 0; j < n; ++j) positions[j] = j;
        for (unsigned k = 0; k < half; ++k) {
            std::uniform_int_distribution<unsigned> pick(k, n - 1);
            std::swap(positions[k], positions[pick(challenge_eng)]);
        }
        st.subset.assign(positions.begin(), positions.begin() + half);
        std::sort(st.subset.begin(), st.subset.end());
        st.complement.clear();
        std::vector<bool> in_subset(n, false);
        for (unsigned j : st.subset) in_subset[j] = true;
        for (unsigned j = 0; j < n; ++j) {
            if (!in_subset[j]) st.complement.push_back(j);
        }

        const int id_draw_j =
            rec.record(p_commit.t, "Bc", p_commit, "draw", "J", subset_payload(st.subset));
        st.id_emit_j = rec.record(p_commit.t, "Bc", p_commit, "emit", "J",
                                  subset_payload(st.subset), -1, {id_draw_j});
        const int id_recv_j = rec.receive(
            "Ac", p_commit, p_commit,
            rec.transcript.events[static_cast<std::size_t>(st.id_emit_j)]);

        if (cheat) {
            st.claims = cheat->claims_for(st.subset, preferred);
        } else {
            st.claims.s0_j = bitmath::BitString::zeros(half);
            st.claims.s1_j = bitmath::BitString::zeros(half);
            st.claims.s_jbar = bitmath::BitString::zeros(half);
            for (unsigned k = 0; k < half; ++k) {
                st.claims.s0_j.set(k, st.s[0].get(st.subset[k]));
                st.claims.s1_j.set(k, st.s[1].get(st.subset[k]));
                st.claims.s_jbar.set(
                    k, st.s[static_cast<std::size_t>(preferred)].get(st.complement[k]));
            }
        }

        st.id_emit_s0j = rec.record(p_commit.t, "Ac", p_commit, "emit", "S0J",
                                    labeled_payload(st.subset, st.claims.s0_j), -1, {id_recv_j});
        st.id_emit_s1j = rec.record(p_commit.t, "Ac", p_commit, "emit", "S1J",
                                    labeled_payload(st.subset, st.claims.s1_j), -1, {id_recv_j});
        st.id_emit_sjbar =
            rec.record(p_commit.t, "Ac", p_commit, "emit", "SJbar",
                       labeled_payload(st.complement, st.claims.s_jbar), -1, {id_recv_j});
        std::vector<int> bc_recvs;
        for (int id : {st.id_emit_s0j, st.id_emit_s1j, st.id_emit_sjbar}) {
            bc_recvs.push_back(rec.receive(
                "Bc", p_commit, p_commit,
                rec.transcript.events[static_cast<std::size_t>(id)]));
        }

        result.pre_unveil_view.fields["variant"] = variant_name(config.variant);
        result.pre_unveil_view.fields["S0J"] = st.claims.s0_j.str();
        result.pre_unveil_view.fields["S1J"] = st.claims.s1_j.str();
        result.pre_unveil_view.fields["SJbar"] = st.claims.s_jbar.str();

        // Immediate distance test on the labeled claims.
        const auto d = static_cast<double>(
            bitmath::hamming_distance(st.claims.s0_j, st.claims.s1_j));
        st.labeled_distance = d;
        st.window_ok = bitmath::rccbc_distance_check(st.claims.s0_j, st.claims.s1_j, n,
                                                     config.c_param);
        if (!st.window_ok) {
            st.rejected_at_commit = true;
            for (int i = 0; i < 2; ++i) {
                const auto si = static_cast<std::size_t>(i);
                VerdictEntry entry;
                entry.outcome = Outcome::Rejected;
                entry.statistic = d;
                entry.where = p_commit;
                entry.reason = "labeled distance outside window";
                result.verdict.bits[si] = entry;
                rec.record(p_commit.t, "Bc", p_commit, "verdict", "verdict" + std::to_string(i),
                           outcome_name(entry.outcome) + ";stat=" + fmt_g(entry.statistic), -1,
                           bc_recvs);
            }
        }
    });

    // --- Unveiling at Q_i: reveal the full string ----------------------------
    for (int i = 0; i < 2; ++i) {
        const auto si = static_cast<std::size_t>(i);
        if (!will_unveil[si]) continue;
        rec.loop.schedule(q[si].t, agent_order("A" + std::to_string(i)), [&, i, si] {
            st.id_emit_u[si] =
                rec.record(q[si].t, "A" + std::to_string(i), q[si], "emit",
                           "U" + std::to_string(i), st.s[si].str(), -1, {st.id_recv_s[si]});
        });
    }

    // --- Verifier receptions and verdicts ------------------------------------
    for (int i = 0; i < 2; ++i) {
        const auto si = static_cast<std::size_t>(i);
        const std::string vi = "V" + std::to_string(i);
        const auto v_point = verdicts_at[si];
        auto schedule_recv = [&](const geometry::SpacetimePoint& from, const int* emit_id) {
            const double arrival =
                std::min(from.t + geometry::spatial_distance(from, v_point), v_point.t);
            rec.loop.schedule(arrival, agent_order(vi),
                              [&rec, &st, si, vi, v_point, from, arrival, emit_id] {
                const auto target = at_position_of(arrival, v_point);
                st.verdict_deps[si].push_back(
                    rec.receive(vi, from, target,
                                rec.transcript.events[static_cast<std::size_t>(*emit_id)]));
            });
        };
        schedule_recv(p_commit, &st.id_emit_j);
        schedule_recv(p_commit, &st.id_emit_s0j);
        schedule_recv(p_commit, &st.id_emit_s1j);
        schedule_recv(p_commit, &st.id_emit_sjbar);
        if (will_unveil[si]) schedule_recv(q[si], &st.id_emit_u[si]);

        rec.loop.schedule(v_point.t, agent_order(vi), [&, i, si, v_point, vi] {
            if (st.rejected_at_commit) return;  // B_c already rejected at P
            VerdictEntry entry;
            entry.where = v_point;
            entry.statistic = st.labeled_distance;
            if (!will_unveil[si]) {
                entry.outcome = Outcome::NotUnveiled;
                entry.statistic = 0.0;
                entry.reason = "agent did not unveil";
            } else {
                const auto& labeled = (i == 0) ? st.claims.s0_j : st.claims.s1_j;
                bool consistent = true;
                for (unsigned k = 0; k < half; ++k) {
                    if (labeled.get(k) != st.s[si].get(st.subset[k])) consistent = false;
                    if (st.claims.s_jbar.get(k) != st.s[si].get(st.complement[k])) {
                        consistent = false;
                    }
                }
                entry.outcome = consistent ? Outcome::Accepted : Outcome::Rejected;
                entry.reason = consistent ? "claims consistent with unveiled string"
                                          : "claims inconsistent with unveiled string";
            }
            result.verdict.bits[si] = entry;
            rec.record(v_point.t, vi, v_point, "verdict", "verdict" + std::to_string(i),
                       outcome_name(entry.outcome) + ";stat=" + fmt_g(entry.statistic), -1,
                       st.verdict_deps[si]);
        });
    }

    rec.loop.run();
    result.transcript = std::move(rec.transcript);
    return result;
}

DualResult run_dual(const ProtocolConfig& config, const DualIntent& intent) {
    config.validate();
    if (config.variant == Variant::RCCBC) {
        throw std::invalid_argument("run_dual: dual mode applies to CHSH variants only");
    }
    std::array<int, 2> bits{};
    if (intent.commit_bit) {
        bits = {*intent.commit_bit, *intent.commit_bit};
        if (bits[0] != 0 && bits[0] != 1) {
            throw std::invalid_argument("run_dual: commit_bit must be 0 or 1");
        }
    } else {
        auto eng = rng::make_engine(config.seed, rng::kProtocol);
        const int c = rng::uniform_bit(eng);
        bits = {c, c ^ 1};
    }

    DualResult dual;
    std::array<RunResult*, 2> runs{&dual.run_a, &dual.run_b};
    for (int k = 0; k < 2; ++k) {
        ProtocolConfig sub = config;
        sub.dual = false;
        sub.seed = rng::derive(config.seed, rng::kDualRun, static_cast<std::uint64_t>(k));
        Decisions dec;
        dec.commit_bit = bits[static_cast<std::size_t>(k)];
        dec.unveil0 = dec.unveil1 = intent.unveil;
        *runs[static_cast<std::size_t>(k)] = run_chsh_variant(sub, dec);
    }

    dual.pre_unveil_view.fields["variant"] = variant_name(config.variant);
    dual.pre_unveil_view.fields["dual"] = "1";
    for (const auto& [k, v] : dual.run_a.pre_unveil_view.fields) {
        if (k != "variant") dual.pre_unveil_view.fields["A." + k] = v;
    }
    for (const auto& [k, v] : dual.run_b.pre_unveil_view.fields) {
        if (k != "variant") dual.pre_unveil_view.fields["B." + k] = v;
    }

    for (int i = 0; i < 2; ++i) {
        const auto si = static_cast<std::size_t>(i);
        const auto& a = dual.run_a.verdict.bits[si];
        const auto& b = dual.run_b.verdict.bits[si];
        VerdictEntry entry;
        entry.where = a.where;
        entry.statistic = std::min(a.statistic, b.statistic);
        if (a.outcome == Outcome::Accepted && b.outcome == Outcome::Accepted) {
            entry.outcome = Outcome::Accepted;
            entry.reason = "both runs accepted";
        } else if (a.outcome == Outcome::NotUnveiled && b.outcome == Outcome::NotUnveiled) {
            entry.outcome = Outcome::NotUnveiled;
            entry.reason = "neither run unveiled";
        } else {
            entry.outcome = Outcome::Rejected;
            entry.reason = "runs disagree or fail";
        }
        dual.combined.bits[si] = entry;
    }
    return dual;
}

RunResult run_protocol(const ProtocolConfig& config, const Decisions& decisions,
                       const AdversaryOverride& override_, const DeviceSetup* setup) {
    if (config.dual) {
        DualIntent intent;
        intent.commit_bit = decisions.commit_bit;
        intent.unveil = decisions.unveil0 && decisions.unveil1;
        auto dual = run_dual(config, intent);
        RunResult merged;
        merged.verdict = dual.combined;
        merged.state = dual.run_a.state;
        merged.pre_unveil_view = dual.pre_unveil_view;
        // Interleave the two transcripts by time for a single readable log;
        // ids are re-keyed and references remapped run by run.
        struct Tagged {
            int run;
            TranscriptEvent ev;
        };
        std::vector<Tagged> all;
        auto tag = [&](const Transcript& t, int run, const char* prefix) {
            for (auto ev : t.events) {
                ev.agent = std::string(prefix) + ev.agent;
                all.push_back({run, std::move(ev)});
            }
        };
        tag(dual.run_a.transcript, 0, "1:");
        tag(dual.run_b.transcript, 1, "2:");
        std::stable_sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
            return a.ev.time < b.ev.time;
        });
        std::array<std::vector<int>, 2> remap;
        remap[0].resize(dual.run_a.transcript.events.size());
        remap[1].resize(dual.run_b.transcript.events.size());
        for (std::size_t k = 0; k < all.size(); ++k) {
            remap[static_cast<std::size_t>(all[k].run)][static_cast<std::size_t>(all[k].ev.id)] =
                static_cast<int>(k);
        }
        for (std::size_t k = 0; k < all.size(); ++k) {
            auto ev = std::move(all[k].ev);
            const auto& m = remap[static_cast<std::size_t>(all[k].run)];
            ev.id = static_cast<int>(k);
            if (ev.source_id >= 0) ev.source_id = m[static_cast<std::size_t>(ev.source_id)];
            for (auto& d : ev.deps) d = m[static_cast<std::size_t>(d)];
            merged.transcript.events.push_back(std::move(ev));
        }
        return merged;
    }
    if (config.variant == Variant::RCCBC) return run_rccbc(config, decisions, override_);
    return run_chsh_variant(config, decisions, override_, setup);
}

}  // namespace relbc::protocols
