// Command-line front end: scenario execution, bound tables, brute-force
// sweeps, hiding estimates, and transcript audits. Data goes to stdout as
// key=value reports or CSV; human-readable summaries go to stderr.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relbc/adversary.hpp"
#include "relbc/bitmath.hpp"
#include "relbc/config.hpp"
#include "relbc/harness.hpp"
#include "relbc/protocols.hpp"
#include "relbc/rng.hpp"
#include "relbc/sim.hpp"

namespace {

constexpr const char* kVersion = "relbc 1.0.0";

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Every command is seeded: an explicit --seed wins, then a nonzero scenario
// seed, then entropy (echoed in the report so the run can be replayed).
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed,
                           std::uint64_t scenario_seed) {
    if (flag_seed) return *flag_seed;
    if (scenario_seed != 0) return scenario_seed;
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

struct ScenarioOptions {
    std::string builtin = "honest-chsh1";
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> n;
    std::optional<double> xi;
    std::optional<double> c_param;
    std::optional<double> delta;
    std::optional<unsigned> repeat;
    unsigned jobs = 1;

    void attach(CLI::App& cmd) {
        auto* scenario_opt =
            cmd.add_option("--scenario", builtin,
                           "Builtin scenario name (see `run --list`)")
                ->capture_default_str();
        cmd.add_option("--config", config_path, "Scenario config file (JSON)")
            ->excludes(scenario_opt);
        cmd.add_option("--seed", seed, "Master seed (overrides the scenario's)");
        cmd.add_option("--n", n, "Override block length N");
        cmd.add_option("--xi", xi, "Override CHSH robustness parameter");
        cmd.add_option("--c", c_param, "Override the random-code window constant C");
        cmd.add_option("--delta", delta, "Override device error/loss rate");
        cmd.add_option("--repeat", repeat, "Override the trial count");
        cmd.add_option("--jobs", jobs, "Worker threads for independent trials")
            ->capture_default_str();
    }

    relbc::harness::Scenario resolve() const {
        relbc::harness::Scenario sc = config_path.empty()
                                          ? relbc::harness::builtin_scenario(builtin)
                                          : relbc::config::load_scenario_file(config_path);
        if (n) sc.config.n = *n;
        if (xi) sc.config.xi = *xi;
        if (c_param) sc.config.c_param = *c_param;
        if (delta) sc.config.delta = *delta;
        if (repeat) sc.repeat = *repeat;
        sc.config.seed = resolve_seed(seed, sc.config.seed);
        return sc;
    }
};

void write_text_file(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

int cmd_run(const ScenarioOptions& opts, const std::string& transcript_path,
            const std::string& out_path, bool per_trial) {
    const relbc::harness::Scenario sc = opts.resolve();
    const relbc::harness::ScenarioResult result = relbc::harness::run_scenario(sc, opts.jobs);
    const auto& st = result.stats;

    std::ostringstream rep;
    rep << "report=relbc-run/1\n";
    rep << "version=" << kVersion << "\n";
    rep << "scenario=" << (sc.name.empty() ? "(file)" : sc.name) << "\n";
    rep << "variant=" << relbc::protocols::variant_name(sc.config.variant) << "\n";
    const char* flow = sc.flow == relbc::harness::Flow::Single ? "single"
                       : sc.flow == relbc::harness::Flow::Dual ? "dual"
                                                               : "memory-reuse";
    rep << "flow=" << flow << "\n";
    rep << "n=" << sc.config.n << "\n";
    rep << "xi=" << fmt_g(sc.config.xi) << "\n";
    rep << "c_param=" << fmt_g(sc.config.c_param) << "\n";
    rep << "delta=" << fmt_g(sc.config.delta) << "\n";
    rep << "loss_fraction=" << fmt_g(sc.config.loss_fraction) << "\n";
    rep << "travel_speed=" << fmt_g(sc.config.travel_speed) << "\n";
    rep << "seed=" << sc.config.seed << "\n";
    rep << "jobs=" << opts.jobs << "\n";
    rep << "trials=" << st.trials << "\n";
    for (int i = 0; i < 2; ++i) {
        const auto si = static_cast<std::size_t>(i);
        rep << "accepted_bit" << i << "=" << st.accepted[si] << "\n";
        rep << "rejected_bit" << i << "=" << st.rejected[si] << "\n";
        rep << "not_unveiled_bit" << i << "=" << st.not_unveiled[si] << "\n";
        rep << "mean_statistic_bit" << i << "=" << fmt_g(st.mean_statistic[si]) << "\n";
    }
    rep << "committed_bit_accepts=" << st.committed_bit_accepts << "\n";
    rep << "other_bit_accepts=" << st.other_bit_accepts << "\n";
    rep << "committed_accept_rate="
        << fmt_g(static_cast<double>(st.committed_bit_accepts) / st.trials) << "\n";
    if (sc.config.variant != relbc::protocols::Variant::RCCBC) {
        const auto bound = relbc::bitmath::epsilon_bound(sc.config.n, sc.config.xi);
        rep << "bound_r_over_n=" << fmt_g(bound.r_over_n) << "\n";
        rep << "bound_entropy=" << fmt_g(bound.entropy) << "\n";
        rep << "bound_epsilon=" << fmt_g(bound.epsilon) << "\n";
    }
    if (st.hiding) {
        rep << "hiding_advantage=" << fmt_g(st.hiding->advantage) << "\n";
        rep << "hiding_std_error=" << fmt_g(st.hiding->std_error) << "\n";
        rep << "hiding_samples0=" << st.hiding->samples[0] << "\n";
        rep << "hiding_samples1=" << st.hiding->samples[1] << "\n";
    }
    if (per_trial) {
        rep << "trial,bit0,statistic0,bit1,statistic1\n";
        std::size_t trial = 0;
        const std::size_t stride = result.runs.size() / st.trials;
        for (std::size_t k = 0; k + stride <= result.runs.size(); k += stride, ++trial) {
            // For two-run flows the second run of the pair carries the verdict
            // that was accounted (dual runs share the combined verdict).
            const auto& v = result.runs[k + stride - 1].verdict;
            rep << trial << ',' << relbc::protocols::outcome_name(v.bits[0].outcome) << ','
                << fmt_g(v.bits[0].statistic) << ','
                << relbc::protocols::outcome_name(v.bits[1].outcome) << ','
                << fmt_g(v.bits[1].statistic) << "\n";
        }
    }

    if (out_path.empty() || out_path == "-") {
        std::cout << rep.str();
    } else {
        write_text_file(out_path, rep.str());
    }
    if (!transcript_path.empty() && !result.runs.empty()) {
        write_text_file(transcript_path, result.runs.front().transcript.render());
    }

    std::cerr << (sc.name.empty() ? std::string("scenario") : sc.name) << ": " << st.trials
              << " trials, committed bit accepted " << st.committed_bit_accepts << "/"
              << st.trials;
    if (st.hiding) std::cerr << ", hiding advantage " << fmt_g(st.hiding->advantage);
    std::cerr << ", seed " << sc.config.seed << "\n";
    return 0;
}

int cmd_bounds(const std::vector<unsigned>& n_list, const std::vector<double>& xi_list) {
    for (const double xi : xi_list) {
        if (!(xi >= 0.0) || xi >= relbc::bitmath::xi_upper_limit()) {
            std::cerr << "bounds: xi=" << fmt_g(xi)
                      << " rejected: the mismatch fraction must stay below 1/2, which "
                         "requires 0 <= xi < "
                      << fmt_g(relbc::bitmath::xi_upper_limit()) << "\n";
            return 1;
        }
    }
    std::cout << "n,xi,r_over_n,entropy,epsilon\n";
    for (const unsigned n : n_list) {
        for (const double xi : xi_list) {
            const auto b = relbc::bitmath::epsilon_bound(n, xi);
            std::cout << n << ',' << fmt_g(xi) << ',' << fmt_g(b.r_over_n) << ','
                      << fmt_g(b.entropy) << ',' << fmt_g(b.epsilon) << "\n";
        }
    }
    return 0;
}

int cmd_bruteforce(const std::string& variant, unsigned n_min, unsigned n_max, double xi,
                   double c_param, const std::string& l0_text, unsigned cap) {
    if (n_min == 0 || n_max < n_min) {
        std::cerr << "bruteforce: need 1 <= n-min <= n-max\n";
        return 1;
    }
    std::cout << "variant,n,xi_or_c,epsilon_star,bound,gap,runtime_ms\n";
    bool bound_violated = false;
    for (unsigned n = n_min; n <= n_max; ++n) {
        const auto start = std::chrono::steady_clock::now();
        double epsilon_star = 0.0;
        std::optional<double> bound;
        double xi_or_c = xi;
        if (variant == "chsh1") {
            const auto l0 = l0_text.empty() ? relbc::bitmath::BitString::zeros(n)
                                            : relbc::bitmath::BitString::parse(l0_text);
            if (l0.size() != n) {
                std::cerr << "bruteforce: --l0 must have length n=" << n << "\n";
                return 1;
            }
            epsilon_star = relbc::adversary::brute_force_epsilon_chsh(n, xi, l0, cap).epsilon_star;
            bound = relbc::bitmath::epsilon_bound(n, xi).epsilon;
        } else if (variant == "chsh3") {
            // The fully randomized oracle is only feasible up to n = 3.
            epsilon_star = relbc::adversary::brute_force_epsilon_chsh3(n, xi, std::min(cap, 3u));
            bound = relbc::bitmath::epsilon_bound(n, xi).epsilon;
        } else if (variant == "rccbc") {
            if (n % 2 != 0) continue;  // the random-code oracle needs an even split
            epsilon_star = relbc::adversary::brute_force_epsilon_rccbc(n, c_param, cap).epsilon_star;
            xi_or_c = c_param;
        } else {
            std::cerr << "bruteforce: unknown variant '" << variant
                      << "' (expected chsh1|chsh3|rccbc)\n";
            return 1;
        }
        const auto stop = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
        std::cout << variant << ',' << n << ',' << fmt_g(xi_or_c) << ',' << fmt_g(epsilon_star)
                  << ',' << (bound ? fmt_g(*bound) : std::string()) << ','
                  << (bound ? fmt_g(*bound - epsilon_star) : std::string()) << ',' << fmt_g(ms)
                  << "\n";
        if (bound && epsilon_star > *bound) {
            std::cerr << "bruteforce: epsilon_star exceeds the analytic bound at n=" << n << "\n";
            bound_violated = true;
        }
    }
    return bound_violated ? 2 : 0;
}

int cmd_hiding(const ScenarioOptions& opts) {
    const relbc::harness::Scenario sc = opts.resolve();
    const relbc::harness::ScenarioResult result = relbc::harness::run_scenario(sc, opts.jobs);
    if (!result.stats.hiding) {
        std::cerr << "hiding: scenario produced fewer than two views per label; enable "
                     "randomize_commit_bit/randomize_decline or raise --repeat\n";
        return 1;
    }
    const auto& h = *result.stats.hiding;
    std::cout << "scenario,seed,samples0,samples1,advantage,std_error\n";
    std::cout << (sc.name.empty() ? "(file)" : sc.name) << ',' << sc.config.seed << ','
              << h.samples[0] << ',' << h.samples[1] << ',' << fmt_g(h.advantage) << ','
              << fmt_g(h.std_error) << "\n";
    std::cerr << "hiding advantage " << fmt_g(h.advantage) << " +/- " << fmt_g(h.std_error)
              << " from " << (h.samples[0] + h.samples[1]) << " views, seed " << sc.config.seed
              << "\n";
    return 0;
}

// Inverse of Transcript::render, so externally produced transcripts can be
// audited. Throws std::invalid_argument naming the offending line.
relbc::protocols::Transcript parse_transcript_text(const std::string& text) {
    relbc::protocols::Transcript transcript;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto bad = [&](const std::string& what) -> std::invalid_argument {
        return std::invalid_argument("transcript line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t) tok.push_back(t);
        if (tok.size() != 9) throw bad("expected 9 fields, got " + std::to_string(tok.size()));
        relbc::protocols::TranscriptEvent e;
        try {
            if (tok[0].empty() || tok[0][0] != 'e') throw std::invalid_argument("id");
            e.id = std::stoi(tok[0].substr(1));
            if (tok[1].rfind("t=", 0) != 0) throw std::invalid_argument("time");
            e.time = std::stod(tok[1].substr(2));
            e.agent = tok[2];
            if (tok[3].size() < 4 || tok[3].rfind("@(", 0) != 0 || tok[3].back() != ')')
                throw std::invalid_argument("point");
            std::istringstream ps(tok[3].substr(2, tok[3].size() - 3));
            char comma = ',';
            ps >> e.point.t >> comma >> e.point.x >> comma >> e.point.y >> comma >> e.point.z;
            if (!ps) throw std::invalid_argument("point");
            e.type = tok[4];
            e.label = tok[5];
            if (tok[6].rfind("payload=", 0) != 0) throw std::invalid_argument("payload");
            e.payload = tok[6].substr(8);
            if (e.payload == "-") e.payload.clear();
            if (tok[7].rfind("src=", 0) != 0) throw std::invalid_argument("src");
            e.source_id = tok[7].substr(4) == "-" ? -1 : std::stoi(tok[7].substr(4));
            if (tok[8].rfind("deps=", 0) != 0) throw std::invalid_argument("deps");
            if (const std::string deps = tok[8].substr(5); deps != "-") {
                std::istringstream ds(deps);
                std::string item;
                while (std::getline(ds, item, ',')) e.deps.push_back(std::stoi(item));
            }
        } catch (const std::exception& ex) {
            throw bad(std::string("malformed field: ") + ex.what());
        }
        transcript.events.push_back(std::move(e));
    }
    return transcript;
}

int cmd_audit(const ScenarioOptions& opts, const std::string& file) {
    std::vector<std::pair<std::string, relbc::protocols::Transcript>> transcripts;
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) {
            std::cerr << "audit: cannot open " << file << "\n";
            return 1;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        transcripts.emplace_back(file, parse_transcript_text(buf.str()));
    } else {
        const relbc::harness::Scenario sc = opts.resolve();
        const auto result = relbc::harness::run_scenario(sc, opts.jobs);
        for (std::size_t k = 0; k < result.runs.size(); ++k) {
            transcripts.emplace_back(sc.name + "[" + std::to_string(k) + "]",
                                     result.runs[k].transcript);
        }
    }

    std::size_t failures = 0;
    for (const auto& [name, transcript] : transcripts) {
        const auto report = relbc::harness::audit_no_signalling(transcript);
        if (report.pass) {
            std::cout << name << ",pass,0\n";
        } else {
            std::cout << name << ",fail," << report.violations.size() << "\n";
            for (const auto& v : report.violations) std::cerr << name << ": " << v << "\n";
            ++failures;
        }
    }
    std::cerr << "audited " << transcripts.size() << " transcript(s), " << failures
              << " failed\n";
    return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relativistic bit-commitment simulator and bound checker"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Execute a scenario and print a report");
    ScenarioOptions run_opts;
    run_opts.attach(*run);
    std::string run_transcript, run_out;
    bool run_per_trial = false;
    bool run_list = false;
    run->add_option("--transcript", run_transcript,
                    "Write the first trial's transcript to this file ('-' = stdout)");
    run->add_option("--out", run_out, "Write the report to this file instead of stdout");
    run->add_flag("--per-trial", run_per_trial, "Append a per-trial verdict CSV to the report");
    run->add_flag("--list", run_list, "List builtin scenarios and exit");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "Analytic binding-bound table (CSV)");
    std::vector<unsigned> bounds_n;
    std::vector<double> bounds_xi{0.02, 0.05, 0.10};
    bounds->add_option("--n", bounds_n, "Block lengths")->required();
    bounds->add_option("--xi", bounds_xi, "Robustness parameters")->capture_default_str();

    // bruteforce
    auto* brute = app.add_subcommand("bruteforce", "Exact small-N cheating optimum (CSV)");
    std::string brute_variant = "chsh1";
    unsigned brute_min = 1, brute_max = 6, brute_cap = 12;
    double brute_xi = 0.05, brute_c = 0.5;
    std::string brute_l0;
    brute->add_option("--variant", brute_variant, "chsh1|chsh3|rccbc")->capture_default_str();
    brute->add_option("--n-min", brute_min, "Smallest N")->capture_default_str();
    brute->add_option("--n-max", brute_max, "Largest N")->capture_default_str();
    brute->add_option("--xi", brute_xi, "CHSH robustness parameter")->capture_default_str();
    brute->add_option("--c", brute_c, "Random-code window constant")->capture_default_str();
    brute->add_option("--l0", brute_l0, "Pre-agreed challenge bits (chsh1; default all zero)");
    brute->add_option("--cap", brute_cap, "Oracle size cap")->capture_default_str();

    // hiding
    auto* hiding = app.add_subcommand("hiding", "Hiding-advantage estimate for a scenario (CSV)");
    ScenarioOptions hiding_opts;
    hiding_opts.attach(*hiding);

    // audit
    auto* audit = app.add_subcommand("audit", "No-signalling audit of transcripts");
    ScenarioOptions audit_opts;
    audit_opts.attach(*audit);
    std::string audit_file;
    audit->add_option("--file", audit_file, "Audit a rendered transcript file instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) {
            if (run_list) {
                for (const auto& name : relbc::harness::builtin_scenario_names()) {
                    std::cout << name << "\n";
                }
                return 0;
            }
            return cmd_run(run_opts, run_transcript, run_out, run_per_trial);
        }
        if (bounds->parsed()) return cmd_bounds(bounds_n, bounds_xi);
        if (brute->parsed()) {
            return cmd_bruteforce(brute_variant, brute_min, brute_max, brute_xi, brute_c,
                                  brute_l0, brute_cap);
        }
        if (hiding->parsed()) return cmd_hiding(hiding_opts);
        if (audit->parsed()) return cmd_audit(audit_opts, audit_file);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "fault: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
