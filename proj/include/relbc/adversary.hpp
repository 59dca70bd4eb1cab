#pragma once

/// Cheating-strategy representations and exact brute-force oracles for small
/// N, used to validate the analytic security bounds.

#include <cstdint>
#include <vector>

#include "relbc/bitmath.hpp"

namespace relbc::adversary {

/// Canonical reduced form of a deterministic collective CHSH cheat. Only
/// O0 XOR O and O1 XOR O enter the verification conditions, so strategies are
/// quotiented by the constant O0: d_offset is D = O0 XOR O1 and response maps
/// each challenge L to O' = O XOR O0.
struct ReducedStrategy {
    bitmath::BitString d_offset;
    std::vector<bitmath::BitString> response;  // index = integer value of L
};

struct StrategyValue {
    double p0 = 0.0;
    double p1 = 0.0;
    double epsilon() const { return p0 + p1 - 1.0; }
};

/// p_i = 2^-N * |{L : condition i holds}| where condition 0 is
/// d(O'(L), L0&L) <= pass limit and condition 1 is d(O'(L) xor D, L1&L) <=
/// pass limit, L1 = complement(L0).
StrategyValue evaluate_chsh_strategy(const ReducedStrategy& strategy,
                                     const bitmath::BitString& l0, double xi);

struct ChshSearchResult {
    double epsilon_star = 0.0;
    ReducedStrategy best;
};

/// Exact maximum of p0 + p1 - 1 over all reduced strategies. Outer loop over
/// D; the per-L response choice is independent across L, which keeps the
/// search at 2^N * 2^N * 2^N instead of doubly exponential. Ties broken by
/// lexicographically smallest D, then smallest response table (string order).
/// Throws when n exceeds the cap.
ChshSearchResult brute_force_epsilon_chsh(unsigned n, double xi,
                                          const bitmath::BitString& l0,
                                          unsigned cap = 8);

/// Fully randomized variant: A_0/A_1 receive independent uniform challenges
/// and answer with per-challenge tables. Enumerates all deterministic
/// committer tables (global-XOR gauge fixed) with per-challenge unveiler
/// optimization. Small n only.
double brute_force_epsilon_chsh3(unsigned n, double xi, unsigned cap = 3);

/// Random-code protocol cheat: the unveilers hold constants s0/s1 and the
/// committer answers each subset challenge with labeled claims plus one
/// unlabeled complement string.
struct RccbcStrategy {
    bitmath::BitString s0_full, s1_full;

    struct Claims {
        bitmath::BitString s0_j;    // bits of s0 at J, ascending positions
        bitmath::BitString s1_j;    // bits of s1 at J
        bitmath::BitString s_jbar;  // the unlabeled claim on the complement
    };
    /// The committer response for subset J (ascending position list):
    /// truthful labeled claims; the unlabeled claim follows both strings
    /// where they agree and otherwise the preferred unveiling bit's string.
    Claims claims_for(const std::vector<unsigned>& subset_j, int preferred_bit = 0) const;
};

struct RccbcSearchResult {
    double epsilon_star = 0.0;
    RccbcStrategy best;
};

/// Exact maximum of p0 + p1 - 1 over RccbcStrategies: per subset the
/// committer salvages a single acceptance whenever possible, so the double
/// acceptance requires agreement on the complement plus the distance-window
/// test on J. Enumerates s1 with s0 = 0 (XOR symmetry), all subsets.
RccbcSearchResult brute_force_epsilon_rccbc(unsigned n, double c_param, unsigned cap = 12);

/// Optimal p0 + p1 - 1 over all no-signalling joint conditionals
/// p(O, O0, O1 | L) with p(O0, O1 | L) independent of L, via exact rational
/// two-phase simplex. Exponential in n; capped at n <= 2.
double evaluate_nosignalling_lp(unsigned n, double xi, const bitmath::BitString& l0);

}  // namespace relbc::adversary
