#include "relbc/adversary.hpp"

#include <bit>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "relbc/simplex.hpp"

namespace relbc::adversary {

using bitmath::BitString;

namespace {

int popcount64(std::uint64_t v) { return std::popcount(v); }

// Walks 0..2^n-1 in the string-lexicographic order of the corresponding
// bitstrings (index 0 renders first), i.e. ascending bit-reversed value.
std::uint64_t bit_reverse(std::uint64_t v, unsigned n) {
    std::uint64_t r = 0;
    for (unsigned j = 0; j < n; ++j) {
        r = (r << 1) | ((v >> j) & 1ULL);
    }
    return r;
}

long long pass_limit_or_throw(unsigned n, double xi) {
    if (n == 0) throw std::invalid_argument("adversary: n must be >= 1");
    return bitmath::mismatch_pass_limit(n, xi);
}

}  // namespace

StrategyValue evaluate_chsh_strategy(const ReducedStrategy& strategy,
                                     const BitString& l0, double xi) {
    const unsigned n = static_cast<unsigned>(l0.size());
    const long long t = pass_limit_or_throw(n, xi);
    const std::uint64_t count = 1ULL << n;
    if (strategy.response.size() != count) {
        throw std::invalid_argument("evaluate_chsh_strategy: response table must cover all L");
    }
    if (strategy.d_offset.size() != n) {
        throw std::invalid_argument("evaluate_chsh_strategy: d_offset length mismatch");
    }
    const std::uint64_t mask = (n == 64) ? ~0ULL : ((1ULL << n) - 1);
    const std::uint64_t l0bits = l0.to_bits();
    const std::uint64_t d = strategy.d_offset.to_bits();
    std::uint64_t hits0 = 0, hits1 = 0;
    for (std::uint64_t l = 0; l < count; ++l) {
        if (strategy.response[l].size() != n) {
            throw std::invalid_argument("evaluate_chsh_strategy: response entry length mismatch");
        }
        const std::uint64_t o = strategy.response[l].to_bits();
        if (popcount64(o ^ (l0bits & l)) <= t) ++hits0;
        if (popcount64(o ^ d ^ (~l0bits & mask & l)) <= t) ++hits1;
    }
    const double denom = static_cast<double>(count);
    return {static_cast<double>(hits0) / denom, static_cast<double>(hits1) / denom};
}

ChshSearchResult brute_force_epsilon_chsh(unsigned n, double xi, const BitString& l0,
                                          unsigned cap) {
    if (n == 0 || n > cap || cap > 20) {
        throw std::invalid_argument("brute_force_epsilon_chsh: n out of range");
    }
    if (l0.size() != n) {
        throw std::invalid_argument("brute_force_epsilon_chsh: l0 length mismatch");
    }
    const long long t = pass_limit_or_throw(n, xi);
    const std::uint64_t count = 1ULL << n;
    const std::uint64_t mask = count - 1;
    const std::uint64_t l0bits = l0.to_bits();

    long long best_total = -1;
    std::uint64_t best_d = 0;
    std::vector<std::uint64_t> best_table(count, 0);
    std::vector<std::uint64_t> table(count, 0);

    for (std::uint64_t drank = 0; drank < count; ++drank) {
        const std::uint64_t d = bit_reverse(drank, n);
        long long total = 0;
        for (std::uint64_t l = 0; l < count; ++l) {
            const std::uint64_t a = l0bits & l;          // target for condition 0
            const std::uint64_t b = (~l0bits & mask) & l;  // target for condition 1
            int best_cell = -1;
            std::uint64_t best_o = 0;
            for (std::uint64_t orank = 0; orank < count; ++orank) {
                const std::uint64_t o = bit_reverse(orank, n);
                const int cell = (popcount64(o ^ a) <= t ? 1 : 0) +
                                 (popcount64(o ^ d ^ b) <= t ? 1 : 0);
                if (cell > best_cell) {
                    best_cell = cell;
                    best_o = o;
                    if (cell == 2) break;
                }
            }
            table[l] = best_o;
            total += best_cell;
        }
        if (total > best_total) {
            best_total = total;
            best_d = d;
            best_table = table;
        }
    }

    ChshSearchResult result;
    result.epsilon_star = static_cast<double>(best_total) / static_cast<double>(count) - 1.0;
    result.best.d_offset = BitString::from_bits(best_d, n);
    result.best.response.reserve(count);
    for (std::uint64_t l = 0; l < count; ++l) {
        result.best.response.push_back(BitString::from_bits(best_table[l], n));
    }
    return result;
}

double brute_force_epsilon_chsh3(unsigned n, double xi, unsigned cap) {
    if (n == 0 || n > cap || cap > 3) {
        throw std::invalid_argument("brute_force_epsilon_chsh3: n out of range");
    }
    const long long t = pass_limit_or_throw(n, xi);
    const std::uint64_t count = 1ULL << n;

    // Committer tables O(L) with the global-XOR gauge O(0) = 0: shifting
    // every entry by a constant is absorbed into the unveilers' responses.
    const std::uint64_t digits = count - 1;  // free table entries
    std::vector<std::uint64_t> o_table(count, 0);

    // For a fixed committer table, each unveiler optimizes per received
    // challenge L' independently, and both unveilers face the same problem:
    //   per L', pick w maximizing |{L : d(w xor O(L), L' & L) <= t}|.
    long long best_score = -1;
    for (;;) {
        long long score = 0;  // sum over L' of the best per-challenge count
        for (std::uint64_t lp = 0; lp < count; ++lp) {
            long long best_w = 0;
            for (std::uint64_t w = 0; w < count; ++w) {
                long long cnt = 0;
                for (std::uint64_t l = 0; l < count; ++l) {
                    if (popcount64(w ^ o_table[l] ^ (lp & l)) <= t) ++cnt;
                }
                if (cnt > best_w) best_w = cnt;
            }
            score += best_w;
        }
        if (score > best_score) best_score = score;

        // Next table in mixed-radix order (entry 0 pinned to the gauge).
        std::uint64_t k = 1;
        while (k <= digits && ++o_table[k] == count) {
            o_table[k] = 0;
            ++k;
        }
        if (k > digits) break;
    }

    // p0 + p1 = 2 * score / 2^{2n}; epsilon = that minus 1.
    const double denom = static_cast<double>(count) * static_cast<double>(count);
    return 2.0 * static_cast<double>(best_score) / denom - 1.0;
}

RccbcStrategy::Claims RccbcStrategy::claims_for(const std::vector<unsigned>& subset_j,
                                                int preferred_bit) const {
    const std::size_t n = s0_full.size();
    if (s1_full.size() != n) throw std::invalid_argument("RccbcStrategy: string length mismatch");
    std::vector<bool> in_j(n, false);
    for (unsigned j : subset_j) {
        if (j >= n) throw std::out_of_range("RccbcStrategy: subset position out of range");
        in_j[j] = true;
    }
    Claims claims;
    claims.s0_j = BitString(subset_j.size());
    claims.s1_j = BitString(subset_j.size());
    for (std::size_t k = 0; k < subset_j.size(); ++k) {
        claims.s0_j.set(k, s0_full.get(subset_j[k]));
        claims.s1_j.set(k, s1_full.get(subset_j[k]));
    }
    claims.s_jbar = BitString(n - subset_j.size());
    const BitString& pref = preferred_bit == 0 ? s0_full : s1_full;
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!in_j[j]) claims.s_jbar.set(k++, pref.get(j));
    }
    return claims;
}

RccbcSearchResult brute_force_epsilon_rccbc(unsigned n, double c_param, unsigned cap) {
    if (n < 2 || n % 2 != 0 || n > cap || cap > 24) {
        throw std::invalid_argument("brute_force_epsilon_rccbc: n out of range");
    }
    if (!(c_param > 0.0)) {
        throw std::invalid_argument("brute_force_epsilon_rccbc: C must be > 0");
    }

    // Enumerate all size-n/2 subsets as bitmasks.
    std::vector<std::uint64_t> subsets;
    const std::uint64_t full = 1ULL << n;
    for (std::uint64_t j = 0; j < full; ++j) {
        if (static_cast<unsigned>(popcount64(j)) == n / 2) subsets.push_back(j);
    }

    // A single acceptance is salvageable by faking the other labeled claim
    // whenever some integer distance in [0, n/2] passes the window at all;
    // if none does, every run rejects both bits and epsilon* = -1.
    bool salvageable = false;
    for (unsigned k = 0; k <= n / 2 && !salvageable; ++k) {
        salvageable = bitmath::rccbc_distance_window(k, n, c_param);
    }
    RccbcSearchResult result;
    result.best.s0_full = BitString(n);
    result.best.s1_full = BitString(n);
    if (!salvageable) {
        result.epsilon_star = -1.0;
        return result;
    }

    // WLOG s0 = 0 (XOR both strings by s0): enumerate w = s0 xor s1. With the
    // salvage guaranteed, the double-acceptance surplus per subset J is
    // [all ones of w inside J] and [d(s0_J, s1_J) = weight(w) in the window].
    double best = -1.0;
    std::uint64_t best_w = 0;
    for (std::uint64_t w = 0; w < full; ++w) {
        const unsigned weight = static_cast<unsigned>(popcount64(w));
        if (!bitmath::rccbc_distance_window(weight, n, c_param)) continue;
        std::uint64_t hits = 0;
        for (const std::uint64_t j : subsets) {
            if ((w & ~j) == 0) ++hits;
        }
        const double eps = static_cast<double>(hits) / static_cast<double>(subsets.size());
        if (eps > best ||
            (eps == best && bit_reverse(w, n) < bit_reverse(best_w, n))) {
            best = eps;
            best_w = w;
        }
    }
    result.epsilon_star = best < 0.0 ? 0.0 : best;
    result.best.s1_full = BitString::from_bits(best_w, n);
    return result;
}

double evaluate_nosignalling_lp(unsigned n, double xi, const BitString& l0) {
    if (n == 0 || n > 2) {
        throw std::invalid_argument("evaluate_nosignalling_lp: n must be 1 or 2");
    }
    if (l0.size() != n) {
        throw std::invalid_argument("evaluate_nosignalling_lp: l0 length mismatch");
    }
    const long long t = pass_limit_or_throw(n, xi);
    const std::uint64_t count = 1ULL << n;
    const std::uint64_t mask = count - 1;
    const std::uint64_t l0bits = l0.to_bits();

    using Int = boost::multiprecision::cpp_int;
    using Rat = boost::rational<Int>;

    // Variables p(O, O0, O1 | L), flattened L-major.
    const std::size_t per_l = static_cast<std::size_t>(count) * count * count;
    const std::size_t num_vars = per_l * count;
    auto index = [&](std::uint64_t l, std::uint64_t o, std::uint64_t o0, std::uint64_t o1) {
        return static_cast<std::size_t>(((l * count + o) * count + o0) * count + o1);
    };

    simplex::LinearProgram<Rat> lp;
    lp.num_vars = num_vars;
    lp.objective.assign(num_vars, Rat(0));

    // Objective: count of satisfied conditions, averaged over L afterwards.
    for (std::uint64_t l = 0; l < count; ++l) {
        for (std::uint64_t o = 0; o < count; ++o) {
            for (std::uint64_t o0 = 0; o0 < count; ++o0) {
                for (std::uint64_t o1 = 0; o1 < count; ++o1) {
                    int c = 0;
                    if (popcount64((o0 ^ o) ^ (l0bits & l)) <= t) ++c;
                    if (popcount64((o1 ^ o) ^ (~l0bits & mask & l)) <= t) ++c;
                    if (c != 0) lp.objective[index(l, o, o0, o1)] = Rat(c);
                }
            }
        }
    }

    // Normalization per L.
    for (std::uint64_t l = 0; l < count; ++l) {
        std::vector<Rat> row(num_vars, Rat(0));
        for (std::size_t k = 0; k < per_l; ++k) row[l * per_l + k] = Rat(1);
        lp.rows.push_back(std::move(row));
        lp.rhs.push_back(Rat(1));
    }

    // No-signalling: the unveilers' joint marginal cannot depend on L.
    for (std::uint64_t o0 = 0; o0 < count; ++o0) {
        for (std::uint64_t o1 = 0; o1 < count; ++o1) {
            for (std::uint64_t l = 1; l < count; ++l) {
                std::vector<Rat> row(num_vars, Rat(0));
                for (std::uint64_t o = 0; o < count; ++o) {
                    row[index(l, o, o0, o1)] = Rat(1);
                    row[index(0, o, o0, o1)] = Rat(-1);
                }
                lp.rows.push_back(std::move(row));
                lp.rhs.push_back(Rat(0));
            }
        }
    }

    const auto sol = simplex::solve(lp);
    if (!sol.feasible) {
        throw std::logic_error("evaluate_nosignalling_lp: polytope unexpectedly empty");
    }
    // value = sum over L of (conditions satisfied); epsilon = value/2^n - 1.
    const Rat eps = sol.value / Rat(Int(count)) - Rat(1);
    return boost::rational_cast<double>(eps);
}

}  // namespace relbc::adversary
