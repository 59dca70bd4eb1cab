#pragma once

/// Analytic quantities for the commitment bounds: binary entropy, Hamming
/// ball volumes, acceptance thresholds and the cheating-probability bound
/// epsilon <= 2^(-N(1-H(r/N))) with r/N = 1 - 1/sqrt(2) + 2*xi.

#include <cstdint>

#include "relbc/bitstring.hpp"

namespace relbc::bitmath {

/// Optimal quantum win probability of a CHSH round, (2 + sqrt(2))/4.
double chsh_quantum_win_probability();

/// Largest admissible robustness parameter, 1/(2 sqrt(2)) - 1/4. Binding
/// degrades to the trivial bound epsilon = 1 as xi approaches this value.
double xi_upper_limit();

/// H(p) = -p log2 p - (1-p) log2 (1-p), with H(0) = H(1) = 0.
/// Throws std::domain_error outside [0,1].
double binary_entropy(double p);

/// Exact binomial coefficient; requires n <= 64 (fits in 64 bits).
std::uint64_t binomial(unsigned n, unsigned k);

/// |{w : weight(w) <= r}| for strings of length n; requires n <= 63.
std::uint64_t hamming_ball_volume(unsigned n, unsigned r);

/// Entropy upper bound 2^(n H(r/n)) on the ball volume; requires r <= n/2.
double hamming_ball_bound(unsigned n, unsigned r);

/// Score threshold: accept when the CHSH score exceeds n((2+sqrt(2))/4 - xi).
double chsh_score_threshold(unsigned n, double xi);

/// Equivalent mismatch threshold: accept when the number of losing rounds is
/// strictly below n(1/2 - 1/(2 sqrt(2)) + xi).
double chsh_mismatch_threshold(unsigned n, double xi);

/// Largest integer mismatch count that still passes the strict "<" test, or
/// -1 when even zero mismatches fail.
long long mismatch_pass_limit(unsigned n, double xi);

struct SecurityBound {
    double r_over_n;  // relative radius 1 - 1/sqrt(2) + 2*xi
    double entropy;   // H(r/N)
    double epsilon;   // 2^(-N(1 - H(r/N)))
};

/// Binding bound for the CHSH commitment at block length n and robustness
/// xi. Requires xi >= 0 and r/n <= 1/2 (i.e. xi <= xi_upper_limit()).
SecurityBound epsilon_bound(unsigned n, double xi);

/// Empirical CHSH value S = 8*(score/n) - 4 from a score out of n rounds.
/// Accepts a real-valued score so expected scores can be converted too.
/// S = 2 is the classical bound, 2*sqrt(2) the quantum maximum.
double chsh_value_from_score(unsigned n, double score);

/// Tolerance window test for the random-challenge protocol:
/// |d(s0J, s1J) - n/4| < C * n^(3/4), where n is the full string length and
/// the inputs are the two revealed substrings of length n/2.
bool rccbc_distance_check(const BitString& s0j, const BitString& s1j, unsigned n,
                          double c_param);

/// Same test with the Hamming distance already computed.
bool rccbc_distance_window(std::size_t distance, unsigned n, double c_param);

}  // namespace relbc::bitmath
