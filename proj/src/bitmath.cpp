#include "relbc/bitmath.hpp"

#include <cmath>
#include <stdexcept>

namespace relbc::bitmath {

double chsh_quantum_win_probability() {
    return (2.0 + std::sqrt(2.0)) / 4.0;
}

double xi_upper_limit() {
    return 1.0 / (2.0 * std::sqrt(2.0)) - 0.25;
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("binary_entropy: argument must lie in [0,1]");
    }
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

std::uint64_t binomial(unsigned n, unsigned k) {
    if (n > 64) throw std::invalid_argument("binomial: n must be <= 64");
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    // Multiplicative form; every prefix product is itself a binomial
    // coefficient, so with n <= 64 nothing overflows unsigned 128-bit.
    unsigned __int128 acc = 1;
    for (unsigned j = 1; j <= k; ++j) {
        acc = acc * (n - k + j) / j;
    }
    return static_cast<std::uint64_t>(acc);
}

std::uint64_t hamming_ball_volume(unsigned n, unsigned r) {
    if (n > 63) throw std::invalid_argument("hamming_ball_volume: n must be <= 63");
    if (r > n) throw std::invalid_argument("hamming_ball_volume: requires r <= n");
    std::uint64_t total = 0;
    for (unsigned j = 0; j <= r; ++j) total += binomial(n, j);
    return total;
}

double hamming_ball_bound(unsigned n, unsigned r) {
    if (n == 0) throw std::invalid_argument("hamming_ball_bound: n must be >= 1");
    if (2 * r > n) {
        throw std::invalid_argument("hamming_ball_bound: requires r <= n/2");
    }
    const double frac = static_cast<double>(r) / static_cast<double>(n);
    return std::exp2(static_cast<double>(n) * binary_entropy(frac));
}

double chsh_score_threshold(unsigned n, double xi) {
    if (n == 0) throw std::invalid_argument("chsh_score_threshold: n must be >= 1");
    if (!std::isfinite(xi) || xi < 0.0) {
        throw std::invalid_argument("chsh_score_threshold: xi must be finite and >= 0");
    }
    return static_cast<double>(n) * (chsh_quantum_win_probability() - xi);
}

double chsh_mismatch_threshold(unsigned n, double xi) {
    if (n == 0) throw std::invalid_argument("chsh_mismatch_threshold: n must be >= 1");
    if (!std::isfinite(xi) || xi < 0.0) {
        throw std::invalid_argument("chsh_mismatch_threshold: xi must be finite and >= 0");
    }
    return static_cast<double>(n) * (1.0 - chsh_quantum_win_probability() + xi);
}

long long mismatch_pass_limit(unsigned n, double xi) {
    const double threshold = chsh_mismatch_threshold(n, xi);
    // Largest integer strictly below the threshold.
    long long limit = static_cast<long long>(std::ceil(threshold)) - 1;
    if (static_cast<double>(limit + 1) < threshold) ++limit;  // guard against ceil fuzz
    if (limit > static_cast<long long>(n)) limit = static_cast<long long>(n);
    if (limit < -1) limit = -1;
    return limit;
}

SecurityBound epsilon_bound(unsigned n, double xi) {
    if (n == 0) throw std::invalid_argument("epsilon_bound: n must be >= 1");
    if (!std::isfinite(xi) || !(xi > 0.0) || !(xi < xi_upper_limit())) {
        throw std::invalid_argument(
            "epsilon_bound: requires 0 < xi < xi_upper_limit() so that r/n stays below 1/2");
    }
    SecurityBound b;
    b.r_over_n = 1.0 - 1.0 / std::sqrt(2.0) + 2.0 * xi;
    if (b.r_over_n > 0.5) b.r_over_n = 0.5;
    b.entropy = binary_entropy(b.r_over_n);
    b.epsilon = std::exp2(-static_cast<double>(n) * (1.0 - b.entropy));
    return b;
}

double chsh_value_from_score(unsigned n, double score) {
    if (n == 0) throw std::invalid_argument("chsh_value_from_score: n must be >= 1");
    if (!(score >= 0.0 && score <= static_cast<double>(n))) {
        throw std::invalid_argument("chsh_value_from_score: score must lie in [0, n]");
    }
    return 8.0 * (score / static_cast<double>(n)) - 4.0;
}

bool rccbc_distance_window(std::size_t distance, unsigned n, double c_param) {
    if (n == 0) throw std::invalid_argument("rccbc_distance_window: n must be >= 1");
    if (!std::isfinite(c_param) || c_param <= 0.0) {
        throw std::invalid_argument("rccbc_distance_window: C must be finite and > 0");
    }
    const double center = static_cast<double>(n) / 4.0;
    const double radius = c_param * std::pow(static_cast<double>(n), 0.75);
    return std::fabs(static_cast<double>(distance) - center) < radius;
}

bool rccbc_distance_check(const BitString& s0j, const BitString& s1j, unsigned n,
                          double c_param) {
    if (s0j.size() != s1j.size() || s0j.size() != n / 2 || n % 2 != 0) {
        throw std::invalid_argument("rccbc_distance_check: substrings must have length n/2");
    }
    return rccbc_distance_window(hamming_distance(s0j, s1j), n, c_param);
}

}  // namespace relbc::bitmath
