#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <array>

#include <boost/multiprecision/cpp_int.hpp>

#include "mps/errors.hpp"
#include "mps/field.hpp"
#include "mps/permnet.hpp"

namespace mps {

using bigint = boost::multiprecision::cpp_int;

inline bigint big_factorial(std::uint64_t n) {
    bigint r = 1;
    for (std::uint64_t k = 2; k <= n; ++k) r *= k;
    return r;
}

/// Upper bound on distinct permutations of the symmetric n_pi
/// construction. Powers of two are fully rearrangeable (N!); odd sizes
/// use a single generalized network and are also rearrangeable (the
/// N=3 gate already reaches all 6 orderings), so they contribute N!.
/// Even non-powers follow the two recursive branches.
inline bigint f_pi(std::uint64_t N) {
    if (N == 0) return 1;
    if ((N & (N - 1)) == 0) return big_factorial(N);
    if (N % 2 == 1) return big_factorial(N);
    const std::uint64_t half = N / 2;
    bigint r;
    if (half % 2 == 0) {
        r = 1;
        for (std::uint64_t k = N; k > half; --k) r *= k;
    } else {
        r = 2;
        for (std::uint64_t k = N - 2; k > half; --k) r *= k;
    }
    return r * f_pi(half);
}

/// floor(log2 x) for x >= 1, i.e. the exact bit length minus one.
inline std::uint64_t floor_log2(const bigint& x) {
    if (x < 1) throw std::invalid_argument("floor_log2 of non-positive value");
    if (x == 1) return 0;
    return boost::multiprecision::msb(x);
}

/// Stirling/lgamma estimate of log2(n!), used only as a sanity
/// cross-check of the exact bit-length route.
inline double log2_factorial_stirling(std::uint64_t n) {
    return std::lgamma(static_cast<double>(n) + 1.0) / std::log(2.0);
}

// ---------------------------------------------------------------------
// configuration-space enumeration
// ---------------------------------------------------------------------

inline u64 pack_arrangement(const std::vector<std::uint8_t>& tokens) {
    u64 key = 0;
    for (std::size_t j = 0; j < tokens.size(); ++j) key |= static_cast<u64>(tokens[j]) << (4 * j);
    return key;
}

/// Exhaustive map from realized permutation (packed output
/// arrangement) to its number of configurations. Requires n <= 16 and
/// config bits within the budget.
inline std::unordered_map<u64, u64> enumerate_multiplicities(const NetworkTopology& net,
                                                             std::uint32_t budget_bits = 24) {
    if (net.n > 16) throw budget_exceeded("enumeration supports at most 16 wires");
    const std::uint32_t bits = net.config_bits();
    if (bits > budget_bits) {
        throw budget_exceeded("configuration space 2^" + std::to_string(bits) +
                              " exceeds budget 2^" + std::to_string(budget_bits));
    }
    struct FlatOp {
        bool coin;
        std::uint8_t a, b;
    };
    std::vector<FlatOp> ops;
    for (const auto& l : net.layers) {
        for (const auto& g : l.gates) {
            if (g.arity == 2) {
                ops.push_back({true, static_cast<std::uint8_t>(g.pos[0]), static_cast<std::uint8_t>(g.pos[1])});
            } else {
                ops.push_back({true, static_cast<std::uint8_t>(g.pos[0]), static_cast<std::uint8_t>(g.pos[1])});
                ops.push_back({true, static_cast<std::uint8_t>(g.pos[1]), static_cast<std::uint8_t>(g.pos[2])});
                ops.push_back({true, static_cast<std::uint8_t>(g.pos[0]), static_cast<std::uint8_t>(g.pos[2])});
            }
        }
        for (const auto& [a, b] : l.exchanges) {
            ops.push_back({false, static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)});
        }
    }
    std::unordered_map<u64, u64> counts;
    counts.reserve(std::size_t{1} << std::min<std::uint32_t>(bits, 20));
    std::vector<std::uint8_t> tokens(net.n);
    const u64 total = u64{1} << bits;
    for (u64 cfg = 0; cfg < total; ++cfg) {
        for (std::uint8_t j = 0; j < net.n; ++j) tokens[j] = j;
        std::uint32_t k = 0;
        for (const auto& op : ops) {
            if (op.coin) {
                if ((cfg >> k) & 1) std::swap(tokens[op.a], tokens[op.b]);
                ++k;
            } else {
                std::swap(tokens[op.a], tokens[op.b]);
            }
        }
        ++counts[pack_arrangement(tokens)];
    }
    return counts;
}

/// Histogram of permutation multiplicities: how many distinct
/// permutations occur exactly k times across all configurations.
struct OccurrenceDistribution {
    std::map<u64, u64> histogram; // occurrence count -> number of permutations
    u64 total_configs = 0;
    u64 distinct_permutations = 0;
};

inline OccurrenceDistribution enumerate_distribution(const NetworkTopology& net,
                                                     std::uint32_t budget_bits = 24) {
    auto counts = enumerate_multiplicities(net, budget_bits);
    OccurrenceDistribution dist;
    dist.total_configs = u64{1} << net.config_bits();
    dist.distinct_permutations = counts.size();
    for (const auto& [perm, c] : counts) ++dist.histogram[c];
    return dist;
}

struct DistributionStats {
    double mean = 0.0;
    double stddev = 0.0;
};

inline DistributionStats distribution_stats(const OccurrenceDistribution& dist) {
    if (dist.distinct_permutations == 0) throw std::invalid_argument("empty distribution");
    DistributionStats s;
    s.mean = static_cast<double>(dist.total_configs) / static_cast<double>(dist.distinct_permutations);
    double var = 0.0;
    for (const auto& [occ, nperm] : dist.histogram) {
        double d = static_cast<double>(occ) - s.mean;
        var += static_cast<double>(nperm) * d * d;
    }
    var /= static_cast<double>(dist.distinct_permutations);
    s.stddev = std::sqrt(var);
    return s;
}

// ---------------------------------------------------------------------
// unlinkability
// ---------------------------------------------------------------------

struct UnlinkabilityReport {
    std::uint32_t n = 0, t = 0;
    std::uint32_t n1 = 0, n2 = 0;   // zero for Shuffle-I
    std::uint32_t theta1 = 0;       // adversary-known elements per block
    std::uint64_t theta2 = 0;       // riffle exponent
    bigint count;                   // permutations consistent with the adversary's view
    std::uint64_t zeta = 0;         // floor(log2 count), exact bit length - 1
};

/// Shuffle-I: t known inputs leave (n-t)! consistent permutations on a
/// fully rearrangeable network, f_pi(n-t) on a symmetric n_pi one.
inline UnlinkabilityReport zeta_shuffle_one(std::uint32_t n, std::uint32_t t,
                                            bool all_permutations = true) {
    if (t > n) throw std::invalid_argument("t must be <= n");
    UnlinkabilityReport r;
    r.n = n;
    r.t = t;
    r.count = all_permutations ? big_factorial(n - t) : f_pi(n - t);
    r.zeta = floor_log2(r.count);
    return r;
}

/// Shuffle-II: theta1 = floor(t/n2) known elements per block, riffle
/// exponent theta2 = floor((d2*n - t)/2) with d2 = log2(n2); the count
/// is f_pi(n1-theta1)^n2 * 2^theta2, evaluated exactly.
inline UnlinkabilityReport zeta_shuffle_two(std::uint32_t n1, std::uint32_t n2, std::uint32_t t) {
    if (n2 < 2 || (n2 & (n2 - 1)) != 0) throw std::invalid_argument("n2 must be a power of two");
    const std::uint64_t n = static_cast<std::uint64_t>(n1) * n2;
    if (t > n) throw std::invalid_argument("t must be <= n");
    std::uint32_t d2 = 0;
    for (std::uint32_t x = n2; x > 1; x >>= 1) ++d2;
    UnlinkabilityReport r;
    r.n = static_cast<std::uint32_t>(n);
    r.t = t;
    r.n1 = n1;
    r.n2 = n2;
    r.theta1 = t / n2;
    r.theta2 = (static_cast<std::uint64_t>(d2) * n - t) / 2;
    r.count = boost::multiprecision::pow(f_pi(n1 - r.theta1), n2) * boost::multiprecision::pow(bigint(2), static_cast<unsigned>(r.theta2));
    r.zeta = floor_log2(r.count);
    return r;
}

// ---------------------------------------------------------------------
// birthday collisions (shuffling-by-sorting seed space)
// ---------------------------------------------------------------------

struct BirthdayResult {
    double approx = 0.0; // 1 - exp(-n(n-1)/(2q))
    double exact = 0.0;  // 1 - prod_{i=1}^{n-1} (1 - i/q)
};

inline BirthdayResult birthday_probability(std::uint64_t n, std::uint64_t q) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    if (q < n) throw std::invalid_argument("q must be >= n");
    BirthdayResult r;
    const double dn = static_cast<double>(n), dq = static_cast<double>(q);
    r.approx = 1.0 - std::exp(-dn * (dn - 1.0) / (2.0 * dq));
    double prod = 1.0;
    for (std::uint64_t i = 1; i < n; ++i) prod *= 1.0 - static_cast<double>(i) / dq;
    r.exact = 1.0 - prod;
    return r;
}

/// The seed-space size used by the sorting-based shuffle comparison:
/// q = (3/2) n^2 log2 n.
inline std::uint64_t birthday_seed_space(std::uint64_t n) {
    std::uint64_t lg = 0;
    while ((std::uint64_t{1} << (lg + 1)) <= n) ++lg;
    return 3 * n * n * lg / 2;
}

// ---------------------------------------------------------------------
// consistent permutations given partially known inputs
// ---------------------------------------------------------------------

/// Count reachable permutations indistinguishable from the adversary's
/// standpoint: permutations are bucketed by their images on the known
/// input lines; a bucket's size is the number of distinct restrictions
/// to the unknown lines. Returns the observed permutation's bucket, or
/// the largest bucket when no observation is supplied.
inline u64 consistent_permutation_count(const NetworkTopology& net,
                                        const std::set<std::uint32_t>& known_positions,
                                        const std::optional<Permutation>& observed = std::nullopt,
                                        std::uint32_t budget_bits = 24) {
    for (auto k : known_positions) {
        if (k >= net.n) throw std::invalid_argument("known position out of range");
    }
    auto counts = enumerate_multiplicities(net, budget_bits);
    auto key_of = [&](auto&& pi_of) {
        u64 key = 0;
        std::uint32_t idx = 0;
        for (auto k : known_positions) key |= static_cast<u64>(pi_of(k)) << (4 * idx++);
        return key;
    };
    std::unordered_map<u64, u64> buckets;
    for (const auto& [packed, mult] : counts) {
        (void)mult;
        std::array<std::uint8_t, 16> pi{};
        for (std::uint32_t j = 0; j < net.n; ++j) {
            std::uint8_t token = (packed >> (4 * j)) & 0xf;
            pi[token] = static_cast<std::uint8_t>(j);
        }
        ++buckets[key_of([&](std::uint32_t k) { return pi[k]; })];
    }
    if (observed) {
        if (observed->map.size() != net.n) throw std::invalid_argument("observed permutation size mismatch");
        u64 key = key_of([&](std::uint32_t k) { return observed->map[k]; });
        auto it = buckets.find(key);
        if (it == buckets.end()) throw std::invalid_argument("observed permutation is unreachable");
        return it->second;
    }
    u64 best = 0;
    for (const auto& [key, c] : buckets) {
        (void)key;
        best = std::max(best, c);
    }
    return best;
}

} // namespace mps
