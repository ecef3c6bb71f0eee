#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "mps/field.hpp"
#include "mps/rng.hpp"

namespace mps {

/// One party's share of a secret. Party evaluation points are the
/// party indices themselves (P_i holds f(i), i >= 1).
struct Share {
    std::uint32_t party = 0;
    Fp value;
};

/// The full t-of-n sharing of one secret.
struct ShareVector {
    std::vector<Share> shares;
    std::uint32_t threshold = 0;
    u64 modulus = kDefaultModulus;
};

namespace detail {
inline void require_distinct_parties(const std::vector<Share>& shares) {
    std::set<std::uint32_t> seen;
    for (const auto& s : shares) {
        if (!seen.insert(s.party).second) throw std::invalid_argument("duplicate party index");
        if (s.party == 0) throw std::invalid_argument("party index must be >= 1");
    }
}
} // namespace detail

/// Evaluate an explicit dealer polynomial at the party points.
inline ShareVector share_with_polynomial(const SecretPolynomial& f,
                                         const std::vector<std::uint32_t>& parties) {
    const u64 p = f.coefficients.at(0).modulus();
    ShareVector out;
    out.threshold = static_cast<std::uint32_t>(f.threshold());
    out.modulus = p;
    out.shares.reserve(parties.size());
    for (auto pi : parties) {
        out.shares.push_back({pi, eval_poly(f, Fp(pi, p))});
    }
    detail::require_distinct_parties(out.shares);
    return out;
}

/// Deal a fresh uniformly random degree-(t-1) sharing of `secret`.
inline ShareVector share(const Fp& secret, std::uint32_t t,
                         const std::vector<std::uint32_t>& parties, SeededRng& rng) {
    if (t < 1) throw std::invalid_argument("threshold must be >= 1");
    if (parties.size() < t) throw std::invalid_argument("threshold exceeds party count");
    return share_with_polynomial(SecretPolynomial::random(secret, t, rng), parties);
}

/// Interpolate the secret (value at 0) from the given shares. Uses all
/// provided shares; requires at least `threshold` of them.
inline Fp reconstruct(const std::vector<Share>& shares, std::uint32_t threshold, u64 modulus) {
    if (shares.size() < threshold) throw std::invalid_argument("fewer shares than threshold");
    detail::require_distinct_parties(shares);
    std::vector<std::pair<Fp, Fp>> pts;
    pts.reserve(shares.size());
    for (const auto& s : shares) pts.emplace_back(Fp(s.party, modulus), s.value);
    return lagrange_interpolate(pts, Fp::zero(modulus));
}

inline Fp reconstruct(const ShareVector& sv) {
    return reconstruct(sv.shares, sv.threshold, sv.modulus);
}

/// Error-detection check: true iff all points lie on one polynomial of
/// degree <= t-1. Interpolates the first t shares and checks the rest.
inline bool verify_consistency(const std::vector<Share>& shares, std::uint32_t threshold,
                               u64 modulus) {
    if (shares.size() < threshold) return false;
    detail::require_distinct_parties(shares);
    std::vector<std::pair<Fp, Fp>> base;
    base.reserve(threshold);
    for (std::uint32_t i = 0; i < threshold; ++i) {
        base.emplace_back(Fp(shares[i].party, modulus), shares[i].value);
    }
    for (std::size_t i = threshold; i < shares.size(); ++i) {
        Fp expect = lagrange_interpolate(base, Fp(shares[i].party, modulus));
        if (expect != shares[i].value) return false;
    }
    return true;
}

inline bool verify_consistency(const ShareVector& sv) {
    return verify_consistency(sv.shares, sv.threshold, sv.modulus);
}

} // namespace mps
