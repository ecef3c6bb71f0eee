#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mps/rng.hpp"

namespace mps {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

/// Default modulus: the Mersenne prime 2^61 - 1. Fits 64-bit lanes with
/// headroom for sums; any prime p with 2 < p < 2^62 is accepted.
inline constexpr u64 kDefaultModulus = (u64{1} << 61) - 1;

inline u64 mulmod_u64(u64 a, u64 b, u64 p) {
    return static_cast<u64>((static_cast<u128>(a) * b) % p);
}

inline u64 powmod_u64(u64 base, u64 exp, u64 p) {
    u64 r = 1 % p;
    base %= p;
    while (exp) {
        if (exp & 1) r = mulmod_u64(r, base, p);
        base = mulmod_u64(base, base, p);
        exp >>= 1;
    }
    return r;
}

/// Deterministic Miller-Rabin, valid for all 64-bit inputs.
inline bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % q == 0) return n == q;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

/// An element of F_p. Carries its modulus so cross-field mixups are
/// caught at the operation site.
class Fp {
public:
    Fp() = default;
    Fp(u64 value, u64 modulus) : v_(value % modulus), p_(modulus) {}

    u64 value() const { return v_; }
    u64 modulus() const { return p_; }

    static Fp zero(u64 p) { return Fp(0, p); }
    static Fp one(u64 p) { return Fp(1, p); }

    Fp operator+(const Fp& o) const {
        check(o);
        u64 s = v_ + o.v_;
        if (s >= p_) s -= p_;
        return raw(s, p_);
    }
    Fp operator-(const Fp& o) const {
        check(o);
        return raw(v_ >= o.v_ ? v_ - o.v_ : v_ + p_ - o.v_, p_);
    }
    Fp operator*(const Fp& o) const {
        check(o);
        return raw(mulmod_u64(v_, o.v_, p_), p_);
    }
    Fp operator-() const { return raw(v_ == 0 ? 0 : p_ - v_, p_); }

    Fp& operator+=(const Fp& o) { return *this = *this + o; }
    Fp& operator-=(const Fp& o) { return *this = *this - o; }
    Fp& operator*=(const Fp& o) { return *this = *this * o; }

    bool operator==(const Fp& o) const { return v_ == o.v_ && p_ == o.p_; }
    bool operator!=(const Fp& o) const { return !(*this == o); }

    Fp pow(u64 e) const { return raw(powmod_u64(v_, e, p_), p_); }

    bool is_zero() const { return v_ == 0; }

private:
    static Fp raw(u64 v, u64 p) {
        Fp x;
        x.v_ = v;
        x.p_ = p;
        return x;
    }
    void check(const Fp& o) const {
        if (p_ != o.p_) throw std::invalid_argument("field modulus mismatch");
    }

    u64 v_ = 0;
    u64 p_ = kDefaultModulus;
};

inline Fp add(const Fp& a, const Fp& b) { return a + b; }
inline Fp sub(const Fp& a, const Fp& b) { return a - b; }
inline Fp mul(const Fp& a, const Fp& b) { return a * b; }

/// Multiplicative inverse via extended Euclid. The Fermat route
/// a^(p-2) is available as a.pow(p-2) and cross-checked in tests.
inline Fp inv_element(const Fp& a) {
    if (a.is_zero()) throw std::invalid_argument("inverse of zero");
    using i128 = __int128;
    i128 t = 0, new_t = 1;
    i128 r = static_cast<i128>(a.modulus()), new_r = static_cast<i128>(a.value());
    while (new_r != 0) {
        i128 q = r / new_r;
        t -= q * new_t;
        std::swap(t, new_t);
        r -= q * new_r;
        std::swap(r, new_r);
    }
    if (t < 0) t += static_cast<i128>(a.modulus());
    return Fp(static_cast<u64>(t), a.modulus());
}

inline Fp operator/(const Fp& a, const Fp& b) { return a * inv_element(b); }

/// Square root mod p (Tonelli-Shanks; fast path for p = 3 mod 4).
/// Returns the canonical root in [0, (p-1)/2]; throws if `a` is a
/// non-residue.
inline Fp sqrt_element(const Fp& a) {
    const u64 p = a.modulus();
    if (a.is_zero()) return a;
    if (p == 2) return a;
    if (a.pow((p - 1) / 2).value() != 1) throw std::invalid_argument("not a quadratic residue");
    u64 r;
    if (p % 4 == 3) {
        r = a.pow((p + 1) / 4).value();
    } else {
        u64 q = p - 1;
        int s = 0;
        while ((q & 1) == 0) { q >>= 1; ++s; }
        // any non-residue works as the generator of the 2-Sylow part
        u64 z = 2;
        while (powmod_u64(z, (p - 1) / 2, p) == 1) ++z;
        u64 m = static_cast<u64>(s);
        u64 c = powmod_u64(z, q, p);
        u64 t = a.pow(q).value();
        r = a.pow((q + 1) / 2).value();
        while (t != 1) {
            u64 i = 0, t2 = t;
            while (t2 != 1) { t2 = mulmod_u64(t2, t2, p); ++i; }
            u64 b = c;
            for (u64 j = 0; j + i + 1 < m; ++j) b = mulmod_u64(b, b, p);
            m = i;
            c = mulmod_u64(b, b, p);
            t = mulmod_u64(t, c, p);
            r = mulmod_u64(r, b, p);
        }
    }
    if (r > p - r) r = p - r;
    return Fp(r, p);
}

/// Degree-(t-1) polynomial whose constant term is the shared secret.
struct SecretPolynomial {
    std::vector<Fp> coefficients; // coefficients[0] = secret, size = threshold t

    std::size_t threshold() const { return coefficients.size(); }

    static SecretPolynomial random(const Fp& secret, std::size_t t, SeededRng& rng) {
        if (t < 1) throw std::invalid_argument("threshold must be >= 1");
        SecretPolynomial f;
        f.coefficients.reserve(t);
        f.coefficients.push_back(secret);
        for (std::size_t i = 1; i < t; ++i) {
            f.coefficients.emplace_back(rng.below(secret.modulus()), secret.modulus());
        }
        return f;
    }
};

/// Horner evaluation of f at x.
inline Fp eval_poly(const SecretPolynomial& f, const Fp& x) {
    if (f.coefficients.empty()) throw std::invalid_argument("empty polynomial");
    Fp acc = Fp::zero(x.modulus());
    for (auto it = f.coefficients.rbegin(); it != f.coefficients.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

/// Value at `at` of the unique polynomial through the given points.
/// X-coordinates must be pairwise distinct.
inline Fp lagrange_interpolate(const std::vector<std::pair<Fp, Fp>>& points, const Fp& at) {
    if (points.empty()) throw std::invalid_argument("no interpolation points");
    const u64 p = at.modulus();
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (points[i].first == points[j].first) {
                throw std::invalid_argument("duplicate x-coordinates");
            }
        }
    }
    Fp acc = Fp::zero(p);
    for (std::size_t i = 0; i < points.size(); ++i) {
        Fp num = Fp::one(p), den = Fp::one(p);
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == i) continue;
            num *= (at - points[j].first);
            den *= (points[i].first - points[j].first);
        }
        acc += points[i].second * num * inv_element(den);
    }
    return acc;
}

/// Lagrange coefficients for evaluating at `at` from the given
/// x-coordinates. Precomputable: the combination is then a dot product.
inline std::vector<Fp> lagrange_coefficients(const std::vector<Fp>& xs, const Fp& at) {
    std::vector<Fp> lambda;
    lambda.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Fp num = Fp::one(at.modulus()), den = Fp::one(at.modulus());
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (j == i) continue;
            num *= (at - xs[j]);
            den *= (xs[i] - xs[j]);
        }
        lambda.push_back(num * inv_element(den));
    }
    return lambda;
}

} // namespace mps
