#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mps {

namespace detail {

/// Regularized lower incomplete gamma P(a,x) (series / continued
/// fraction split at x = a+1).
inline double gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_p domain");
    if (x == 0.0) return 0.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    // Lentz continued fraction for Q(a,x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    double q = std::exp(-x + a * std::log(x) - gln) * h;
    return 1.0 - q;
}

} // namespace detail

/// Upper tail probability of a chi-square statistic with `dof` degrees
/// of freedom.
inline double chi_square_pvalue(double stat, double dof) {
    if (dof <= 0.0) throw std::invalid_argument("dof must be positive");
    if (stat <= 0.0) return 1.0;
    return 1.0 - detail::gamma_p(dof / 2.0, stat / 2.0);
}

struct ChiSquareResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// Goodness-of-fit test of observed counts against expected counts.
/// Cells with expected count below `min_expected` are pooled into one.
inline ChiSquareResult chi_square_gof(const std::vector<double>& observed,
                                      const std::vector<double>& expected,
                                      double min_expected = 5.0) {
    if (observed.size() != expected.size() || observed.empty()) {
        throw std::invalid_argument("chi_square_gof size mismatch");
    }
    double stat = 0.0, pool_obs = 0.0, pool_exp = 0.0;
    std::size_t cells = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] < min_expected) {
            pool_obs += observed[i];
            pool_exp += expected[i];
            continue;
        }
        double d = observed[i] - expected[i];
        stat += d * d / expected[i];
        ++cells;
    }
    if (pool_exp > 0.0) {
        double d = pool_obs - pool_exp;
        stat += d * d / pool_exp;
        ++cells;
    }
    if (cells < 2) throw std::invalid_argument("chi_square_gof needs >= 2 cells");
    ChiSquareResult r;
    r.statistic = stat;
    r.dof = static_cast<double>(cells - 1);
    r.p_value = chi_square_pvalue(stat, r.dof);
    return r;
}

/// Two-sample chi-square homogeneity test on a pair of histograms over
/// the same bins (2 x k contingency table).
inline ChiSquareResult chi_square_two_sample(const std::vector<std::uint64_t>& a,
                                             const std::vector<std::uint64_t>& b,
                                             double min_expected = 5.0) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("chi_square_two_sample size mismatch");
    }
    double na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]);
    }
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("empty sample");
    const double total = na + nb;
    double stat = 0.0;
    double pool_a = 0.0, pool_b = 0.0, pool_tot = 0.0;
    std::size_t cells = 0;
    auto add_cell = [&](double oa, double ob, double tot) {
        double ea = tot * na / total;
        double eb = tot * nb / total;
        double da = oa - ea, db = ob - eb;
        stat += da * da / ea + db * db / eb;
        ++cells;
    };
    for (std::size_t i = 0; i < a.size(); ++i) {
        double tot = static_cast<double>(a[i] + b[i]);
        if (tot == 0.0) continue;
        if (tot * na / total < min_expected || tot * nb / total < min_expected) {
            pool_a += static_cast<double>(a[i]);
            pool_b += static_cast<double>(b[i]);
            pool_tot += tot;
            continue;
        }
        add_cell(static_cast<double>(a[i]), static_cast<double>(b[i]), tot);
    }
    if (pool_tot > 0.0) add_cell(pool_a, pool_b, pool_tot);
    ChiSquareResult r;
    if (cells < 2) {
        // degenerate: both samples constant on one bin, no evidence of difference
        r.statistic = 0.0;
        r.dof = 1.0;
        r.p_value = 1.0;
        return r;
    }
    r.statistic = stat;
    r.dof = static_cast<double>(cells - 1);
    r.p_value = chi_square_pvalue(stat, r.dof);
    return r;
}

} // namespace mps
