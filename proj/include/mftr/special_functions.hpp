#pragma once

// Scalar special-function kernels: gamma family, Kummer 1F1 in the
// terminating and positive-parameter regimes, Gauss 2F1 for z <= 0, and the
// real-valued incomplete-beta term used by the high-SNR equivocation
// formulas.  Everything here is a pure function of its arguments.

#include <cmath>
#include <cstdint>
#include <limits>

#include "mftr/eval.hpp"

namespace mftr {

inline double ln_gamma(double x) {
    if (!(x > 0.0))
        throw std::domain_error("ln_gamma: requires x > 0");
    return std::lgamma(x);
}

namespace detail {

inline constexpr double kIntegerTol = 1e-9;

// x is within kIntegerTol of an integer <= 0.
inline bool near_nonpositive_integer(double x, long long& n) {
    const double r = std::round(x);
    if (std::abs(x - r) <= kIntegerTol && r <= 0.0) {
        n = static_cast<long long>(r);
        return true;
    }
    return false;
}

// Regularized lower incomplete gamma P(a,x) by power series (x < a+1).
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < 100000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * std::numeric_limits<double>::epsilon())
            break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,x) by Lentz continued fraction
// (x >= a+1).
inline double gamma_q_cf(double a, double x) {
    const double eps = std::numeric_limits<double>::epsilon();
    const double fpmin = std::numeric_limits<double>::min() / eps;
    double b = x + 1.0 - a;
    double c = 1.0 / fpmin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= eps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x) = gamma(a,x) / Gamma(a).
inline double reg_lower_gamma(double a, double x) {
    if (!(a > 0.0) || x < 0.0)
        throw std::domain_error("reg_lower_gamma: requires a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_cf(a, x);
}

// Unnormalized lower incomplete gamma.  Overflows like Gamma(a) itself for
// a beyond ~171; the series machinery uses reg_lower_gamma instead.
inline double lower_inc_gamma(double a, double x) {
    return reg_lower_gamma(a, x) * std::exp(std::lgamma(a));
}

namespace detail {

// Terminating 1F1(-n; b; z), summed directly.  Caller has excluded
// Pochhammer zeros of b.
inline double kummer_terminating_direct(long long n, double b, double z) {
    double term = 1.0;
    double sum = 1.0;
    for (long long k = 1; k <= n; ++k) {
        term *= (static_cast<double>(-n) + (k - 1)) / ((b + (k - 1)) * k) * z;
        sum += term;
    }
    return sum;
}

// log of the terminating 1F1(-n; b; z) for the positive-term case
// (b < -(n-1), z >= 0), accumulated with rescaling so large n cannot
// overflow.
inline double log_kummer_terminating_pos(long long n, double b, double z) {
    double term = 1.0;
    double sum = 1.0;
    double log_scale = 0.0;
    for (long long k = 1; k <= n; ++k) {
        term *= ((static_cast<double>(n) - (k - 1)) / ((-b - (k - 1)) * k)) * z;
        sum += term;
        if (sum > 1e280) {
            log_scale += std::log(sum);
            term /= sum;
            sum = 1.0;
        }
    }
    return std::log(sum) + log_scale;
}

}  // namespace detail

// Kummer confluent hypergeometric 1F1(a; b; z).
//
// Supported regimes: a a non-positive integer (terminating polynomial), or
// a > 0 with b away from the non-positive integers (plain series under
// EvalOptions control).
inline double kummer_1f1(double a, double b, double z, const EvalOptions& opts = {}) {
    long long n_a = 0;
    long long n_b = 0;
    const bool b_nonpos_int = detail::near_nonpositive_integer(b, n_b);

    if (detail::near_nonpositive_integer(a, n_a)) {
        const long long n = -n_a;
        if (n == 0) return 1.0;
        // (b)_k hits zero for some k <= n iff b in {0, -1, ..., -(n-1)}.
        if (b_nonpos_int && -n_b < n)
            throw pole_error("kummer_1f1: parameter b hits a pole before the series terminates");
        if (z < 0.0) {
            // Kummer transform 1F1(a;b;z) = e^z 1F1(b-a;b;-z).  When b-a is
            // a non-positive integer the transformed sum also terminates and
            // all its terms are positive, which avoids the alternating-sum
            // cancellation of the direct form.
            long long n_d = 0;
            if (detail::near_nonpositive_integer(b - a, n_d) && -n_d + 1 <= opts.max_terms) {
                const long long m = -n_d;
                if (!(b_nonpos_int && -n_b < m))
                    return std::exp(z + detail::log_kummer_terminating_pos(m, b, -z));
            }
        }
        return detail::kummer_terminating_direct(n, b, z);
    }

    if (a > 0.0 && !b_nonpos_int) {
        if (z < 0.0) {
            // the direct series alternates and cancels like e^{-|z|}; route
            // through 1F1(a;b;z) = e^z 1F1(b-a;b;-z) whenever the transformed
            // series is sign-definite or terminating
            const double d = b - a;
            long long n_d = 0;
            if (d > 0.0 || detail::near_nonpositive_integer(d, n_d))
                return std::exp(z) * kummer_1f1(d, b, -z, opts);
        }
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k <= opts.max_terms; ++k) {
            term *= (a + (k - 1)) / ((b + (k - 1)) * k) * z;
            sum += term;
            if (std::abs(term) <= opts.rel_tolerance * std::abs(sum) && k > 1)
                return sum;
        }
        throw convergence_error("kummer_1f1: series did not converge within max_terms",
                                std::abs(term / sum));
    }
    throw std::domain_error("kummer_1f1: unsupported parameter regime");
}

namespace detail {

// log 2F1(a,b;c;x) for x in [0,1) with a,b,c > 0: all terms positive, so the
// sum can be carried with periodic rescaling and returned as a log.
inline double log_2f1_positive_series(double a, double b, double c, double x,
                                      const EvalOptions& opts) {
    if (x == 0.0) return 0.0;
    double term = 1.0;
    double sum = 1.0;
    double log_scale = 0.0;
    for (int k = 0; k < opts.max_terms; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x;
        sum += term;
        if (term <= opts.rel_tolerance * sum && k > 0)
            return std::log(sum) + log_scale;
        if (sum > 1e280) {
            log_scale += std::log(sum);
            term /= sum;
            sum = 1.0;
        }
    }
    throw convergence_error("log_2f1_positive_series: no convergence within max_terms",
                            term / sum);
}

// Plain 2F1 series at argument x, |x| < 1.
inline double gauss_2f1_direct(double a, double b, double c, double x,
                               const EvalOptions& opts) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k < opts.max_terms; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x;
        sum += term;
        if (std::abs(term) <= opts.rel_tolerance * std::abs(sum) && k > 0)
            return sum;
    }
    throw convergence_error("gauss_2f1: series did not converge within max_terms",
                            std::abs(term / sum));
}

}  // namespace detail

// Gauss hypergeometric 2F1(a,b;c;z) for z <= 0 (the only regime the fading
// formulas produce).  The Pfaff transform
//   2F1(a,b;c;z) = (1-z)^{-a} 2F1(a, c-b; c; z/(z-1))
// maps z < 0 into (0,1); it is applied whenever z < -0.5, where the direct
// alternating series starts losing digits.
inline double gauss_2f1(double a, double b, double c, double z, const EvalOptions& opts = {}) {
    long long n_c = 0;
    if (detail::near_nonpositive_integer(c, n_c))
        throw std::domain_error("gauss_2f1: c must not be a non-positive integer");
    if (z > 0.0)
        throw std::domain_error("gauss_2f1: only z <= 0 is supported");
    if (z == 0.0) return 1.0;
    if (z < -0.5) {
        const double x = z / (z - 1.0);
        return std::exp(-a * std::log1p(-z)) * detail::gauss_2f1_direct(a, c - b, c, x, opts);
    }
    return detail::gauss_2f1_direct(a, b, c, z, opts);
}

namespace detail {

// log 2F1(a,b;c;z) for z <= 0 when a,b,c > 0 and c > b, where the Pfaff
// transform yields an all-positive series.  This is the signed-mantissa form
// the omega assembly relies on (the value itself spans thousands of orders
// of magnitude across coefficient indices).
inline double log_gauss_2f1_neg(double a, double b, double c, double z,
                                const EvalOptions& opts) {
    if (z == 0.0) return 0.0;
    const double x = z / (z - 1.0);
    return -a * std::log1p(-z) + log_2f1_positive_series(a, c - b, c, x, opts);
}

}  // namespace detail

// The real quantity (-1)^nu * B(-u; nu, c), via
//   B(x; a, b) = (x^a / a) 2F1(a, 1-b; a+1; x)
// evaluated at x = -u.  Equals the real integral
//   int_0^u s^{nu-1} (1+s)^{c-1} ds,
// removing the complex intermediate the metric prefactors cancel.
inline double real_beta_term(double u, double nu, double c, const EvalOptions& opts = {}) {
    if (!(u > 0.0) || !(nu > 0.0))
        throw std::domain_error("real_beta_term: requires u > 0, nu > 0");
    const double f = gauss_2f1(nu, 1.0 - c, nu + 1.0, -u, opts);
    return std::exp(nu * std::log(u) - std::log(nu) + std::log(f));
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz).
inline double betacf(double a, double b, double x) {
    const double eps = std::numeric_limits<double>::epsilon();
    const double fpmin = std::numeric_limits<double>::min() / eps;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= eps) break;
    }
    return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b) for x in [0,1].
inline double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || x < 0.0 || x > 1.0)
        throw std::domain_error("reg_inc_beta: requires a,b > 0 and x in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(lbt) * detail::betacf(a, b, x) / a;
    return 1.0 - std::exp(lbt) * detail::betacf(b, a, 1.0 - x) / b;
}

}  // namespace mftr
