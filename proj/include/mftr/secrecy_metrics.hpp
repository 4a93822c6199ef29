#pragma once

// Partial-secrecy metrics for the MRC wiretap system: the capacity-ratio CDF
// F_Phi, GSOP/SOP, average fractional equivocation and average information
// leakage rate, in exact, high-SNR approximate, and asymptotic forms.
//
// The exact CDF is a double series over the Bob and Eve mixture weights,
//   F_Phi(z) = sum_i phi_iB sum_j phi_jE (1 - X_ij(z)),
// where X_ij collects gamma-tail mass through a terminating Kummer sum.  The
// inner terms span huge magnitude ranges, so every X contribution is built in
// log domain and only the final bracket is formed in plain doubles.  The
// a-sum upper limit is nu_iB - 1, so per z the (j,a) table is shared across i
// through prefix sums.

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "mftr/eval.hpp"
#include "mftr/mftr_model.hpp"
#include "mftr/quadrature.hpp"
#include "mftr/special_functions.hpp"

namespace mftr {

struct SecrecyScenario {
    LinkConfig bob;
    LinkConfig eve;
    double rs = 1.0;     // secrecy rate, bits/s/Hz
    double theta = 1.0;  // equivocation threshold, in (0, 1]

    void validate() const {
        bob.validate();
        eve.validate();
        if (!(rs > 0.0)) throw std::invalid_argument("rs: must be > 0");
        if (!(theta > 0.0 && theta <= 1.0))
            throw std::invalid_argument("theta: must be within (0, 1]");
    }
};

enum class Method { exact, approx, asymptotic, monte_carlo };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::exact: return "exact";
        case Method::approx: return "approx";
        case Method::asymptotic: return "asymptotic";
        case Method::monte_carlo: return "mc";
    }
    return "?";
}

struct MetricResult {
    double value = 0.0;
    Method method = Method::exact;
    int T_used = 0;
    std::optional<double> error_estimate;  // truncation/quadrature heuristic or MC SE
};

namespace detail {

// log 1F1(-a, 1-a-nu, chi) for chi >= 0: every term of the terminating sum
// is positive, ratios peak early and then fall off factorially, so the loop
// can stop as soon as the remainder is provably below tolerance.
inline double log_kummer_gsop(long long a, double nu, double chi) {
    if (a == 0 || chi == 0.0) return 0.0;
    double term = 1.0;
    double sum = 1.0;
    double log_scale = 0.0;
    for (long long k = 1; k <= a; ++k) {
        term *= (static_cast<double>(a - k + 1) / (static_cast<double>(a) + nu - k)) *
                (chi / k);
        sum += term;
        if (k > 2.0 * chi + 2.0 && term < sum * 1e-17) break;
        if (sum > 1e280) {
            log_scale += std::log(sum);
            term /= sum;
            sum = 1.0;
        }
    }
    return std::log(sum) + log_scale;
}

// w[a] = sum_j phi_E[j] X_j(a) for a = 0..amax, where X_j(a) is the (j,a)
// summand of the exact (with exp and 1F1 factors) or approximate Phi-CDF.
inline std::vector<double> phi_cdf_weights(const SeriesCache& eve, double rho_b,
                                           double z, int amax, bool exact) {
    const double rho_e = eve.rho();
    const double log_rho_b = std::log(rho_b);
    const double log_zre = std::log(z * rho_e);
    const double log_mix = std::log(rho_b + z * rho_e);
    const double chi = exact ? (z - 1.0) * (rho_b + z * rho_e) / (z * rho_b * rho_e) : 0.0;
    const double exp_shift = exact ? -(z - 1.0) / rho_b : 0.0;
    const int Te = eve.T();

    // lgamma over the integer-offset grid nu0_E + t
    std::vector<double> lg(static_cast<std::size_t>(Te + amax) + 2);
    for (std::size_t t = 0; t < lg.size(); ++t) lg[t] = std::lgamma(eve.nu0() + t);

    std::vector<double> lfact(static_cast<std::size_t>(amax) + 1);
    for (int a = 0; a <= amax; ++a) lfact[a] = std::lgamma(a + 1.0);

    std::vector<double> w(static_cast<std::size_t>(amax) + 1, 0.0);
    for (int j = 0; j <= Te; ++j) {
        const double phi_j = eve.phi()[j];
        if (phi_j == 0.0) continue;
        const double nu_j = eve.nu(j);
        const double base = nu_j * log_rho_b - lg[j] + exp_shift;
        for (int a = 0; a <= amax; ++a) {
            double l = base + a * log_zre + lg[j + a] - lfact[a] - (a + nu_j) * log_mix;
            if (exact && a > 0) l += log_kummer_gsop(a, nu_j, chi);
            if (l > -745.0) w[a] += phi_j * std::exp(l);
        }
    }
    return w;
}

// F from the shared (j,a) weights: sum_i phi_B[i] (sum_E - W[nu_iB - 1]).
inline double phi_cdf_assemble(const SeriesCache& bob, const SeriesCache& eve,
                               std::vector<double>& w) {
    double sum_e = 0.0;
    for (int j = 0; j <= eve.T(); ++j) sum_e += eve.phi()[j];
    // prefix sums in place
    for (std::size_t a = 1; a < w.size(); ++a) w[a] += w[a - 1];
    const int nu0 = static_cast<int>(bob.nu0());
    double acc = 0.0;
    for (int i = 0; i <= bob.T(); ++i)
        acc += bob.phi()[i] * (sum_e - w[static_cast<std::size_t>(i) + nu0 - 1]);
    return acc;
}

}  // namespace detail

// Exact CDF of Phi = (1 + Psi_B) / (1 + Psi_E) at z >= 1, truncated at the
// caches' T.
inline double phi_cdf_exact(const SeriesCache& bob, const SeriesCache& eve, double z) {
    if (!(z >= 1.0)) throw std::domain_error("phi_cdf_exact: requires z >= 1");
    const int amax = bob.T() + static_cast<int>(bob.nu0()) - 1;
    auto w = detail::phi_cdf_weights(eve, bob.rho(), z, amax, /*exact=*/true);
    return detail::phi_cdf_assemble(bob, eve, w);
}

// High-SNR CDF of Phi_A = Psi_B / Psi_E at z > 0.
inline double phi_cdf_approx(const SeriesCache& bob, const SeriesCache& eve, double z) {
    if (!(z > 0.0)) throw std::domain_error("phi_cdf_approx: requires z > 0");
    const int amax = bob.T() + static_cast<int>(bob.nu0()) - 1;
    auto w = detail::phi_cdf_weights(eve, bob.rho(), z, amax, /*exact=*/false);
    return detail::phi_cdf_assemble(bob, eve, w);
}

// GSOP = F_Phi(2^{theta Rs}); theta = 1 recovers the classical SOP.
inline MetricResult gsop_exact(const SecrecyScenario& sc, const SeriesCache& bob,
                               const SeriesCache& eve) {
    const double z = std::exp2(sc.theta * sc.rs);
    return {phi_cdf_exact(bob, eve, z), Method::exact, std::min(bob.T(), eve.T()), {}};
}

// The same quantity arranged in the delta_theta variables; retained as an
// independently coded regression path for the tests.
inline double gsop_exact_delta_form(const SecrecyScenario& sc, const SeriesCache& bob,
                                    const SeriesCache& eve) {
    const double rho_b = bob.rho();
    const double rho_e = eve.rho();
    // delta_theta in log domain; 2^{theta Rs} rho_E underflows first otherwise
    const double log_delta = std::log(rho_b) - sc.theta * sc.rs * std::log(2.0) -
                             std::log(rho_e);
    const double delta = std::exp(log_delta);
    const double chi = (delta + 1.0) * (1.0 / (delta * rho_e) - 1.0 / rho_b);
    const double shift = 1.0 / rho_b - 1.0 / (delta * rho_e);
    const double log_d1 = std::log1p(delta);

    const int amax = bob.T() + static_cast<int>(bob.nu0()) - 1;
    std::vector<double> w(static_cast<std::size_t>(amax) + 1, 0.0);
    for (int j = 0; j <= eve.T(); ++j) {
        const double phi_j = eve.phi()[j];
        if (phi_j == 0.0) continue;
        const double nu_j = eve.nu(j);
        const double base = nu_j * log_delta - std::lgamma(nu_j) + shift;
        for (int a = 0; a <= amax; ++a) {
            double l = base + std::lgamma(a + nu_j) - std::lgamma(a + 1.0) -
                       (a + nu_j) * log_d1;
            if (a > 0) l += detail::log_kummer_gsop(a, nu_j, chi);
            if (l > -745.0) w[a] += phi_j * std::exp(l);
        }
    }
    return detail::phi_cdf_assemble(bob, eve, w);
}

inline MetricResult gsop_approx(const SecrecyScenario& sc, const SeriesCache& bob,
                                const SeriesCache& eve) {
    const double z = std::exp2(sc.theta * sc.rs);
    return {phi_cdf_approx(bob, eve, z), Method::approx, std::min(bob.T(), eve.T()), {}};
}

// ---------------------------------------------------------------------------
// Exact AFE / AILR by adaptive quadrature of F_Phi(z)/z over [1, 2^Rs].
// The substitution z = e^s turns the 1/z weight into a flat measure on
// [0, Rs ln 2], which also concentrates nodes near z = 1 where the integrand
// varies fastest.

struct EquivocationResult {
    MetricResult afe;
    MetricResult ailr;
};

inline EquivocationResult exact_equivocation(const SecrecyScenario& sc,
                                             const SeriesCache& bob,
                                             const SeriesCache& eve,
                                             const QuadratureOptions& quad = {}) {
    const double upper = sc.rs * std::log(2.0);
    std::map<double, double> memo;
    auto integrand = [&](double s) {
        auto it = memo.find(s);
        if (it != memo.end()) return it->second;
        const double v = phi_cdf_exact(bob, eve, std::exp(s));
        memo.emplace(s, v);
        return v;
    };
    const QuadratureResult q = integrate_adaptive(integrand, 0.0, upper, quad);
    const int T = std::min(bob.T(), eve.T());
    const double afe = 1.0 - q.value / upper;
    const double ailr = (1.0 - afe) * sc.rs;  // identity (Eq. AILR) holds exactly
    EquivocationResult out;
    out.afe = {afe, Method::exact, T, q.error_estimate / upper};
    out.ailr = {ailr, Method::exact, T, q.error_estimate / std::log(2.0)};
    return out;
}

inline MetricResult afe_exact(const SecrecyScenario& sc, const SeriesCache& bob,
                              const SeriesCache& eve, const QuadratureOptions& quad = {}) {
    return exact_equivocation(sc, bob, eve, quad).afe;
}

inline MetricResult ailr_exact(const SecrecyScenario& sc, const SeriesCache& bob,
                               const SeriesCache& eve, const QuadratureOptions& quad = {}) {
    return exact_equivocation(sc, bob, eve, quad).ailr;
}

// ---------------------------------------------------------------------------
// High-SNR closed forms (AFE/AILR).
//
// The bracketed incomplete-beta difference equals
//   B(tau1; nu_j, a) - B(tau2; nu_j, a),  tau = u/(1+u),
// an ordinary real incomplete beta on (0,1).  It is evaluated on whichever
// side of the beta symmetry keeps the two values an order of magnitude
// apart, in log form; for nearly-coincident endpoints a single Gauss-Kronrod
// panel over [tau2, tau1] takes over, and a = 0 (where the one-sided beta
// diverges at 1 but the difference is finite) integrates
// t^{nu-1}/(1-t) under t = 1 - e^{-v}.  This is the same quantity as the
// (-1)^nu B(-u; nu, c) route, without its cancellation.

namespace detail {

// log of the unnormalized lower incomplete beta B(x; p, q), valid on the
// "series side" x <= (p+1)/(p+q+2).
inline double log_lower_beta(double p, double q, double x) {
    return p * std::log(x) + q * std::log1p(-x) + std::log(betacf(p, q, x) / p);
}

// log of B(tau1; nu, a) - B(tau2; nu, a) for 0 < tau2 < tau1 < 1, a >= 1.
inline double log_beta_difference(double nu, double a, double tau1, double tau2) {
    // separation on the direct side vs the complement side
    const double sep_direct = nu * (std::log(tau1) - std::log(tau2));
    const double sep_compl = a * (std::log1p(-tau2) - std::log1p(-tau1));
    const double sep = std::max(sep_direct, sep_compl);
    if (sep < std::log(2.0)) {
        // endpoints too close for a stable difference; the integrand varies by
        // less than 2x across [tau2, tau1], so one Kronrod panel is exact to
        // rounding.  Factor out the left endpoint to keep the exp in range.
        const double l0 = (nu - 1.0) * std::log(tau2) + (a - 1.0) * std::log1p(-tau2);
        auto f = [&](double t) {
            return std::exp((nu - 1.0) * std::log(t) + (a - 1.0) * std::log1p(-t) - l0);
        };
        double value = 0.0, err = 0.0;
        int evals = 0;
        gk15(f, tau2, tau1, value, err, evals);
        return l0 + std::log(value);
    }
    if (sep_direct >= sep_compl) {
        const double l1 = log_lower_beta(nu, a, tau1);
        const double l2 = log_lower_beta(nu, a, tau2);
        return l1 + std::log1p(-std::exp(l2 - l1));
    }
    const double l1 = log_lower_beta(a, nu, 1.0 - tau2);
    const double l2 = log_lower_beta(a, nu, 1.0 - tau1);
    return l1 + std::log1p(-std::exp(l2 - l1));
}

// log of int_{tau2}^{tau1} t^{nu-1} (1-t)^{-1} dt, the a = 0 difference,
// via t = 1 - e^{-v} (integrand becomes the bounded (1 - e^{-v})^{nu-1}).
inline double log_beta_difference_a0(double nu, double tau1, double tau2) {
    const double v1 = -std::log1p(-tau1);
    const double v2 = -std::log1p(-tau2);
    auto f = [&](double v) { return std::pow(-std::expm1(-v), nu - 1.0); };
    const QuadratureResult q =
        integrate_adaptive(f, v2, v1, {1e-15 * (v1 - v2) + 1e-300, 512});
    return std::log(q.value);
}

}  // namespace detail

struct ApproxEquivocationResult {
    MetricResult afe;
    MetricResult ailr;
};

inline ApproxEquivocationResult approx_equivocation(const SecrecyScenario& sc,
                                                    const SeriesCache& bob,
                                                    const SeriesCache& eve) {
    const double rho_b = bob.rho();
    const double rho_e = eve.rho();
    const double u1 = rho_b / rho_e;
    const double u2 = rho_b / (std::exp2(sc.rs) * rho_e);
    const double tau1 = u1 / (1.0 + u1);
    const double tau2 = u2 / (1.0 + u2);
    const double log_rs2 = sc.rs * std::log(2.0);

    const int amax = bob.T() + static_cast<int>(bob.nu0()) - 1;
    std::vector<double> w(static_cast<std::size_t>(amax) + 1, 0.0);
    for (int j = 0; j <= eve.T(); ++j) {
        const double phi_j = eve.phi()[j];
        if (phi_j == 0.0) continue;
        const double nu_j = eve.nu(j);
        const double base = -std::lgamma(nu_j);
        for (int a = 0; a <= amax; ++a) {
            const double ld = (a == 0)
                                  ? detail::log_beta_difference_a0(nu_j, tau1, tau2)
                                  : detail::log_beta_difference(nu_j, a, tau1, tau2);
            const double l = base + std::lgamma(a + nu_j) - std::lgamma(a + 1.0) + ld;
            if (l > -745.0) w[a] += phi_j * std::exp(l);
        }
    }
    for (std::size_t a = 1; a < w.size(); ++a) w[a] += w[a - 1];

    double sum_e = 0.0;
    for (int j = 0; j <= eve.T(); ++j) sum_e += eve.phi()[j];
    const int nu0 = static_cast<int>(bob.nu0());
    double s = 0.0;  // double series of Eq.-32 brackets
    for (int i = 0; i <= bob.T(); ++i)
        s += bob.phi()[i] *
             (sum_e - w[static_cast<std::size_t>(i) + nu0 - 1] / log_rs2);

    const int T = std::min(bob.T(), eve.T());
    ApproxEquivocationResult out;
    out.afe = {1.0 - s, Method::approx, T, {}};
    out.ailr = {(1.0 - out.afe.value) * sc.rs, Method::approx, T, {}};
    return out;
}

inline MetricResult afe_approx(const SecrecyScenario& sc, const SeriesCache& bob,
                               const SeriesCache& eve) {
    return approx_equivocation(sc, bob, eve).afe;
}

inline MetricResult ailr_approx(const SecrecyScenario& sc, const SeriesCache& bob,
                                const SeriesCache& eve) {
    return approx_equivocation(sc, bob, eve).ailr;
}

// ---------------------------------------------------------------------------
// Asymptotic GSOP, gbar_B -> inf.

namespace detail {

// j-th summand of the asymptotic series: phi_jE (nu_jE)_n 1F1(-n, 1-n-nu_jE, chi)
// with chi = (1 - 2^{theta Rs}) / rho_E < 0.  The Kummer transform
// e^chi 1F1(1-nu, 1-n-nu, -chi) terminates in nu_j positive terms, so the
// alternating direct sum is never formed.
inline double asymptote_term_impl(int j, int n, const SeriesCache& eve, double chi) {
    const double phi_j = eve.phi()[j];
    if (phi_j == 0.0) return 0.0;
    const double nu_j = eve.nu(j);
    const double log_poch = std::lgamma(nu_j + n) - std::lgamma(nu_j);
    const long long nu_int = static_cast<long long>(std::llround(nu_j));
    if (std::abs(nu_j - nu_int) <= kIntegerTol && nu_int >= 1) {
        const double log_f = chi + log_kummer_terminating_pos(nu_int - 1, 1.0 - n - nu_j, -chi);
        return phi_j * std::exp(log_poch + log_f);
    }
    return phi_j * kummer_terminating_direct(n, 1.0 - n - nu_j, chi) * std::exp(log_poch);
}

}  // namespace detail

// Coding-gain prefactor of Eq. GSOP^inf including the gbar_B^{-mu_B L_B} roll-off.
inline double asymptotic_prefactor(const SecrecyScenario& sc, const SeriesCache& bob) {
    const int n = static_cast<int>(bob.nu0());
    const double rho_e = rho(sc.eve.params, sc.eve.gamma_bar);
    const double z = std::exp2(sc.theta * sc.rs);
    const double log_pref =
        std::log(bob.phi()[0]) +
        n * (std::log(rho_e) + std::log(sc.bob.params.mu * (sc.bob.params.K + 1.0)) +
             std::log(z) - std::log(sc.bob.gamma_bar)) -
        std::lgamma(static_cast<double>(n)) - std::log(static_cast<double>(n));
    return std::exp(log_pref);
}

inline MetricResult gsop_asymptotic(const SecrecyScenario& sc, const SeriesCache& bob,
                                    const SeriesCache& eve) {
    const int n = static_cast<int>(bob.nu0());
    const double rho_e = eve.rho();
    const double chi = (1.0 - std::exp2(sc.theta * sc.rs)) / rho_e;
    double series = 0.0;
    for (int j = 0; j <= eve.T(); ++j)
        series += detail::asymptote_term_impl(j, n, eve, chi);
    return {asymptotic_prefactor(sc, bob) * series, Method::asymptotic, eve.T(), {}};
}

// ---------------------------------------------------------------------------
// SOP as the area under F_{Psi_B}((y+1) 2^{Rs} - 1) f_{Psi_E}(y); the paper's
// own cross-check for gsop_exact at theta = 1.

inline MetricResult sop_product_integral(const SecrecyScenario& sc, const SeriesCache& bob,
                                         const SeriesCache& eve,
                                         const QuadratureOptions& quad = {}) {
    const double w = std::exp2(sc.rs);
    auto f = [&](double y) {
        return mrc_snr_cdf(bob, (y + 1.0) * w - 1.0) * mrc_snr_pdf(eve, y);
    };
    const double scale = sc.eve.L * sc.eve.gamma_bar;  // mean of Psi_E
    const QuadratureResult q = integrate_semi_infinite(f, 0.0, scale, quad);
    return {q.value, Method::exact, std::min(bob.T(), eve.T()), q.error_estimate};
}

// ---------------------------------------------------------------------------
// Truncation refinement: double T until the metric stabilizes.  The paper
// offers no rigorous remainder bound for the exact double series, so the
// Cauchy-style |value@T - value@2T| is reported as a heuristic estimate.

struct RefineOptions {
    int T_start = 50;
    int T_max = 1600;
    double rel_target = 1e-4;
    double abs_floor = 1e-12;
};

struct CachePair {
    SeriesCache bob;
    SeriesCache eve;
};

inline CachePair build_caches(const SecrecyScenario& sc, int T, const EvalOptions& opts = {}) {
    return {SeriesCache(sc.bob, T, opts), SeriesCache(sc.eve, T, opts)};
}

template <class Eval>
MetricResult refine_truncation(const SecrecyScenario& sc, Eval&& eval,
                               const RefineOptions& opts = {}) {
    CachePair caches = build_caches(sc, opts.T_start);
    MetricResult prev = eval(caches);
    for (int T = 2 * opts.T_start; T <= opts.T_max; T *= 2) {
        caches.bob = caches.bob.extended(T);
        caches.eve = caches.eve.extended(T);
        MetricResult cur = eval(caches);
        const double delta = std::abs(cur.value - prev.value);
        cur.error_estimate = delta;
        cur.T_used = T;
        if (delta <= std::max(opts.abs_floor, opts.rel_target * std::abs(cur.value)))
            return cur;
        prev = cur;
    }
    throw convergence_error("refine_truncation: T_max reached before stabilization",
                            prev.error_estimate.value_or(
                                std::numeric_limits<double>::quiet_NaN()));
}

}  // namespace mftr
