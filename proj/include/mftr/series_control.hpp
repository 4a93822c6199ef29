#pragma once

// Truncation management for the asymptotic GSOP series: the term sequence
// a_j, the successive-term ratio r_j, the geometric remainder bound, and a
// doubling search for the smallest qualifying truncation index.
//
// The bound applies only once the ratio sequence has stabilized (the ratios
// may fluctuate, and may sit above 1, while the early coefficients
// oscillate).  Stabilization here means W consecutive strictly decreasing
// ratio steps inside [1, T]; the bound additionally requires r_{T+1} < 1,
// otherwise the geometric tail argument does not hold and no bound is
// reported.

#include <cmath>
#include <optional>
#include <vector>

#include "mftr/eval.hpp"
#include "mftr/secrecy_metrics.hpp"

namespace mftr {

struct TruncationReport {
    int T = 0;
    double a_next = 0.0;                  // |a_{T+1}|
    std::optional<double> ratio;          // r_{T+1}, present only when < 1
    std::optional<double> bound;          // Eq.-39 remainder bound
    std::optional<int> stabilized_at;     // end of the first qualifying window
};

struct StabilizationOptions {
    int window = 5;  // consecutive strictly decreasing ratio steps
};

// j-th summand of the truncated asymptotic GSOP series (coefficient x
// Pochhammer x terminating-1F1 factor), before the coding-gain prefactor.
inline double asymptote_term(int j, const SecrecyScenario& sc, const SeriesCache& bob,
                             const SeriesCache& eve) {
    if (j > eve.T()) throw std::invalid_argument("asymptote_term: j exceeds cache T");
    const int n = static_cast<int>(bob.nu0());
    const double chi = (1.0 - std::exp2(sc.theta * sc.rs)) / eve.rho();
    return detail::asymptote_term_impl(j, n, eve, chi);
}

namespace detail {

inline std::vector<double> asymptote_terms_upto(const SecrecyScenario& sc,
                                                const SeriesCache& bob,
                                                const SeriesCache& eve, int last) {
    const int n = static_cast<int>(bob.nu0());
    const double chi = (1.0 - std::exp2(sc.theta * sc.rs)) / eve.rho();
    std::vector<double> a(static_cast<std::size_t>(last) + 1);
    for (int j = 0; j <= last; ++j) a[j] = asymptote_term_impl(j, n, eve, chi);
    return a;
}

// End index of the first window of `window` strictly decreasing ratio steps
// within r_1..r_limit.
inline std::optional<int> find_stabilization(const std::vector<double>& r, int limit,
                                             int window) {
    int run = 0;
    for (int j = 1; j <= limit && j < static_cast<int>(r.size()); ++j) {
        if (std::isfinite(r[j]) && std::isfinite(r[j - 1]) && r[j] < r[j - 1])
            ++run;
        else
            run = 0;
        if (run >= window) return j;
    }
    return std::nullopt;
}

}  // namespace detail

// Remainder bound for the asymptotic series truncated at T.  The eve cache
// must hold coefficients through T+2.
inline TruncationReport ratio_bound(const SecrecyScenario& sc, const SeriesCache& bob,
                                    const SeriesCache& eve, int T,
                                    const StabilizationOptions& stab = {}) {
    if (T < 1) throw std::invalid_argument("ratio_bound: requires T >= 1");
    if (eve.T() < T + 2)
        throw std::invalid_argument("ratio_bound: eve cache must extend to T+2");
    const std::vector<double> a = detail::asymptote_terms_upto(sc, bob, eve, T + 2);

    std::vector<double> r(a.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = 0; j + 1 < a.size(); ++j)
        if (a[j] != 0.0) r[j] = std::abs(a[j + 1]) / std::abs(a[j]);

    TruncationReport rep;
    rep.T = T;
    rep.a_next = std::abs(a[T + 1]);
    rep.stabilized_at = detail::find_stabilization(r, T, stab.window);
    const double r_next = r[T + 1];
    if (rep.stabilized_at && std::isfinite(r_next) && r_next < 1.0) {
        rep.ratio = r_next;
        rep.bound = asymptotic_prefactor(sc, bob) * rep.a_next / (1.0 - r_next);
    }
    return rep;
}

struct TruncationSearchOptions {
    int T_max = 2048;
    StabilizationOptions stabilization{};
};

// Smallest T on the doubling schedule {16, 32, ...} whose reported bound
// meets the target.
inline int choose_truncation(const SecrecyScenario& sc, const SeriesCache& bob,
                             SeriesCache eve, double target,
                             const TruncationSearchOptions& opts = {}) {
    if (!(target > 0.0)) throw std::invalid_argument("choose_truncation: target must be > 0");
    if (std::isinf(target)) return 16;
    for (int T = 16; T <= opts.T_max; T *= 2) {
        if (eve.T() < T + 2) eve = eve.extended(T + 2);
        const TruncationReport rep = ratio_bound(sc, bob, eve, T, opts.stabilization);
        if (rep.bound && *rep.bound <= target) return T;
    }
    throw convergence_error("choose_truncation: T_max reached without meeting target",
                            std::numeric_limits<double>::quiet_NaN());
}

}  // namespace mftr
