#pragma once

// MFTR fading parameterization, the omega/phi coefficient machinery, and the
// per-receiver MRC SNR distribution.
//
// The SNR at an L-branch MRC output over MFTR fading is a countable mixture
// of gamma densities
//   f(z) = sum_i phi_i z^{nu_i - 1} rho^{-nu_i} exp(-z/rho) / Gamma(nu_i),
// with nu_i = i + mu*L, rho = gbar / (mu (K+1)), and mixture weights phi
// obtained from the single-branch weights omega by an L-fold power of the
// generating series.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "mftr/eval.hpp"
#include "mftr/special_functions.hpp"

namespace mftr {

// Fading shape parameters of one link.
struct MftrParams {
    double m = 1.0;       // shadowing severity of the specular components
    int mu = 1;           // number of multipath clusters
    double sigma2 = 0.5;  // per-component diffuse variance (2*sigma2 per cluster)
    double K = 0.0;       // specular-to-diffuse power ratio
    double delta = 0.0;   // specular similarity, in [0,1]

    void validate() const {
        if (!(m > 0.0)) throw std::invalid_argument("m: must be > 0");
        if (mu < 1) throw std::invalid_argument("mu: must be a positive integer");
        if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2: must be > 0");
        if (!(K >= 0.0)) throw std::invalid_argument("K: must be >= 0");
        if (!(delta >= 0.0 && delta <= 1.0))
            throw std::invalid_argument("delta: must be within [0, 1]");
    }

    friend bool operator==(const MftrParams&, const MftrParams&) = default;
};

// One receiver: fading parameters, MRC branch count, mean branch SNR
// (linear; the CLI surface accepts dB).
struct LinkConfig {
    MftrParams params;
    int L = 1;
    double gamma_bar = 1.0;

    void validate() const {
        params.validate();
        if (L < 1) throw std::invalid_argument("L: must be a positive integer");
        if (!(gamma_bar > 0.0)) throw std::invalid_argument("gamma_bar: must be > 0");
    }

    friend bool operator==(const LinkConfig&, const LinkConfig&) = default;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// rho = gbar / (mu (K+1))
inline double rho(const MftrParams& p, double gamma_bar) {
    return gamma_bar / (p.mu * (p.K + 1.0));
}

// nu_i = i + mu L
inline double nu(int i, const MftrParams& p, int L) { return i + double(p.mu) * L; }

// Single-branch mixture weights omega_0..omega_T.
//
// Assembled fully in log domain: Gamma(m+i) / (m + mu K (1-Delta))^{m+i}
// spans hundreds of orders of magnitude by i ~ 200, and the 2F1 factor is
// carried as a log through the Pfaff-transformed positive series.  The
// (1-Delta)^{i-q} (2*Delta)^q split keeps the q-sum finite at both Delta
// endpoints.
namespace detail {

// omega_i for i in [first, T]; each index is independent of the others.
inline void omega_range(const MftrParams& p, int first, int T, std::vector<double>& out,
                        const EvalOptions& opts) {
    if (p.K == 0.0) {
        for (int i = first; i <= T; ++i) out[i] = (i == 0) ? 1.0 : 0.0;
        return;
    }
    const double den = p.m + p.mu * p.K * (1.0 - p.delta);
    const double zstar = -2.0 * p.mu * p.K * p.delta / den;
    const double log_muK = std::log(p.mu * p.K);
    const double log_1mD = (p.delta < 1.0) ? std::log1p(-p.delta)
                                           : -std::numeric_limits<double>::infinity();
    const double log_2D = (p.delta > 0.0) ? std::log(2.0 * p.delta)
                                          : -std::numeric_limits<double>::infinity();
    const double log_den = std::log(den);
    const double base0 = p.m * std::log(p.m) - std::lgamma(p.m) - 0.5 * std::log(M_PI);

    std::vector<double> lt(static_cast<std::size_t>(T) + 1);
    for (int i = first; i <= T; ++i) {
        const double base = base0 + std::lgamma(p.m + i) + i * log_muK -
                            std::lgamma(i + 1.0) - (p.m + i) * log_den;
        double max_log = -std::numeric_limits<double>::infinity();
        for (int q = 0; q <= i; ++q) {
            double l = base + detail::log_gauss_2f1_neg(p.m + i, q + 0.5, q + 1.0, zstar, opts) +
                       std::lgamma(q + 0.5) - 2.0 * std::lgamma(q + 1.0) +
                       std::lgamma(i + 1.0) - std::lgamma(i - q + 1.0);
            if (q < i) l += (i - q) * log_1mD;
            if (q > 0) l += q * log_2D;
            lt[q] = l;
            if (l > max_log) max_log = l;
        }
        if (!std::isfinite(max_log)) {
            out[i] = 0.0;
            continue;
        }
        double s = 0.0;
        for (int q = 0; q <= i; ++q) s += std::exp(lt[q] - max_log);
        out[i] = std::exp(max_log) * s;
    }
}

}  // namespace detail

inline std::vector<double> omega_coefficients(const MftrParams& p, int T,
                                              const EvalOptions& opts = {}) {
    p.validate();
    if (T < 0) throw std::invalid_argument("omega_coefficients: T must be >= 0");
    std::vector<double> out(static_cast<std::size_t>(T) + 1, 0.0);
    detail::omega_range(p, 0, T, out, opts);
    return out;
}

// Weights of the L-fold power of the omega series by the coefficient
// recursion
//   phi_0 = omega_0^L,
//   phi_i = (1 / (i omega_0)) sum_{l=1..i} phi_{i-l} omega_l (L l + l - i).
//
// The (L l + l - i) factor changes sign across the inner sum, so rounding
// errors can grow when omega has a pronounced interior peak (mu K >> m).
// SeriesCache therefore computes its weights by truncated self-convolution
// powering, which sums positive terms only; this recursion is kept as the
// contract form and as a cross-check path.
inline std::vector<double> phi_coefficients(const std::vector<double>& omega, int L) {
    if (omega.empty()) throw degenerate_input("phi_coefficients: empty omega");
    if (omega[0] <= 0.0) throw degenerate_input("phi_coefficients: omega_0 must be > 0");
    if (L < 1) throw std::invalid_argument("phi_coefficients: L must be >= 1");
    if (L == 1) return omega;  // single branch: (sum omega x^i)^1
    const int T = static_cast<int>(omega.size()) - 1;
    std::vector<double> phi(omega.size(), 0.0);
    phi[0] = std::pow(omega[0], L);
    for (int i = 1; i <= T; ++i) {
        double acc = 0.0;
        for (int l = 1; l <= i; ++l)
            acc += phi[i - l] * omega[l] * (double(L) * l + l - i);
        phi[i] = acc / (i * omega[0]);
    }
    return phi;
}

namespace detail {

// Truncated product of two coefficient sequences.
inline std::vector<double> convolve_truncated(const std::vector<double>& a,
                                              const std::vector<double>& b) {
    std::vector<double> c(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; i + j < c.size(); ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

// (sum omega_i x^i)^L truncated, by binary powering; all-positive sums.
inline std::vector<double> phi_by_convolution(std::vector<double> base, int L) {
    if (L == 1) return base;
    std::vector<double> r(base.size(), 0.0);
    r[0] = 1.0;
    while (L > 0) {
        if (L & 1) r = convolve_truncated(r, base);
        L >>= 1;
        if (L) base = convolve_truncated(base, base);
    }
    return r;
}

}  // namespace detail

// Precomputed coefficient sequences for one link at truncation index T.
// Immutable after construction; extension reuses the omega prefix.
class SeriesCache {
  public:
    SeriesCache() = default;

    SeriesCache(const LinkConfig& link, int T, const EvalOptions& opts = {})
        : params_(link.params),
          L_(link.L),
          T_(T),
          rho_(mftr::rho(link.params, link.gamma_bar)),
          nu0_(double(link.params.mu) * link.L),
          omega_(std::make_shared<std::vector<double>>(
              omega_coefficients(link.params, T, opts))),
          phi_(std::make_shared<std::vector<double>>(
              detail::phi_by_convolution(*omega_, link.L))) {}

    int T() const { return T_; }
    double rho() const { return rho_; }
    double nu(int i) const { return nu0_ + i; }
    double nu0() const { return nu0_; }
    int L() const { return L_; }
    const MftrParams& params() const { return params_; }
    const std::vector<double>& omega() const { return *omega_; }
    const std::vector<double>& phi() const { return *phi_; }

    // A cache for the same link at a larger T; omega prefix is reused, phi
    // is rebuilt (its recursion is O(T^2) from the prefix anyway).
    SeriesCache extended(int newT, const EvalOptions& opts = {}) const {
        if (newT <= T_) return *this;
        SeriesCache out = *this;
        auto grown = std::make_shared<std::vector<double>>(*omega_);
        grown->resize(static_cast<std::size_t>(newT) + 1, 0.0);
        detail::omega_range(params_, T_ + 1, newT, *grown, opts);
        out.omega_ = grown;
        out.phi_ = std::make_shared<std::vector<double>>(
            detail::phi_by_convolution(*grown, L_));
        out.T_ = newT;
        return out;
    }

    // Same coefficients bound to a different mean SNR (rho changes only).
    SeriesCache with_gamma_bar(double gamma_bar) const {
        SeriesCache out = *this;
        out.rho_ = mftr::rho(params_, gamma_bar);
        return out;
    }

    // View of this cache truncated at a smaller T; shares the coefficient
    // storage.  Lets a refinement step evaluate genuinely at T while the
    // backing arrays have already grown further.
    SeriesCache truncated(int T) const {
        if (T >= T_) return *this;
        SeriesCache out = *this;
        out.T_ = T;
        return out;
    }

  private:
    MftrParams params_{};
    int L_ = 1;
    int T_ = -1;
    double rho_ = 1.0;
    double nu0_ = 1.0;
    std::shared_ptr<const std::vector<double>> omega_;
    std::shared_ptr<const std::vector<double>> phi_;
};

// Truncated MRC SNR density at z >= 0.
inline double mrc_snr_pdf(const SeriesCache& cache, double z) {
    if (z < 0.0) throw std::domain_error("mrc_snr_pdf: z must be >= 0");
    if (z == 0.0) return cache.nu0() == 1.0 ? cache.phi()[0] / cache.rho() : 0.0;
    const double log_z = std::log(z);
    const double log_rho = std::log(cache.rho());
    double acc = 0.0;
    for (int i = 0; i <= cache.T(); ++i) {
        const double nui = cache.nu(i);
        const double lt = (nui - 1.0) * log_z - nui * log_rho - std::lgamma(nui) -
                          z / cache.rho();
        acc += cache.phi()[i] * std::exp(lt);
    }
    return acc;
}

// Truncated MRC SNR CDF: sum_i phi_i P(nu_i, z/rho).
inline double mrc_snr_cdf(const SeriesCache& cache, double z) {
    if (z < 0.0) throw std::domain_error("mrc_snr_cdf: z must be >= 0");
    if (z == 0.0) return 0.0;
    const double x = z / cache.rho();
    double acc = 0.0;
    for (int i = 0; i <= cache.T(); ++i)
        acc += cache.phi()[i] * reg_lower_gamma(cache.nu(i), x);
    return acc;
}

// Density of the equivalent eavesdropper variable 2^{Rs}(1 + Psi_E) - 1:
//   f_eq(z) = 2^{-Rs} f_{Psi_E}((z+1) 2^{-Rs} - 1).
inline double eve_eq_pdf(const SeriesCache& eve, double rs, double z) {
    const double scale = std::exp2(-rs);
    const double y = (z + 1.0) * scale - 1.0;
    if (y < 0.0) return 0.0;
    return scale * mrc_snr_pdf(eve, y);
}

}  // namespace mftr
