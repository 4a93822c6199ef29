#pragma once

// Independent Monte Carlo oracle: sample the physical MFTR composition, form
// MRC output SNRs, and estimate GSOP/AFE/AILR/SOP from the per-realization
// fractional equivocation.  Two samplers target the identical law:
//
//   physical_rays     assembles the two dominant rays, the per-cluster
//                     specular components and the diffuse Gaussians exactly
//                     as the channel model states them;
//   conditional_chi2  uses that, conditioned on the shadowing variable and
//                     the dominant-ray phase difference, the cluster sum is a
//                     sigma^2-scaled noncentral chi-square with 2*mu degrees
//                     of freedom and noncentrality g Ps (1 + Delta cos t).
//
// The second needs one gamma, one uniform and one noncentral-chi2 draw per
// branch and is the default.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "mftr/mftr_model.hpp"
#include "mftr/parallel.hpp"
#include "mftr/philox.hpp"
#include "mftr/secrecy_metrics.hpp"

namespace mftr {

enum class SamplerStrategy { physical_rays, conditional_chi2 };

struct SamplerConfig {
    SamplerStrategy strategy = SamplerStrategy::conditional_chi2;
    std::int64_t samples = 10'000'000;
    std::uint64_t seed = 1;
    std::int64_t batch = 65536;  // deterministic reduction granularity
    int threads = 0;             // 0 = library default

    void validate() const {
        if (samples < 1) throw std::invalid_argument("samples: must be >= 1");
        if (batch < 1) throw std::invalid_argument("batch: must be >= 1");
    }
};

// Canonical specular amplitudes realizing (K, Delta): V1, V2 for the two
// dominant rays of cluster 1 and the common amplitude U of clusters 2..mu.
struct RayAmplitudes {
    double V1 = 0.0;
    double V2 = 0.0;
    double U = 0.0;       // per-cluster amplitude, clusters 2..mu
    double Ps = 0.0;      // total specular power
    double Omega = 0.0;   // mean channel power gain
};

inline RayAmplitudes solve_ray_amplitudes(const MftrParams& p) {
    p.validate();
    RayAmplitudes r;
    r.Ps = 2.0 * p.sigma2 * p.mu * p.K;
    r.Omega = r.Ps + 2.0 * p.sigma2 * p.mu;
    if (r.Ps == 0.0) return r;
    if (p.mu >= 2) {
        r.V1 = r.V2 = std::sqrt(p.delta * r.Ps / 2.0);
        r.U = std::sqrt(r.Ps * (1.0 - p.delta) / (p.mu - 1));
    } else {
        // V1, V2 are the roots of x^2 - S x + Delta Ps / 2 with
        // V1^2 + V2^2 = Ps; real for any Delta <= 1
        const double s = std::sqrt(r.Ps * (1.0 + p.delta));
        const double d = std::sqrt(std::max(r.Ps * (1.0 - p.delta), 0.0));
        r.V1 = 0.5 * (s + d);
        r.V2 = 0.5 * (s - d);
    }
    return r;
}

// One draw of |alpha|^2 / Omega.
inline double sample_normalized_power(const MftrParams& p, const RayAmplitudes& rays,
                                      SamplerStrategy strategy, SampleStream& rng) {
    const double g = sample_gamma(rng, p.m) / p.m;  // unit-mean shadowing
    const double sg = std::sqrt(g);
    const double sigma = std::sqrt(p.sigma2);
    if (strategy == SamplerStrategy::conditional_chi2) {
        const double t = 2.0 * M_PI * rng.next_unit();
        const double lambda = g * rays.Ps * (1.0 + p.delta * std::cos(t)) / p.sigma2;
        return p.sigma2 * sample_noncentral_chi2(rng, 2 * p.mu, lambda) / rays.Omega;
    }
    const double t1 = 2.0 * M_PI * rng.next_unit();
    const double t2 = 2.0 * M_PI * rng.next_unit();
    double re = sg * (rays.V1 * std::cos(t1) + rays.V2 * std::cos(t2)) +
                sigma * rng.next_normal();
    double im = sg * (rays.V1 * std::sin(t1) + rays.V2 * std::sin(t2)) +
                sigma * rng.next_normal();
    double power = re * re + im * im;
    for (int n = 2; n <= p.mu; ++n) {
        const double tn = 2.0 * M_PI * rng.next_unit();
        re = sg * rays.U * std::cos(tn) + sigma * rng.next_normal();
        im = sg * rays.U * std::sin(tn) + sigma * rng.next_normal();
        power += re * re + im * im;
    }
    return power / rays.Omega;
}

struct McEstimates {
    MetricResult gsop;  // P(Lambda < theta)
    MetricResult afe;   // mean Lambda
    MetricResult ailr;  // (1 - mean Lambda) Rs
    MetricResult sop;   // P(Lambda < 1)
    std::int64_t samples = 0;
};

namespace detail {

struct McAccumulator {
    std::int64_t n_outage = 0;   // Lambda < theta
    std::int64_t n_sop = 0;      // Lambda < 1
    double sum_lambda = 0.0;
    double sum_lambda_sq = 0.0;

    void merge(const McAccumulator& o) {
        n_outage += o.n_outage;
        n_sop += o.n_sop;
        sum_lambda += o.sum_lambda;
        sum_lambda_sq += o.sum_lambda_sq;
    }
};

inline uint32_t scenario_stream_tag(const SecrecyScenario& sc) {
    uint64_t h = 0x243F6A8885A308D3ull;
    auto feed = [&h](double v) {
        uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        h = mix64(h ^ bits);
    };
    for (const LinkConfig* link : {&sc.bob, &sc.eve}) {
        feed(link->params.m);
        feed(static_cast<double>(link->params.mu));
        feed(link->params.sigma2);
        feed(link->params.K);
        feed(link->params.delta);
        feed(static_cast<double>(link->L));
        feed(link->gamma_bar);
    }
    feed(sc.rs);
    feed(sc.theta);
    return static_cast<uint32_t>(h ^ (h >> 32));
}

}  // namespace detail

// Estimate all partial-secrecy metrics from cfg.samples realizations.
// Accumulation is chunked: each batch is summed sequentially and batches are
// merged in index order, so the result is bit-identical for any thread count.
inline McEstimates estimate_metrics(const SecrecyScenario& sc, const SamplerConfig& cfg) {
    sc.validate();
    cfg.validate();
    const RayAmplitudes rays_b = solve_ray_amplitudes(sc.bob.params);
    const RayAmplitudes rays_e = solve_ray_amplitudes(sc.eve.params);
    const uint32_t tag = detail::scenario_stream_tag(sc);
    const double thr_theta = sc.theta * sc.rs;  // Lambda < theta  <=>  log2 Phi < theta Rs
    const double log2_2rs = sc.rs;

    const std::int64_t n_batches = (cfg.samples + cfg.batch - 1) / cfg.batch;
    std::vector<detail::McAccumulator> partial(static_cast<std::size_t>(n_batches));

    auto run_batch = [&](std::int64_t b) {
        detail::McAccumulator acc;
        const std::int64_t lo = b * cfg.batch;
        const std::int64_t hi = std::min<std::int64_t>(lo + cfg.batch, cfg.samples);
        for (std::int64_t s = lo; s < hi; ++s) {
            SampleStream rng(cfg.seed, tag, static_cast<uint64_t>(s));
            double psi_b = 0.0;
            for (int l = 0; l < sc.bob.L; ++l)
                psi_b += sample_normalized_power(sc.bob.params, rays_b, cfg.strategy, rng);
            psi_b *= sc.bob.gamma_bar;
            double psi_e = 0.0;
            for (int l = 0; l < sc.eve.L; ++l)
                psi_e += sample_normalized_power(sc.eve.params, rays_e, cfg.strategy, rng);
            psi_e *= sc.eve.gamma_bar;
            // Lambda through log2 Phi, clamped to [0, Rs] in rate units
            const double cap_gap = std::log2((1.0 + psi_b) / (1.0 + psi_e));
            const double lam_rate = std::min(std::max(cap_gap, 0.0), log2_2rs);
            const double lambda = lam_rate / sc.rs;
            if (lam_rate < thr_theta) ++acc.n_outage;
            if (cap_gap < log2_2rs) ++acc.n_sop;
            acc.sum_lambda += lambda;
            acc.sum_lambda_sq += lambda * lambda;
        }
        partial[static_cast<std::size_t>(b)] = acc;
    };

    parallel_for(n_batches, run_batch, cfg.threads);

    detail::McAccumulator total;
    for (const auto& acc : partial) total.merge(acc);  // fixed merge order

    const double n = static_cast<double>(cfg.samples);
    const double p_out = total.n_outage / n;
    const double p_sop = total.n_sop / n;
    const double mean_lam = total.sum_lambda / n;
    const double var_lam =
        std::max(total.sum_lambda_sq / n - mean_lam * mean_lam, 0.0);
    const double se_lam = std::sqrt(var_lam / n);

    McEstimates out;
    out.samples = cfg.samples;
    out.gsop = {p_out, Method::monte_carlo, 0, std::sqrt(p_out * (1.0 - p_out) / n)};
    out.afe = {mean_lam, Method::monte_carlo, 0, se_lam};
    out.ailr = {(1.0 - mean_lam) * sc.rs, Method::monte_carlo, 0, sc.rs * se_lam};
    out.sop = {p_sop, Method::monte_carlo, 0, std::sqrt(p_sop * (1.0 - p_sop) / n)};
    return out;
}

}  // namespace mftr
