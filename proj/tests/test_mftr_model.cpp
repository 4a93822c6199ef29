#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mftr/mftr_model.hpp"
#include "mftr/quadrature.hpp"

using namespace mftr;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const MftrParams kBobFig2{4.0, 2, 0.5, 2.5, 0.8};
const MftrParams kEveFig2{3.0, 2, 0.5, 6.5, 0.9};

// kappa-mu shadowed weight, the Delta = 0 collapse of omega_i
double kappa_mu_shadowed_weight(double m, int mu, double K, int i) {
    return std::exp(m * std::log(m) + std::lgamma(m + i) + i * std::log(mu * K) -
                    std::lgamma(m) - std::lgamma(i + 1.0) -
                    (m + i) * std::log(m + mu * K));
}

// brute-force L-fold self-convolution of a coefficient prefix
std::vector<double> conv_power(const std::vector<double>& w, int L) {
    std::vector<double> r(w.size(), 0.0);
    r[0] = 1.0;
    for (int rep = 0; rep < L; ++rep) {
        std::vector<double> next(w.size(), 0.0);
        for (std::size_t i = 0; i < w.size(); ++i)
            for (std::size_t j = 0; i + j < w.size(); ++j) next[i + j] += r[i] * w[j];
        r = std::move(next);
    }
    return r;
}

// Rician SNR CDF via the Poisson mixture of central chi-square terms
// (equivalent to 1 - Q_1(sqrt(2K), sqrt(2(K+1)z/gbar))).
double rician_snr_cdf(double K, double gbar, double z) {
    const double x = (K + 1.0) * z / gbar;  // noncentral chi2, lambda = 2K, dof 2
    double sum = 0.0;
    double logw = -K;  // log Poisson weight at n = 0
    for (int n = 0; n < 500; ++n) {
        const double w = std::exp(logw);
        sum += w * reg_lower_gamma(n + 1.0, x);
        if (w < 1e-18 && n > K) break;
        logw += std::log(K) - std::log1p(n);
    }
    return sum;
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_THROWS_WITH((MftrParams{1.0, 1, 0.5, 1.0, 1.2}.validate()),
                      Catch::Matchers::ContainsSubstring("[0, 1]"));
    CHECK_THROWS_AS((MftrParams{0.0, 1, 0.5, 1.0, 0.5}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((MftrParams{1.0, 0, 0.5, 1.0, 0.5}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((LinkConfig{kBobFig2, 0, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((LinkConfig{kBobFig2, 1, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("omega in the Rayleigh limit") {
    // K = 0 kills every i >= 1
    auto w = omega_coefficients(MftrParams{1.0, 1, 0.5, 0.0, 0.0}, 10);
    CHECK(w[0] == 1.0);
    for (int i = 1; i <= 10; ++i) CHECK(w[i] == 0.0);
    // K -> 0 approaches it continuously
    auto w2 = omega_coefficients(MftrParams{1.0, 1, 0.5, 1e-9, 0.0}, 4);
    CHECK_THAT(w2[0], WithinAbs(1.0, 1e-8));
    CHECK(w2[1] < 1e-8);
}

TEST_CASE("omega collapses to the kappa-mu shadowed weights at Delta = 0") {
    const MftrParams p{2.0, 2, 0.5, 1.0, 0.0};
    auto w = omega_coefficients(p, 30);
    CHECK_THAT(w[0], WithinRel(0.25, 1e-13));  // (m/(m+muK))^m = (2/4)^2
    for (int i : {0, 1, 2, 7, 19})
        CHECK_THAT(w[i], WithinRel(kappa_mu_shadowed_weight(2.0, 2, 1.0, i), 1e-12));
}

TEST_CASE("omega frozen reference values") {
    // mpmath, 40 digits
    auto we = omega_coefficients(kEveFig2, 20);
    CHECK_THAT(we[0], WithinRel(0.056576266954071288, 1e-11));
    CHECK_THAT(we[1], WithinRel(0.072471127859460447, 1e-11));
    CHECK_THAT(we[5], WithinRel(0.046736936982529731, 1e-11));
    CHECK_THAT(we[20], WithinRel(0.017645109342753916, 1e-11));
    auto wb = omega_coefficients(kBobFig2, 10);
    CHECK_THAT(wb[0], WithinRel(0.10926347926015952, 1e-11));
    CHECK_THAT(wb[3], WithinRel(0.10619162805875548, 1e-11));
    CHECK_THAT(wb[10], WithinRel(0.031332352132411113, 1e-11));
}

TEST_CASE("omega normalization at T = 200") {
    auto w = omega_coefficients(kEveFig2, 200);
    double s = 0.0;
    for (double v : w) s += v;
    CHECK_THAT(s, WithinAbs(1.0, 1e-6));
}

TEST_CASE("phi recursion basics") {
    const std::vector<double> w{0.5, 0.3, 0.2};
    auto p1 = phi_coefficients(w, 1);
    CHECK(p1 == w);
    auto p2 = phi_coefficients(w, 2);
    CHECK_THAT(p2[0], WithinRel(0.25, 1e-15));
    CHECK_THAT(p2[1], WithinRel(0.30, 1e-14));
    CHECK_THAT(p2[2], WithinRel(0.29, 1e-14));
    // phi_1 = L omega_0^{L-1} omega_1
    for (int L : {2, 3, 5}) {
        auto p = phi_coefficients(w, L);
        CHECK_THAT(p[1], WithinRel(L * std::pow(w[0], L - 1) * w[1], 1e-13));
        CHECK_THAT(p[0], WithinRel(std::pow(w[0], L), 1e-15));
    }
    CHECK_THROWS_AS(phi_coefficients({0.0, 0.3}, 2), degenerate_input);
    CHECK_THROWS_AS(phi_coefficients({}, 2), degenerate_input);
}

TEST_CASE("phi equals brute-force self-convolution on random prefixes") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> uw(0.2, 1.0), ur(0.3, 0.9);
    for (int trial = 0; trial < 20; ++trial) {
        // geometric-envelope prefixes, the shape real coefficient tails have
        std::vector<double> w(14);
        const double r = ur(gen);
        double env = 1.0;
        for (double& v : w) {
            v = uw(gen) * env;
            env *= r;
        }
        for (int L : {2, 3, 4}) {
            auto rec = phi_coefficients(w, L);
            auto ref = conv_power(w, L);
            for (std::size_t i = 0; i < w.size(); ++i)
                CHECK_THAT(rec[i], WithinRel(ref[i], 1e-11));
        }
    }
    // short non-decaying prefix: error growth has no room yet
    const std::vector<double> flat{0.9, 0.7, 0.8, 0.6, 0.9, 0.5};
    for (int L : {2, 5}) {
        auto rec = phi_coefficients(flat, L);
        auto ref = conv_power(flat, L);
        for (std::size_t i = 0; i < flat.size(); ++i)
            CHECK_THAT(rec[i], WithinRel(ref[i], 1e-11));
    }
}

TEST_CASE("cache weights match the recursion where it is stable") {
    const SeriesCache cache(LinkConfig{kEveFig2, 3, 10.0}, 60);
    auto rec = phi_coefficients(cache.omega(), 3);
    for (int i = 0; i <= 60; ++i)
        CHECK_THAT(cache.phi()[i], WithinRel(rec[i], 1e-9));
    CHECK_THAT(cache.phi()[0], WithinRel(std::pow(cache.omega()[0], 3), 1e-14));
}

TEST_CASE("rho and nu") {
    CHECK_THAT(rho(kEveFig2, db_to_linear(8.0)), WithinRel(0.4206382296534622, 1e-12));
    CHECK(nu(0, MftrParams{1.0, 2, 0.5, 0.0, 0.0}, 3) == 6.0);
    CHECK(nu(4, kEveFig2, 2) == 8.0);
    const MftrParams rayleigh{1.0, 1, 0.5, 0.0, 0.0};
    CHECK_THAT(rho(rayleigh, 3.7), WithinRel(3.7, 1e-15));
}

TEST_CASE("snr pdf integrates to one") {
    const SeriesCache cache(LinkConfig{kBobFig2, 1, db_to_linear(12.0)}, 50);
    const double mass =
        integrate_semi_infinite([&](double z) { return mrc_snr_pdf(cache, z); }, 0.0,
                                2.0 * db_to_linear(12.0), {1e-10, 8000})
            .value;
    CHECK_THAT(mass, WithinAbs(1.0, 1e-6));
    CHECK(mrc_snr_pdf(cache, 0.0) == 0.0);  // mu L > 1
}

TEST_CASE("snr cdf basics and consistency with the pdf") {
    const SeriesCache cache(LinkConfig{kEveFig2, 2, db_to_linear(8.0)}, 250);
    CHECK(mrc_snr_cdf(cache, 0.0) == 0.0);
    CHECK_THAT(mrc_snr_cdf(cache, 1e9), WithinAbs(1.0, 1e-6));
    double prev = 0.0;
    for (double z = 0.1; z < 100.0; z *= 1.6) {
        const double c = mrc_snr_cdf(cache, z);
        CHECK(c >= prev);
        CHECK(c <= 1.0 + 1e-12);
        prev = c;
        // centered difference vs pdf
        const double h = 1e-4 * z;
        const double d = (mrc_snr_cdf(cache, z + h) - mrc_snr_cdf(cache, z - h)) / (2.0 * h);
        CHECK_THAT(d, WithinAbs(mrc_snr_pdf(cache, z), 1e-5));
    }
}

TEST_CASE("Rayleigh reduction of the MRC CDF") {
    const double gbar = db_to_linear(6.0);
    // exact K = 0 case collapses to 1 - exp(-z/gbar)
    const SeriesCache exact(LinkConfig{MftrParams{1.0, 1, 0.5, 0.0, 0.0}, 1, gbar}, 10);
    // Table-I style row: m = 100, K = 1e-4
    const SeriesCache tab(LinkConfig{MftrParams{100.0, 1, 0.5, 1e-4, 0.0}, 1, gbar}, 60);
    for (double z = 0.05; z < 12.0 * gbar; z *= 1.5) {
        const double ref = 1.0 - std::exp(-z / gbar);
        CHECK_THAT(mrc_snr_cdf(exact, z), WithinAbs(ref, 1e-10));
        CHECK_THAT(mrc_snr_cdf(tab, z), WithinAbs(ref, 1e-4));
    }
}

TEST_CASE("Rician reduction against a Marcum-Q style oracle") {
    const double gbar = db_to_linear(5.0);
    for (double K : {4.0, 25.0}) {
        const SeriesCache cache(LinkConfig{MftrParams{100.0, 1, 0.5, K, 0.0}, 1, gbar}, 400);
        for (double z = 0.1; z < 10.0 * gbar; z *= 1.7)
            CHECK_THAT(mrc_snr_cdf(cache, z), WithinAbs(rician_snr_cdf(K, gbar, z), 1e-4));
    }
}

TEST_CASE("eve equivalent-variable density") {
    const SeriesCache eve(LinkConfig{kEveFig2, 2, db_to_linear(8.0)}, 120);
    const double rs = 1.0;
    // support: zero below 2^Rs - 1
    CHECK(eve_eq_pdf(eve, rs, 0.5) == 0.0);
    CHECK(eve_eq_pdf(eve, rs, 2.0 - 1.0 + 1e-9) > 0.0);
    // Rs = 0 is the identity transform
    for (double z : {0.3, 1.0, 4.2})
        CHECK_THAT(eve_eq_pdf(eve, 0.0, z), WithinRel(mrc_snr_pdf(eve, z), 1e-14));
    const double mass = integrate_semi_infinite([&](double z) { return eve_eq_pdf(eve, rs, z); },
                                                0.0, 8.0 * db_to_linear(8.0), {1e-10, 8000})
                            .value;
    CHECK_THAT(mass, WithinAbs(1.0, 1e-6));
}

TEST_CASE("series cache extension reuses the prefix") {
    const SeriesCache small(LinkConfig{kEveFig2, 2, 5.0}, 40);
    const SeriesCache big = small.extended(90);
    REQUIRE(big.T() == 90);
    for (int i = 0; i <= 40; ++i) CHECK(big.omega()[i] == small.omega()[i]);
    const SeriesCache same = small.extended(40);
    CHECK(same.T() == 40);
    const SeriesCache rebound = big.with_gamma_bar(10.0);
    CHECK(rebound.rho() == rho(kEveFig2, 10.0));
    CHECK(&rebound.omega() == &big.omega());  // shared storage
    const SeriesCache cut = big.truncated(40);
    CHECK(cut.T() == 40);
    CHECK(&cut.omega() == &big.omega());
}
