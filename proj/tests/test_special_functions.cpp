#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mftr/quadrature.hpp"
#include "mftr/special_functions.hpp"

using namespace mftr;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("ln_gamma known values") {
    CHECK_THAT(ln_gamma(1.0), WithinAbs(0.0, 1e-14));
    CHECK_THAT(ln_gamma(0.5), WithinRel(0.5 * std::log(M_PI), 1e-12));
    CHECK_THAT(ln_gamma(7.0), WithinRel(std::log(720.0), 1e-12));
    CHECK_THROWS_AS(ln_gamma(0.0), std::domain_error);
    CHECK_THROWS_AS(ln_gamma(-2.5), std::domain_error);
}

TEST_CASE("ln_gamma against long-double reference on a grid") {
    for (double x = 0.1; x < 300.0; x *= 1.37) {
        const long double ref = lgammal(static_cast<long double>(x));
        CHECK_THAT(ln_gamma(x), WithinRel(static_cast<double>(ref), 1e-12));
    }
}

TEST_CASE("lower incomplete gamma examples") {
    CHECK_THAT(lower_inc_gamma(1.0, 1.0), WithinRel(1.0 - std::exp(-1.0), 1e-12));
    CHECK(lower_inc_gamma(3.7, 0.0) == 0.0);
    // frozen from the defining integral: Upsilon(2,3) = 1 - 4 e^{-3}
    CHECK_THAT(lower_inc_gamma(2.0, 3.0), WithinRel(0.80085172652854423, 1e-12));
    CHECK_THROWS_AS(lower_inc_gamma(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(lower_inc_gamma(1.0, -1.0), std::domain_error);
}

TEST_CASE("lower incomplete gamma against quadrature of the defining integral") {
    for (const auto& [a, x] : {std::pair{1.3, 0.4}, {2.0, 3.0}, {5.5, 2.0}, {12.0, 20.0}}) {
        // compare the regularized form so one absolute tolerance fits all scales
        const double lg = std::lgamma(a);
        const double ref = integrate_adaptive(
                               [a = a, lg](double t) {
                                   return std::exp((a - 1.0) * std::log(t) - t - lg);
                               },
                               0.0, x, {1e-13, 4000})
                               .value;
        CHECK_THAT(reg_lower_gamma(a, x), WithinRel(ref, 1e-10));
    }
}

TEST_CASE("regularized gamma is a CDF in x") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> ua(0.2, 40.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = ua(gen);
        double prev = 0.0;
        for (double x = 0.0; x < 4.0 * a; x += 0.37 * a) {
            const double p = reg_lower_gamma(a, x);
            CHECK(p >= prev - 1e-15);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            prev = p;
        }
    }
    CHECK_THAT(reg_lower_gamma(3.0, std::numeric_limits<double>::infinity()),
               WithinAbs(1.0, 0.0));
}

TEST_CASE("kummer terminating examples") {
    CHECK(kummer_1f1(0.0, 5.0, 3.7) == 1.0);
    for (const auto& [b, z] : {std::pair{4.0, 1.3}, {-7.5, 2.0}, {2.2, -0.4}})
        CHECK_THAT(kummer_1f1(-1.0, b, z), WithinRel(1.0 - z / b, 1e-13));
    // 1F1(-2; 3; 1) = 1 - 2/3 + 1/12
    CHECK_THAT(kummer_1f1(-2.0, 3.0, 1.0), WithinRel(0.41666666666666667, 1e-13));
}

TEST_CASE("terminating kummer ignores tolerance settings") {
    const EvalOptions loose{1e-3, 17};
    const EvalOptions tight{1e-15, 100000};
    for (double z : {0.3, 2.0, 11.0, -4.0}) {
        const double a = -6.0;
        const double b = -9.0;  // below the pole window for n = 6
        CHECK(kummer_1f1(a, b, z, loose) == kummer_1f1(a, b, z, tight));
    }
}

TEST_CASE("kummer pole detection") {
    // (b)_k hits zero at k = 2 before the n = 3 series ends
    CHECK_THROWS_AS(kummer_1f1(-3.0, -1.0, 0.5), pole_error);
    CHECK_THROWS_AS(kummer_1f1(-5.0, 0.0, 0.5), pole_error);
    // b = -5 is past the termination index of n = 3: fine
    CHECK_NOTHROW(kummer_1f1(-3.0, -5.0, 0.5));
}

TEST_CASE("kummer transformation on the positive regime") {
    // 1F1(a;b;z) = e^z 1F1(b-a;b;-z) for a, b-a > 0
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> upar(0.3, 6.0), uz(-20.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = upar(gen);
        const double b = a + upar(gen);
        const double z = uz(gen);
        const double lhs = kummer_1f1(a, b, z);
        const double rhs = std::exp(z) * kummer_1f1(b - a, b, -z);
        CHECK_THAT(lhs, WithinRel(rhs, 1e-9));
    }
}

TEST_CASE("kummer non-convergence and unsupported regimes") {
    CHECK_THROWS_AS(kummer_1f1(2.0, 3.0, 50.0, EvalOptions{1e-12, 5}), convergence_error);
    CHECK_THROWS_AS(kummer_1f1(-1.5, 3.0, 1.0), std::domain_error);  // negative non-integer a
    try {
        kummer_1f1(2.0, 3.0, 50.0, EvalOptions{1e-12, 5});
        FAIL("expected convergence_error");
    } catch (const convergence_error& e) {
        CHECK(e.achieved_tolerance > 1e-12);
    }
}

TEST_CASE("gauss 2f1 examples") {
    CHECK(gauss_2f1(1.3, 0.4, 2.2, 0.0) == 1.0);
    // 2F1(1,1;2;z) = -ln(1-z)/z
    CHECK_THAT(gauss_2f1(1.0, 1.0, 2.0, -1.0), WithinRel(std::log(2.0), 1e-12));
    CHECK_THAT(gauss_2f1(1.0, 1.0, 2.0, -0.25), WithinRel(-std::log(1.25) / -0.25, 1e-12));
    CHECK_THROWS_AS(gauss_2f1(1.0, 1.0, 2.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(gauss_2f1(1.0, 1.0, -3.0, -0.5), std::domain_error);
}

TEST_CASE("pfaff transform agrees with the direct series on (-1, 0)") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> upar(0.2, 5.0), uz(-0.95, -0.05);
    const EvalOptions opts;
    for (int trial = 0; trial < 200; ++trial) {
        const double a = upar(gen);
        const double b = upar(gen);
        const double c = upar(gen) + 0.2;
        const double z = uz(gen);
        // direct sum, tracking the peak term so the comparison tolerance can
        // account for the alternating-series cancellation
        double term = 1.0, direct = 1.0, peak = 1.0;
        for (int k = 0; k < opts.max_terms; ++k) {
            term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
            direct += term;
            peak = std::max(peak, std::abs(term));
            if (std::abs(term) <= 1e-16 * std::abs(direct) && k > 1) break;
        }
        const double pfaff = std::exp(-a * std::log1p(-z)) *
                             detail::gauss_2f1_direct(a, c - b, c, z / (z - 1.0), opts);
        CHECK_THAT(direct, WithinAbs(pfaff, 1e-12 * std::abs(pfaff) + 1e-13 * peak));
    }
}

TEST_CASE("gauss 2f1 non-convergence error") {
    CHECK_THROWS_AS(gauss_2f1(1.0, 1.0, 2.0, -0.4, EvalOptions{1e-14, 3}), convergence_error);
}

static double beta_term_oracle(double u, double nu, double c) {
    // direct integral along the real parameterization; for nu < 1 the
    // substitution s = t^{1/nu} removes the endpoint singularity
    if (nu < 1.0) {
        auto g = [nu, c](double t) {
            return std::exp((c - 1.0) * std::log1p(std::pow(t, 1.0 / nu))) / nu;
        };
        return integrate_adaptive(g, 0.0, std::pow(u, nu), {1e-13, 8000}).value;
    }
    auto f = [nu, c](double s) {
        return std::exp((nu - 1.0) * std::log(s) + (c - 1.0) * std::log1p(s));
    };
    return integrate_adaptive(f, 0.0, u, {1e-13, 8000}).value;
}

TEST_CASE("real beta term examples") {
    // (u, 1, 1): integrand is 1, so the value is u itself
    CHECK_THAT(real_beta_term(3.0, 1.0, 1.0), WithinRel(3.0, 1e-9));
    CHECK_THAT(real_beta_term(3.0, 1.0, 1.0), WithinRel(beta_term_oracle(3.0, 1.0, 1.0), 1e-10));
    // c = 0 gives the logarithmic case
    CHECK_THAT(real_beta_term(3.0, 1.0, 0.0), WithinRel(std::log1p(3.0), 1e-9));
    // frozen from the defining integral (and mpmath): int_0^2 s (1+s)^-2 ds
    CHECK_THAT(real_beta_term(2.0, 2.0, -1.0), WithinRel(0.43194562200144302, 1e-9));
    CHECK_THAT(real_beta_term(1e-8, 2.0, -3.0), WithinAbs(0.0, 1e-15));
}

TEST_CASE("real beta term against quadrature on a random grid") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> uu(1e-3, 50.0), unu(1e-2, 10.0), uc(-20.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double u = uu(gen);
        const double nu = unu(gen);
        const double c = uc(gen);
        const double got = real_beta_term(u, nu, c);
        const double ref = beta_term_oracle(u, nu, c);
        CHECK_THAT(got, WithinAbs(ref, 1e-8 + 1e-8 * std::abs(ref)));
    }
}

TEST_CASE("regularized incomplete beta basics") {
    CHECK(reg_inc_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(reg_inc_beta(2.0, 3.0, 1.0) == 1.0);
    // I_x(1,1) = x
    CHECK_THAT(reg_inc_beta(1.0, 1.0, 0.37), WithinRel(0.37, 1e-12));
    const double ref = integrate_adaptive([](double t) { return 12.0 * t * (1 - t) * (1 - t); },
                                          0.0, 0.3, {1e-13, 2000})
                           .value;
    CHECK_THAT(reg_inc_beta(2.0, 3.0, 0.3), WithinRel(ref, 1e-10));
}
