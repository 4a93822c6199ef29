#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mftr/quadrature.hpp"

using namespace mftr;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("polynomial and trig integrals") {
    CHECK_THAT(integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0).value,
               WithinRel(1.0 / 3.0, 1e-13));
    CHECK_THAT(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI).value,
               WithinRel(2.0, 1e-12));
    CHECK(integrate_adaptive([](double x) { return x; }, 2.0, 2.0).value == 0.0);
}

TEST_CASE("peaked integrand needs subdivision") {
    // narrow Gaussian off-center
    auto f = [](double x) { return std::exp(-500.0 * (x - 0.7) * (x - 0.7)); };
    const double ref = std::sqrt(M_PI / 500.0);
    CHECK_THAT(integrate_adaptive(f, -20.0, 20.0, {1e-12, 4000}).value, WithinRel(ref, 1e-9));
}

TEST_CASE("semi-infinite exponential tails") {
    CHECK_THAT(integrate_semi_infinite([](double y) { return std::exp(-y); }, 0.0, 1.0).value,
               WithinRel(1.0, 1e-10));
    // gamma density with shape 3
    auto f = [](double y) { return 0.5 * y * y * std::exp(-y); };
    CHECK_THAT(integrate_semi_infinite(f, 0.0, 3.0).value, WithinRel(1.0, 1e-9));
}

TEST_CASE("interval budget exhaustion reports achieved tolerance") {
    auto nasty = [](double x) { return std::sin(1.0 / (x + 1e-8)); };
    try {
        integrate_adaptive(nasty, 0.0, 1.0, {1e-16, 8});
        FAIL("expected convergence_error");
    } catch (const convergence_error& e) {
        CHECK(e.achieved_tolerance > 1e-16);
    }
}
