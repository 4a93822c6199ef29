#pragma once

#include <stdexcept>
#include <string>

namespace mftr {

// Controls for non-terminating series evaluation.
struct EvalOptions {
    double rel_tolerance = 1e-12;
    int max_terms = 10000;
};

// A series or quadrature failed to reach the requested tolerance.
class convergence_error : public std::runtime_error {
  public:
    convergence_error(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

// A hypergeometric parameter hits a Pochhammer zero before termination.
class pole_error : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Input violates a structural precondition (e.g. omega_0 = 0 in the phi
// recursion).
class degenerate_input : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace mftr
