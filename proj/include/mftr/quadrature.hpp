#pragma once

// Adaptive Gauss-Kronrod (G7,K15) quadrature with interval bisection, plus a
// rational map for semi-infinite integrals.

#include <cmath>
#include <utility>
#include <vector>

#include "mftr/eval.hpp"

namespace mftr {

struct QuadratureOptions {
    double abs_tolerance = 1e-9;
    int max_intervals = 4000;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
};

namespace detail {

// QUADPACK dqk15 nodes and weights.
inline constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
inline void gk15(F& f, double a, double b, double& value, double& err, int& evals) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(mid);
    double k15 = kKronrodWeights[7] * fc;
    double g7 = kGaussWeights[3] * fc;
    double resabs = std::abs(k15);
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double f1 = f(mid - dx);
        const double f2 = f(mid + dx);
        k15 += kKronrodWeights[i] * (f1 + f2);
        resabs += kKronrodWeights[i] * (std::abs(f1) + std::abs(f2));
        if (i % 2 == 1) g7 += kGaussWeights[i / 2] * (f1 + f2);
    }
    evals += 15;
    value = k15 * half;
    const double scaled = std::abs((k15 - g7) * half);
    err = scaled;
    resabs *= std::abs(half);
    if (resabs > 0.0 && scaled > 0.0) {
        const double r = std::pow(200.0 * scaled / resabs, 1.5);
        if (r < 1.0) err = resabs * r;
    }
}

}  // namespace detail

// Integrate f over [a, b] to the given absolute tolerance, bisecting the
// worst interval until the summed error estimate qualifies.  Throws
// convergence_error (carrying the achieved estimate) on interval exhaustion.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b,
                                    const QuadratureOptions& opts = {}) {
    struct Interval {
        double a, b, value, error;
    };
    QuadratureResult res;
    if (a == b) return res;

    // start from a modest uniform subdivision so an isolated feature cannot
    // hide between the nodes of a single wide panel
    constexpr int kInitialPanels = 8;
    std::vector<Interval> heap;
    heap.reserve(64);
    double total_value = 0.0;
    double total_error = 0.0;
    for (int k = 0; k < kInitialPanels; ++k) {
        Interval iv{a + (b - a) * k / kInitialPanels, a + (b - a) * (k + 1) / kInitialPanels,
                    0.0, 0.0};
        detail::gk15(f, iv.a, iv.b, iv.value, iv.error, res.evaluations);
        total_value += iv.value;
        total_error += iv.error;
        heap.push_back(iv);
    }

    while (total_error > opts.abs_tolerance) {
        if (static_cast<int>(heap.size()) >= opts.max_intervals)
            throw convergence_error("integrate_adaptive: interval budget exhausted",
                                    total_error);
        // split the interval with the largest error estimate
        std::size_t worst = 0;
        for (std::size_t i = 1; i < heap.size(); ++i)
            if (heap[i].error > heap[worst].error) worst = i;
        const Interval iv = heap[worst];
        const double mid = 0.5 * (iv.a + iv.b);
        if (mid == iv.a || mid == iv.b)
            throw convergence_error("integrate_adaptive: interval underflow", total_error);
        Interval left{iv.a, mid, 0.0, 0.0};
        Interval right{mid, iv.b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.value, left.error, res.evaluations);
        detail::gk15(f, right.a, right.b, right.value, right.error, res.evaluations);
        total_value += left.value + right.value - iv.value;
        total_error += left.error + right.error - iv.error;
        heap[worst] = left;
        heap.push_back(right);
    }
    res.value = total_value;
    res.error_estimate = total_error;
    return res;
}

// Integrate f over [a, inf) via y = a + scale * t / (1 - t), t in [0, 1).
template <class F>
QuadratureResult integrate_semi_infinite(F&& f, double a, double scale,
                                         const QuadratureOptions& opts = {}) {
    auto mapped = [&f, a, scale](double t) {
        const double om = 1.0 - t;
        const double y = a + scale * t / om;
        return f(y) * scale / (om * om);
    };
    // stop just short of t=1; the Jacobian-weighted integrand of any
    // exponentially decaying f has vanished long before
    return integrate_adaptive(mapped, 0.0, 1.0 - 1e-14, opts);
}

}  // namespace mftr
