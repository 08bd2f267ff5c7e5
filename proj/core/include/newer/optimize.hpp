#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace newer {

/// Value, first and second derivative of a scalar function at a point.
struct Derivatives {
    double value;
    double slope;
    double curvature;
};

struct Minimize1dResult {
    double x;
    Derivatives at;
    int iterations;
};

/// Minimizes a smooth scalar function on [lo, hi] starting from x0.
///
/// Newton steps are taken where the curvature is positive; otherwise the
/// step bisects towards the bracket end in the descent direction. The
/// bracket [lo_b, hi_b] shrinks using the sign of the slope. Every accepted
/// step strictly does not increase the value (backtracking by halving), so
/// the result is never worse than x0. Stops when |slope| <= slope_tol, at an
/// active box bound, or when no decreasing step exists.
template <class Eval>
Minimize1dResult minimize_1d(Eval&& eval, double x0, double lo, double hi, double slope_tol,
                             int max_iterations = 200) {
    double x = std::clamp(x0, lo, hi);
    Derivatives cur = eval(x);
    double lo_b = lo;
    double hi_b = hi;
    int it = 0;
    for (; it < max_iterations; ++it) {
        if (std::abs(cur.slope) <= slope_tol) break;
        if ((x <= lo && cur.slope > 0.0) || (x >= hi && cur.slope < 0.0)) break;
        if (cur.slope > 0.0) {
            hi_b = x;
        } else {
            lo_b = x;
        }

        double target;
        if (cur.curvature > 0.0 && std::isfinite(cur.curvature)) {
            target = x - cur.slope / cur.curvature;
        } else {
            target = cur.slope > 0.0 ? 0.5 * (lo_b + x) : 0.5 * (x + hi_b);
        }
        if (!(target > lo_b && target < hi_b)) {
            target = cur.slope > 0.0 ? 0.5 * (lo_b + x) : 0.5 * (x + hi_b);
        }

        bool accepted = false;
        Derivatives next{};
        double step = target - x;
        for (int halving = 0; halving < 80 && step != 0.0; ++halving) {
            const double candidate = x + step;
            if (candidate == x) break;
            next = eval(candidate);
            if (std::isfinite(next.value) && next.value <= cur.value) {
                x = candidate;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const bool stalled = std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                                   std::max(1.0, std::abs(x));
        cur = next;
        if (stalled) break;
    }
    return {x, cur, it};
}

}  // namespace newer
