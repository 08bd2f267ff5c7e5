#pragma once

#include <span>
#include <vector>

#include "newer/samples.hpp"

namespace newer {

struct LassoOptions {
    /// Stop when the largest coefficient change in a sweep falls below this.
    double tolerance = 1e-13;
    int max_sweeps = 100000;
};

struct LassoResult {
    std::vector<double> coef;
    int sweeps = 0;
    bool converged = false;
};

inline double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

/// (1/2N) ||y - Z b||^2 + alpha ||b||_1 with N = number of rows.
double lasso_objective(const RowMatrix& design, std::span<const double> y,
                       std::span<const double> coef, double alpha);

/// Cyclic coordinate descent with soft-thresholding for the problem above.
/// No intercept. Starting from `warm_start` (zeros if empty), every
/// coordinate update is an exact minimization, so the objective never
/// increases relative to the starting point.
LassoResult lasso_coordinate_descent(const RowMatrix& design, std::span<const double> y,
                                     double alpha, std::span<const double> warm_start = {},
                                     const LassoOptions& options = {});

}  // namespace newer
