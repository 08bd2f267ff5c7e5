#include "newer/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "newer/error.hpp"

namespace newer {

double lasso_objective(const RowMatrix& design, std::span<const double> y,
                       std::span<const double> coef, double alpha) {
    if (y.size() != design.rows || coef.size() != design.cols) {
        throw InputError("lasso_objective: dimension mismatch");
    }
    double rss = 0.0;
    for (std::size_t i = 0; i < design.rows; ++i) {
        double fit = 0.0;
        for (std::size_t j = 0; j < design.cols; ++j) {
            fit += design(i, j) * coef[j];
        }
        rss += (y[i] - fit) * (y[i] - fit);
    }
    double l1 = 0.0;
    for (double b : coef) {
        l1 += std::abs(b);
    }
    const double n = std::max<std::size_t>(design.rows, 1);
    return rss / (2.0 * n) + alpha * l1;
}

LassoResult lasso_coordinate_descent(const RowMatrix& design, std::span<const double> y,
                                     double alpha, std::span<const double> warm_start,
                                     const LassoOptions& options) {
    const std::size_t n = design.rows;
    const std::size_t p = design.cols;
    if (y.size() != n) {
        throw InputError("lasso: response length does not match design rows");
    }
    if (!warm_start.empty() && warm_start.size() != p) {
        throw InputError("lasso: warm start length does not match design columns");
    }
    if (alpha < 0.0) {
        throw DomainError("lasso: negative penalty");
    }

    LassoResult result;
    result.coef.assign(p, 0.0);
    if (!warm_start.empty()) {
        std::copy(warm_start.begin(), warm_start.end(), result.coef.begin());
    }
    if (n == 0 || p == 0) {
        result.converged = true;
        return result;
    }
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<double> col_sq(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            col_sq[j] += design(i, j) * design(i, j);
        }
    }

    // residual r = y - Z b
    std::vector<double> residual(y.begin(), y.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            residual[i] -= design(i, j) * result.coef[j];
        }
    }

    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        double max_change = 0.0;
        double max_coef = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (col_sq[j] == 0.0) {
                result.coef[j] = 0.0;
                continue;
            }
            const double old = result.coef[j];
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                rho += design(i, j) * residual[i];
            }
            rho = rho * inv_n + old * col_sq[j] * inv_n;
            const double updated = soft_threshold(rho, alpha) / (col_sq[j] * inv_n);
            const double delta = updated - old;
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) {
                    residual[i] -= design(i, j) * delta;
                }
                result.coef[j] = updated;
            }
            max_change = std::max(max_change, std::abs(delta));
            max_coef = std::max(max_coef, std::abs(updated));
        }
        result.sweeps = sweep;
        if (max_change <= options.tolerance * std::max(1.0, max_coef)) {
            result.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace newer
