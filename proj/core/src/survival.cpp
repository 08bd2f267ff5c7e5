#include "newer/survival.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "newer/error.hpp"

namespace newer {

namespace {

// (t / scale)^shape through logs so extreme shapes do not overflow early.
double scaled_power(const WeibullParams& p, double t) {
    return std::exp(p.shape * (std::log(t) - std::log(p.scale)));
}

void require_positive_time(double t, const char* op) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw DomainError(std::string(op) + ": time must be positive and finite, got " +
                          std::to_string(t));
    }
}

}  // namespace

bool WeibullParams::valid() const noexcept {
    return std::isfinite(scale) && std::isfinite(shape) && scale > 0.0 && shape > 0.0;
}

void WeibullParams::validate() const {
    if (!valid()) {
        throw DomainError("invalid Weibull parameters (scale=" + std::to_string(scale) +
                          ", shape=" + std::to_string(shape) + ")");
    }
}

double weibull_pdf(const WeibullParams& p, double t) {
    p.validate();
    require_positive_time(t, "weibull_pdf");
    const double log_ratio = std::log(t) - std::log(p.scale);
    const double z = std::exp(p.shape * log_ratio);
    return std::exp(std::log(p.shape) - std::log(p.scale) + (p.shape - 1.0) * log_ratio - z);
}

double weibull_survival(const WeibullParams& p, double t) {
    p.validate();
    if (!(t >= 0.0)) {
        throw DomainError("weibull_survival: negative time " + std::to_string(t));
    }
    if (t == 0.0) {
        return 1.0;
    }
    if (std::isinf(t)) {
        return 0.0;
    }
    return std::exp(-scaled_power(p, t));
}

double weibull_cdf(const WeibullParams& p, double t) {
    p.validate();
    if (!(t >= 0.0)) {
        throw DomainError("weibull_cdf: negative time " + std::to_string(t));
    }
    if (t == 0.0) {
        return 0.0;
    }
    if (std::isinf(t)) {
        return 1.0;
    }
    return -std::expm1(-scaled_power(p, t));
}

double weibull_hazard(const WeibullParams& p, double t) {
    p.validate();
    require_positive_time(t, "weibull_hazard");
    const double log_ratio = std::log(t) - std::log(p.scale);
    return std::exp(std::log(p.shape) - std::log(p.scale) + (p.shape - 1.0) * log_ratio);
}

double weibull_survival_inverse(const WeibullParams& p, double s) {
    p.validate();
    if (!(s > 0.0 && s <= 1.0)) {
        throw DomainError("weibull_survival_inverse: survival must lie in (0, 1], got " +
                          std::to_string(s));
    }
    if (s == 1.0) {
        return 0.0;
    }
    return p.scale * std::pow(-std::log(s), 1.0 / p.shape);
}

double weibull_cdf_inverse(const WeibullParams& p, double d) {
    p.validate();
    if (!(d >= 0.0 && d < 1.0)) {
        throw DomainError("weibull_cdf_inverse: probability must lie in [0, 1), got " +
                          std::to_string(d));
    }
    if (d == 0.0) {
        return 0.0;
    }
    return p.scale * std::pow(-std::log1p(-d), 1.0 / p.shape);
}

EmpiricalSurvival::EmpiricalSurvival(std::vector<double> delays) : delays_(std::move(delays)) {
    if (delays_.empty()) {
        throw InputError("empirical survival needs at least one delay");
    }
    for (double d : delays_) {
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw InputError("empirical survival: delays must be finite and nonnegative");
        }
    }
    std::sort(delays_.begin(), delays_.end());
}

double EmpiricalSurvival::at(double t) const {
    if (!(t >= 0.0)) {
        throw DomainError("empirical survival: negative time " + std::to_string(t));
    }
    const auto first_ge = std::lower_bound(delays_.begin(), delays_.end(), t);
    return static_cast<double>(delays_.end() - first_ge) / static_cast<double>(delays_.size());
}

double empirical_survival_at(const EmpiricalSurvival& e, double t) { return e.at(t); }

double ks_statistic(const WeibullParams& model, const EmpiricalSurvival& sample) {
    model.validate();
    const auto xs = sample.sorted();
    const double n = static_cast<double>(xs.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double cdf = weibull_cdf(model, xs[i]);
        const double above = static_cast<double>(i + 1) / n - cdf;
        const double below = cdf - static_cast<double>(i) / n;
        sup = std::max({sup, above, below});
    }
    return sup;
}

}  // namespace newer
