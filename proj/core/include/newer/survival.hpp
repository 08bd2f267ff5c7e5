#pragma once

#include <span>
#include <vector>

namespace newer {

/// Two-parameter Weibull law. `scale` is in seconds, `shape` is dimensionless.
struct WeibullParams {
    double scale = 1.0;
    double shape = 1.0;

    bool valid() const noexcept;
    /// Throws DomainError unless both parameters are positive and finite.
    void validate() const;

    friend bool operator==(const WeibullParams&, const WeibullParams&) = default;
};

double weibull_pdf(const WeibullParams& p, double t);
double weibull_survival(const WeibullParams& p, double t);
double weibull_hazard(const WeibullParams& p, double t);

/// 1 - S(t), evaluated without cancellation for small t.
double weibull_cdf(const WeibullParams& p, double t);

/// Time t with S(t) = s, for s in (0, 1].
double weibull_survival_inverse(const WeibullParams& p, double s);

/// Time t with 1 - S(t) = d, for d in [0, 1). Accurate when d is tiny.
double weibull_cdf_inverse(const WeibullParams& p, double d);

/// Right-continuous empirical survival: value(t) = #{delays >= t} / n.
class EmpiricalSurvival {
public:
    /// Throws InputError on an empty, negative or non-finite sample.
    explicit EmpiricalSurvival(std::vector<double> delays);

    double at(double t) const;
    std::span<const double> sorted() const noexcept { return delays_; }
    std::size_t count() const noexcept { return delays_.size(); }

private:
    std::vector<double> delays_;
};

double empirical_survival_at(const EmpiricalSurvival& e, double t);

/// Two-sided one-sample Kolmogorov-Smirnov statistic of `sample` against `model`.
double ks_statistic(const WeibullParams& model, const EmpiricalSurvival& sample);

}  // namespace newer
