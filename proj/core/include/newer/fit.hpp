#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newer/lasso.hpp"
#include "newer/samples.hpp"
#include "newer/survival.hpp"

namespace newer {

/// Weights of the networked regression terms:
///   F = G1 + mu * G2 + eta * G3
///   G1 = -sum_i l_i(lambda_i, k_i)
///   G2 = 1/(2N) ||log lambda - log X beta||^2 + alpha_beta ||beta||_1
///   G3 = 1/(2N) ||log k      - log X gamma||^2 + alpha_gamma ||gamma||_1
struct Hyperparams {
    double mu = 10.0;
    double eta = 10.0;
    double alpha_beta = 6e-5;
    double alpha_gamma = 8e-6;

    void validate() const;
    friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

enum class ModelKind { newer, exponential, rayleigh, cox_shared_shape, plain_weibull };

std::string_view to_string(ModelKind kind);
/// Accepts the canonical names plus "cox" and "weibull"/"wbl". Throws ConfigError.
ModelKind parse_model_kind(std::string_view name);

/// How parameters are produced for users that were not part of the fit.
enum class OutOfSampleMode {
    regress,              ///< lambda = exp(log x . beta), k = exp(log x . gamma)
    regress_scale,        ///< lambda regressed, k = shared_shape
    population_mean,      ///< mean lambda and mean k of the fitted users
};

std::string_view to_string(OutOfSampleMode mode);
OutOfSampleMode parse_out_of_sample_mode(std::string_view name);

struct UserDynamics {
    std::string id;
    WeibullParams params;
    std::size_t n_events = 0;

    friend bool operator==(const UserDynamics&, const UserDynamics&) = default;
};

struct NewerModel {
    ModelKind kind = ModelKind::newer;
    std::vector<std::string> feature_names;
    Hyperparams hyper;
    std::vector<double> beta;
    std::vector<double> gamma;
    /// Fitted users sorted by id.
    std::vector<UserDynamics> users;

    OutOfSampleMode out_of_sample = OutOfSampleMode::regress;
    /// Shared shape for regress_scale, or mean parameters for population_mean.
    WeibullParams out_of_sample_params;
    /// Population-median parameters for users with neither data nor features.
    WeibullParams fallback;

    const UserDynamics* find(std::string_view user) const;
    /// Positive finite parameters and coefficient lengths matching the schema.
    void validate() const;

    friend bool operator==(const NewerModel&, const NewerModel&) = default;
};

struct FitReport {
    /// Objective at the start and after every outer iteration.
    std::vector<double> objective;
    bool converged = false;
    int iterations = 0;
};

struct FitResult {
    NewerModel model;
    FitReport report;
};

struct SolverOptions {
    /// Stop when the relative objective decrease of an outer iteration is below this.
    double tolerance = 1e-7;
    int max_iterations = 200;
    unsigned threads = 1;
    /// Pins every shape to this value and skips the shape block.
    std::optional<double> fixed_shape;
    /// Absolute slope tolerance of the per-user Newton solves, per event.
    double newton_tolerance = 1e-11;
    LassoOptions lasso;
};

/// Box constraints on per-user parameters.
inline constexpr double kMinScale = 1e-6;
inline constexpr double kMaxScale = 1e9;
inline constexpr double kMinShape = 1e-2;
inline constexpr double kMaxShape = 50.0;

/// m ln k + (k-1) sum ln T - m k ln lambda - lambda^{-k} sum T^k.
double user_log_likelihood(const WeibullParams& p, const SubcascadeSample& sample);

/// F for the users in `samples`, which must all be present in the model and
/// in X. Throws InputError on missing users or a schema mismatch.
double newer_objective(const NewerModel& model, std::span<const SubcascadeSample> samples,
                       const FeatureMatrix& features);

/// Partial derivatives of the smooth part of F with respect to each user's
/// (lambda_i, k_i), in the order of `samples`.
struct UserGradient {
    double d_scale;
    double d_shape;
};
std::vector<UserGradient> newer_gradient(const NewerModel& model,
                                         std::span<const SubcascadeSample> samples,
                                         const FeatureMatrix& features);

/// Block coordinate descent in the order lambda, k, beta, gamma. Each
/// per-user block is a safeguarded Newton solve in log-parameter space; beta
/// and gamma are LASSO fits by coordinate descent. `warm_start`, when given,
/// supplies initial parameters for matching users and coefficients.
FitResult fit_newer(std::span<const SubcascadeSample> samples, const FeatureMatrix& features,
                    const Hyperparams& hyper, const SolverOptions& options = {},
                    const NewerModel* warm_start = nullptr);

/// Parameters for a user outside the fit, from its feature row. Results are
/// clamped to the parameter box. Throws DomainError on a nonpositive feature.
WeibullParams regress_out_of_sample(const NewerModel& model, std::span<const double> x);

/// exponential / rayleigh: closed-form scale with k fixed to 1 / 2.
/// cox_shared_shape: one shared k maximizing the profile likelihood.
/// plain_weibull: fit_newer with mu = eta = 0.
/// The scale regression for out-of-sample users uses alpha_beta from `hyper`.
FitResult fit_baseline(ModelKind kind, std::span<const SubcascadeSample> samples,
                       const FeatureMatrix& features, const Hyperparams& hyper,
                       const SolverOptions& options = {});

/// Dispatches to fit_newer or fit_baseline.
FitResult fit_model(ModelKind kind, std::span<const SubcascadeSample> samples,
                    const FeatureMatrix& features, const Hyperparams& hyper,
                    const SolverOptions& options = {}, const NewerModel* warm_start = nullptr);

/// Keeps users with at least `min_events` delays and a well-posed sample.
std::vector<SubcascadeSample> select_training_samples(std::span<const SubcascadeSample> samples,
                                                      std::size_t min_events);

}  // namespace newer
