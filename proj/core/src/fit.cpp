#include "newer/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "newer/error.hpp"
#include "newer/optimize.hpp"
#include "newer/parallel.hpp"

namespace newer {

namespace {

// Per-user sufficient data for the likelihood.
struct UserData {
    std::string id;
    double m = 0.0;
    double sum_log = 0.0;
    std::vector<double> log_delays;
};

UserData prepare(const SubcascadeSample& s) {
    s.validate();
    UserData d;
    d.id = s.user;
    d.m = static_cast<double>(s.delays.size());
    d.log_delays.reserve(s.delays.size());
    for (double t : s.delays) {
        d.log_delays.push_back(std::log(t));
    }
    d.sum_log = std::accumulate(d.log_delays.begin(), d.log_delays.end(), 0.0);
    return d;
}

std::vector<UserData> prepare_all(std::span<const SubcascadeSample> samples) {
    std::vector<UserData> out;
    out.reserve(samples.size());
    std::unordered_set<std::string> seen;
    for (const auto& s : samples) {
        if (!seen.insert(s.user).second) {
            throw InputError("duplicate subcascade sample for user '" + s.user + "'");
        }
        out.push_back(prepare(s));
    }
    return out;
}

// sum_j exp(shape * (ln T_j - log_scale))
double sum_scaled_powers(const UserData& d, double log_scale, double shape) {
    double acc = 0.0;
    for (double lt : d.log_delays) {
        acc += std::exp(shape * (lt - log_scale));
    }
    return acc;
}

// l_i in terms of (ln lambda, k).
double log_likelihood(const UserData& d, double log_scale, double shape) {
    return d.m * std::log(shape) + (shape - 1.0) * d.sum_log - d.m * shape * log_scale -
           sum_scaled_powers(d, log_scale, shape);
}

// -l_i + (coupling/2)(u - target)^2 as a function of u = ln lambda.
Derivatives scale_block(const UserData& d, double u, double shape, double coupling,
                        double target) {
    const double powers = sum_scaled_powers(d, u, shape);
    const double r = u - target;
    return {d.m * shape * u + powers + 0.5 * coupling * r * r,
            d.m * shape - shape * powers + coupling * r,
            shape * shape * powers + coupling};
}

// -l_i + (coupling/2)(v - target)^2 as a function of v = ln k.
Derivatives shape_block(const UserData& d, double log_scale, double v, double coupling,
                        double target) {
    const double k = std::exp(v);
    double sum_w = 0.0;
    double sum_e = 0.0;
    double sum_we = 0.0;
    double sum_wwe = 0.0;
    for (double lt : d.log_delays) {
        const double w = lt - log_scale;
        const double e = std::exp(k * w);
        sum_w += w;
        sum_e += e;
        sum_we += w * e;
        sum_wwe += w * w * e;
    }
    const double r = v - target;
    const double value = -d.m * v - (k - 1.0) * d.sum_log + d.m * k * log_scale + sum_e;
    return {value + 0.5 * coupling * r * r,
            -d.m - k * sum_w + k * sum_we + coupling * r,
            -k * sum_w + k * sum_we + k * k * sum_wwe + coupling};
}

std::vector<double> linear_predictor(const RowMatrix& z, std::span<const double> coef) {
    std::vector<double> out(z.rows, 0.0);
    for (std::size_t i = 0; i < z.rows; ++i) {
        for (std::size_t j = 0; j < z.cols; ++j) {
            out[i] += z(i, j) * coef[j];
        }
    }
    return out;
}

double l1_norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += std::abs(x);
    return acc;
}

// Objective from log-parameters, summed in user order.
double objective_from_logs(std::span<const UserData> users, std::span<const double> log_scale,
                           std::span<const double> log_shape, const RowMatrix& z,
                           std::span<const double> beta, std::span<const double> gamma,
                           const Hyperparams& h) {
    const double n = static_cast<double>(users.size());
    const auto a = linear_predictor(z, beta);
    const auto b = linear_predictor(z, gamma);
    double g1 = 0.0;
    double rss_scale = 0.0;
    double rss_shape = 0.0;
    for (std::size_t i = 0; i < users.size(); ++i) {
        g1 -= log_likelihood(users[i], log_scale[i], std::exp(log_shape[i]));
        rss_scale += (log_scale[i] - a[i]) * (log_scale[i] - a[i]);
        rss_shape += (log_shape[i] - b[i]) * (log_shape[i] - b[i]);
    }
    const double g2 = rss_scale / (2.0 * n) + h.alpha_beta * l1_norm(beta);
    const double g3 = rss_shape / (2.0 * n) + h.alpha_gamma * l1_norm(gamma);
    return g1 + h.mu * g2 + h.eta * g3;
}

template <class T>
T median_of(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

WeibullParams median_params(std::span<const UserDynamics> users) {
    if (users.empty()) return {1.0, 1.0};
    std::vector<double> scales;
    std::vector<double> shapes;
    for (const auto& u : users) {
        scales.push_back(u.params.scale);
        shapes.push_back(u.params.shape);
    }
    return {median_of(std::move(scales)), median_of(std::move(shapes))};
}

WeibullParams mean_params(std::span<const UserDynamics> users) {
    if (users.empty()) return {1.0, 1.0};
    double s = 0.0;
    double k = 0.0;
    for (const auto& u : users) {
        s += u.params.scale;
        k += u.params.shape;
    }
    const double n = static_cast<double>(users.size());
    return {s / n, k / n};
}

std::vector<std::string> ids_of(std::span<const UserData> users) {
    std::vector<std::string> ids;
    ids.reserve(users.size());
    for (const auto& u : users) ids.push_back(u.id);
    return ids;
}

std::vector<UserDynamics> sorted_dynamics(std::span<const UserData> users,
                                          std::span<const double> log_scale,
                                          std::span<const double> log_shape) {
    std::vector<UserDynamics> out;
    out.reserve(users.size());
    for (std::size_t i = 0; i < users.size(); ++i) {
        out.push_back({users[i].id, {std::exp(log_scale[i]), std::exp(log_shape[i])},
                       static_cast<std::size_t>(users[i].m)});
    }
    std::sort(out.begin(), out.end(),
              [](const UserDynamics& x, const UserDynamics& y) { return x.id < y.id; });
    return out;
}

const double kLogMinScale = std::log(kMinScale);
const double kLogMaxScale = std::log(kMaxScale);
const double kLogMinShape = std::log(kMinShape);
const double kLogMaxShape = std::log(kMaxShape);

// Profile of -sum l_i over a shared shape, with every scale at its
// closed-form optimum lambda_i^k = sum T^k / m_i. Function of v = ln k.
Derivatives shared_shape_profile(std::span<const UserData> users, double v) {
    const double k = std::exp(v);
    double value = 0.0;
    double dk = 0.0;
    double dkk = 0.0;
    for (const auto& d : users) {
        const double top = *std::max_element(d.log_delays.begin(), d.log_delays.end());
        double s0 = 0.0;
        double s1 = 0.0;
        double s2 = 0.0;
        for (double lt : d.log_delays) {
            const double e = std::exp(k * (lt - top));
            s0 += e;
            s1 += lt * e;
            s2 += lt * lt * e;
        }
        const double log_s = k * top + std::log(s0);
        const double r1 = s1 / s0;
        const double r2 = s2 / s0;
        value += -d.m * v - (k - 1.0) * d.sum_log + d.m * (log_s - std::log(d.m)) + d.m;
        dk += -d.m / k - d.sum_log + d.m * r1;
        dkk += d.m / (k * k) + d.m * (r2 - r1 * r1);
    }
    return {value, k * dk, k * k * dkk + k * dk};
}

// ln lambda maximizing l_i for a fixed shape.
double closed_form_log_scale(const UserData& d, double shape) {
    const double top = *std::max_element(d.log_delays.begin(), d.log_delays.end());
    double acc = 0.0;
    for (double lt : d.log_delays) acc += std::exp(shape * (lt - top));
    return std::clamp(top + (std::log(acc) - std::log(d.m)) / shape, kLogMinScale, kLogMaxScale);
}

}  // namespace

void Hyperparams::validate() const {
    for (double v : {mu, eta, alpha_beta, alpha_gamma}) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ConfigError("hyperparameters must be finite and nonnegative");
        }
    }
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::newer: return "newer";
        case ModelKind::exponential: return "exponential";
        case ModelKind::rayleigh: return "rayleigh";
        case ModelKind::cox_shared_shape: return "cox_shared_shape";
        case ModelKind::plain_weibull: return "plain_weibull";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "newer") return ModelKind::newer;
    if (name == "exponential") return ModelKind::exponential;
    if (name == "rayleigh") return ModelKind::rayleigh;
    if (name == "cox_shared_shape" || name == "cox") return ModelKind::cox_shared_shape;
    if (name == "plain_weibull" || name == "weibull" || name == "wbl") {
        return ModelKind::plain_weibull;
    }
    throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

std::string_view to_string(OutOfSampleMode mode) {
    switch (mode) {
        case OutOfSampleMode::regress: return "regress";
        case OutOfSampleMode::regress_scale: return "regress_scale";
        case OutOfSampleMode::population_mean: return "population_mean";
    }
    return "unknown";
}

OutOfSampleMode parse_out_of_sample_mode(std::string_view name) {
    if (name == "regress") return OutOfSampleMode::regress;
    if (name == "regress_scale") return OutOfSampleMode::regress_scale;
    if (name == "population_mean") return OutOfSampleMode::population_mean;
    throw InputError("unknown out-of-sample mode '" + std::string(name) + "'");
}

const UserDynamics* NewerModel::find(std::string_view user) const {
    const auto it = std::lower_bound(users.begin(), users.end(), user,
                                     [](const UserDynamics& u, std::string_view id) { return u.id < id; });
    if (it == users.end() || it->id != user) return nullptr;
    return &*it;
}

void NewerModel::validate() const {
    if (beta.size() != feature_names.size() || gamma.size() != feature_names.size()) {
        throw InputError("model coefficient lengths do not match the feature schema");
    }
    hyper.validate();
    for (const auto& u : users) {
        if (!u.params.valid()) {
            throw InputError("model has invalid parameters for user '" + u.id + "'");
        }
    }
    if (!std::is_sorted(users.begin(), users.end(),
                        [](const UserDynamics& x, const UserDynamics& y) { return x.id < y.id; })) {
        throw InputError("model users must be sorted by id");
    }
    if (!fallback.valid() || !out_of_sample_params.valid()) {
        throw InputError("model fallback parameters are invalid");
    }
}

double user_log_likelihood(const WeibullParams& p, const SubcascadeSample& sample) {
    p.validate();
    const UserData d = prepare(sample);
    return log_likelihood(d, std::log(p.scale), p.shape);
}

double newer_objective(const NewerModel& model, std::span<const SubcascadeSample> samples,
                       const FeatureMatrix& features) {
    if (features.names() != model.feature_names || model.beta.size() != features.cols() ||
        model.gamma.size() != features.cols()) {
        throw InputError("newer_objective: feature schema does not match the model");
    }
    const auto users = prepare_all(samples);
    std::vector<double> log_scale;
    std::vector<double> log_shape;
    for (const auto& d : users) {
        const UserDynamics* u = model.find(d.id);
        if (!u) throw InputError("newer_objective: model has no parameters for user '" + d.id + "'");
        log_scale.push_back(std::log(u->params.scale));
        log_shape.push_back(std::log(u->params.shape));
    }
    const RowMatrix z = features.log_rows(ids_of(users));
    return objective_from_logs(users, log_scale, log_shape, z, model.beta, model.gamma, model.hyper);
}

std::vector<UserGradient> newer_gradient(const NewerModel& model,
                                         std::span<const SubcascadeSample> samples,
                                         const FeatureMatrix& features) {
    const auto users = prepare_all(samples);
    const RowMatrix z = features.log_rows(ids_of(users));
    const auto a = linear_predictor(z, model.beta);
    const auto b = linear_predictor(z, model.gamma);
    const double n = static_cast<double>(users.size());
    std::vector<UserGradient> out;
    out.reserve(users.size());
    for (std::size_t i = 0; i < users.size(); ++i) {
        const UserDynamics* u = model.find(users[i].id);
        if (!u) throw InputError("newer_gradient: no parameters for user '" + users[i].id + "'");
        const double log_scale = std::log(u->params.scale);
        const double log_shape = std::log(u->params.shape);
        const auto ds = scale_block(users[i], log_scale, u->params.shape, model.hyper.mu / n, a[i]);
        const auto dk = shape_block(users[i], log_scale, log_shape, model.hyper.eta / n, b[i]);
        // chain rule from log-parameters back to (lambda, k)
        out.push_back({ds.slope / u->params.scale, dk.slope / u->params.shape});
    }
    return out;
}

FitResult fit_newer(std::span<const SubcascadeSample> samples, const FeatureMatrix& features,
                    const Hyperparams& hyper, const SolverOptions& options,
                    const NewerModel* warm_start) {
    hyper.validate();
    if (samples.empty()) {
        throw InputError("fit_newer: no users to fit");
    }
    if (options.fixed_shape && !(*options.fixed_shape > 0.0)) {
        throw ConfigError("fixed shape must be positive");
    }
    const auto users = prepare_all(samples);
    const std::size_t n = users.size();
    const std::size_t r = features.cols();
    const RowMatrix z = features.log_rows(ids_of(users));
    const double coupling_scale = hyper.mu / static_cast<double>(n);
    const double coupling_shape = hyper.eta / static_cast<double>(n);

    std::vector<double> log_scale(n);
    std::vector<double> log_shape(n);
    std::vector<double> beta(r, 0.0);
    std::vector<double> gamma(r, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& delays = samples[i].delays;
        log_scale[i] = std::log(std::accumulate(delays.begin(), delays.end(), 0.0) / users[i].m);
        log_shape[i] = 0.0;
    }
    if (warm_start) {
        if (warm_start->feature_names != features.names()) {
            throw InputError("warm start model has a different feature schema");
        }
        beta = warm_start->beta;
        gamma = warm_start->gamma;
        for (std::size_t i = 0; i < n; ++i) {
            if (const UserDynamics* u = warm_start->find(users[i].id)) {
                log_scale[i] = std::log(u->params.scale);
                log_shape[i] = std::log(u->params.shape);
            }
        }
    }
    if (options.fixed_shape) {
        std::fill(log_shape.begin(), log_shape.end(), std::log(*options.fixed_shape));
    }
    for (std::size_t i = 0; i < n; ++i) {
        log_scale[i] = std::clamp(log_scale[i], kLogMinScale, kLogMaxScale);
        if (!options.fixed_shape) log_shape[i] = std::clamp(log_shape[i], kLogMinShape, kLogMaxShape);
    }

    FitReport report;
    double current = objective_from_logs(users, log_scale, log_shape, z, beta, gamma, hyper);
    report.objective.push_back(current);

    const auto check_finite = [&](std::size_t i) {
        if (!std::isfinite(log_scale[i]) || !std::isfinite(log_shape[i])) {
            throw NumericalError(users[i].id, "non-finite parameters during descent");
        }
    };

    for (int it = 1; it <= options.max_iterations; ++it) {
        const auto a = linear_predictor(z, beta);
        parallel_for(n, options.threads, [&](std::size_t i) {
            const double shape = std::exp(log_shape[i]);
            const auto res = minimize_1d(
                [&](double u) { return scale_block(users[i], u, shape, coupling_scale, a[i]); },
                log_scale[i], kLogMinScale, kLogMaxScale, options.newton_tolerance * users[i].m);
            log_scale[i] = res.x;
            check_finite(i);
        });

        if (!options.fixed_shape) {
            const auto b = linear_predictor(z, gamma);
            parallel_for(n, options.threads, [&](std::size_t i) {
                const auto res = minimize_1d(
                    [&](double v) {
                        return shape_block(users[i], log_scale[i], v, coupling_shape, b[i]);
                    },
                    log_shape[i], kLogMinShape, kLogMaxShape, options.newton_tolerance * users[i].m);
                log_shape[i] = res.x;
                check_finite(i);
            });
        }

        beta = lasso_coordinate_descent(z, log_scale, hyper.alpha_beta, beta, options.lasso).coef;
        gamma = lasso_coordinate_descent(z, log_shape, hyper.alpha_gamma, gamma, options.lasso).coef;

        const double next = objective_from_logs(users, log_scale, log_shape, z, beta, gamma, hyper);
        if (!std::isfinite(next)) {
            throw NumericalError(users.front().id, "objective became non-finite");
        }
        report.objective.push_back(next);
        report.iterations = it;
        const double decrease = current - next;
        current = next;
        if (decrease <= options.tolerance * std::max(1.0, std::abs(next))) {
            report.converged = true;
            break;
        }
    }

    NewerModel model;
    model.kind = ModelKind::newer;
    model.feature_names = features.names();
    model.hyper = hyper;
    model.beta = std::move(beta);
    model.gamma = std::move(gamma);
    model.users = sorted_dynamics(users, log_scale, log_shape);
    model.out_of_sample = OutOfSampleMode::regress;
    model.out_of_sample_params = mean_params(model.users);
    model.fallback = median_params(model.users);
    return {std::move(model), std::move(report)};
}

WeibullParams regress_out_of_sample(const NewerModel& model, std::span<const double> x) {
    if (model.out_of_sample == OutOfSampleMode::population_mean) {
        return model.out_of_sample_params;
    }
    if (x.size() != model.beta.size()) {
        throw InputError("feature row length does not match the model schema");
    }
    double log_scale = 0.0;
    double log_shape = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!(x[j] > 0.0) || !std::isfinite(x[j])) {
            throw DomainError("regress_out_of_sample: features must be positive and finite");
        }
        const double lx = std::log(x[j]);
        log_scale += lx * model.beta[j];
        log_shape += lx * model.gamma[j];
    }
    WeibullParams p{std::exp(std::clamp(log_scale, kLogMinScale, kLogMaxScale)),
                    std::exp(std::clamp(log_shape, kLogMinShape, kLogMaxShape))};
    if (model.out_of_sample == OutOfSampleMode::regress_scale) {
        p.shape = model.out_of_sample_params.shape;
    }
    return p;
}

FitResult fit_baseline(ModelKind kind, std::span<const SubcascadeSample> samples,
                       const FeatureMatrix& features, const Hyperparams& hyper,
                       const SolverOptions& options) {
    hyper.validate();
    if (kind == ModelKind::newer) {
        return fit_newer(samples, features, hyper, options);
    }
    if (kind == ModelKind::plain_weibull) {
        Hyperparams flat = hyper;
        flat.mu = 0.0;
        flat.eta = 0.0;
        auto result = fit_newer(samples, features, flat, options);
        result.model.kind = ModelKind::plain_weibull;
        result.model.out_of_sample = OutOfSampleMode::population_mean;
        return result;
    }
    if (samples.empty()) {
        throw InputError("fit_baseline: no users to fit");
    }

    const auto users = prepare_all(samples);
    const std::size_t n = users.size();
    double shape = 1.0;
    FitReport report;
    if (kind == ModelKind::rayleigh) {
        shape = 2.0;
    } else if (kind == ModelKind::cox_shared_shape) {
        const auto res = minimize_1d([&](double v) { return shared_shape_profile(users, v); }, 0.0,
                                     kLogMinShape, kLogMaxShape,
                                     options.newton_tolerance * static_cast<double>(n));
        shape = std::exp(res.x);
        report.iterations = res.iterations;
    }
    std::vector<double> log_scale(n);
    std::vector<double> log_shape(n, std::log(shape));
    parallel_for(n, options.threads,
                 [&](std::size_t i) { log_scale[i] = closed_form_log_scale(users[i], shape); });

    const RowMatrix z = features.log_rows(ids_of(users));
    NewerModel model;
    model.kind = kind;
    model.feature_names = features.names();
    model.hyper = hyper;
    model.hyper.mu = 0.0;
    model.hyper.eta = 0.0;
    model.beta = lasso_coordinate_descent(z, log_scale, hyper.alpha_beta, {}, options.lasso).coef;
    model.gamma.assign(features.cols(), 0.0);
    model.users = sorted_dynamics(users, log_scale, log_shape);
    model.out_of_sample = OutOfSampleMode::regress_scale;
    model.out_of_sample_params = {mean_params(model.users).scale, shape};
    model.fallback = median_params(model.users);

    double g1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) g1 -= log_likelihood(users[i], log_scale[i], shape);
    report.objective = {g1};
    report.converged = true;
    report.iterations = std::max(report.iterations, 1);
    return {std::move(model), std::move(report)};
}

FitResult fit_model(ModelKind kind, std::span<const SubcascadeSample> samples,
                    const FeatureMatrix& features, const Hyperparams& hyper,
                    const SolverOptions& options, const NewerModel* warm_start) {
    if (kind == ModelKind::newer) {
        return fit_newer(samples, features, hyper, options, warm_start);
    }
    return fit_baseline(kind, samples, features, hyper, options);
}

std::vector<SubcascadeSample> select_training_samples(std::span<const SubcascadeSample> samples,
                                                      std::size_t min_events) {
    std::vector<SubcascadeSample> out;
    for (const auto& s : samples) {
        if (s.size() >= std::max<std::size_t>(min_events, 1) && s.well_posed()) {
            out.push_back(s);
        }
    }
    return out;
}

}  // namespace newer
