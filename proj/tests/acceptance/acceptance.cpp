// One PASS/FAIL line per acceptance criterion. Tolerances and runtime
// budgets are pinned below. Usage: newer_acceptance [criterion...]

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "newer/eval.hpp"
#include "newer/features.hpp"
#include "newer/fit.hpp"
#include "newer/io.hpp"
#include "newer/predict.hpp"
#include "newer/random.hpp"
#include "newer/sampling.hpp"
#include "newer/simulate.hpp"
#include "newer/survival.hpp"
#include "support.hpp"

namespace {

using namespace newer;
using newer::test::log_uniform;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

FeatureMatrix bias_only(const std::vector<std::string>& users) {
    RowMatrix x(users.size(), 1, std::numbers::e);
    return FeatureMatrix({"bias"}, users, std::move(x));
}

// 1. Distribution identities.
Outcome distribution_identities() {
    constexpr int kDraws = 10000;
    constexpr double kHazardTol = 1e-12;
    constexpr double kInverseTol = 1e-8;
    constexpr double kIntegralTol = 1e-8;
    Rng rng(101);
    double worst_hazard = 0, worst_inverse = 0, worst_integral = 0;
    for (int i = 0; i < kDraws; ++i) {
        const WeibullParams p{log_uniform(rng, 0.1, 1e4), log_uniform(rng, 0.2, 8.0)};
        const double s = 1e-6 + (1.0 - 2e-6) * rng.uniform();
        const double t = weibull_survival_inverse(p, s);
        worst_hazard = std::max(worst_hazard, rel(weibull_hazard(p, t) * weibull_survival(p, t), weibull_pdf(p, t)));
        worst_inverse = std::max(worst_inverse, rel(weibull_survival_inverse(p, weibull_survival(p, t)), t));
        // Integrate f over log time: the integrand t f(t) decays doubly
        // exponentially at both ends and has no endpoint singularity.
        const double lo = std::log(p.scale) - 40.0 / p.shape;
        const double hi = std::log(p.scale) + 4.0 / p.shape;
        const double area = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double u) {
                const double z = std::exp(p.shape * (u - std::log(p.scale)));
                return p.shape * z * std::exp(-z);
            },
            lo, hi, 15, 1e-12);
        worst_integral = std::max(worst_integral, std::abs(area - 1.0));
    }
    const bool pass = worst_hazard <= kHazardTol && worst_inverse <= kInverseTol && worst_integral <= kIntegralTol;
    return {pass, fmt("max rel |hS-f| %.2e, max rel |S^-1(S(t))-t| %.2e, max |int f - 1| %.2e over %d draws",
                      worst_hazard, worst_inverse, worst_integral, kDraws)};
}

// 2. MLE recovery and closed forms.
Outcome mle_recovery() {
    constexpr int kDraws = 10000;
    constexpr double kRecoveryTol = 0.05;
    constexpr double kClosedFormTol = 1e-9;
    double worst = 0, worst_closed = 0;
    std::uint64_t stream = 0;
    for (double scale : {0.5, 2.0, 8.0}) {
        for (double shape : {0.7, 1.0, 1.5, 3.0}) {
            Rng rng(mix_seed(202, stream++));
            SubcascadeSample s{"u", {}};
            for (int i = 0; i < kDraws; ++i) s.delays.push_back(weibull_survival_inverse({scale, shape}, rng.uniform()));
            std::sort(s.delays.begin(), s.delays.end());
            const std::vector<SubcascadeSample> samples{s};
            const FeatureMatrix x = bias_only({"u"});
            const auto wbl = fit_baseline(ModelKind::plain_weibull, samples, x, {});
            const auto& fitted = wbl.model.users[0].params;
            worst = std::max({worst, rel(fitted.scale, scale), rel(fitted.shape, shape)});

            double mean = 0, mean_sq = 0;
            for (double d : s.delays) {
                mean += d;
                mean_sq += d * d;
            }
            mean /= kDraws;
            mean_sq /= kDraws;
            // dl/dlambda = 0 gives lambda = mean(T) for k = 1 and
            // lambda = sqrt(mean(T^2)) for k = 2.
            const auto ex = fit_baseline(ModelKind::exponential, samples, x, {}).model.users[0].params;
            const auto ray = fit_baseline(ModelKind::rayleigh, samples, x, {}).model.users[0].params;
            worst_closed = std::max({worst_closed, rel(ex.scale, mean), rel(ray.scale, std::sqrt(mean_sq)),
                                     std::abs(ex.shape - 1.0), std::abs(ray.shape - 2.0)});
        }
    }
    return {worst <= kRecoveryTol && worst_closed <= kClosedFormTol,
            fmt("max rel param error %.4f (tol %.2f), closed-form max rel error %.2e", worst, kRecoveryTol,
                worst_closed)};
}

struct Instance {
    std::vector<SubcascadeSample> samples;
    FeatureMatrix features;
    std::vector<WeibullParams> truth;
};

// Users with log-normal covariates, params from (beta, gamma) and a
// per-user event count in [min_events, max_events].
Instance synthetic_instance(std::size_t users, std::size_t covariates, const std::vector<double>& beta,
                            const std::vector<double>& gamma, std::size_t min_events, std::size_t max_events,
                            std::uint64_t seed) {
    Rng rng(seed);
    Instance inst;
    std::vector<std::string> names = {"bias"}, ids;
    for (std::size_t j = 0; j < covariates; ++j) names.push_back("x" + std::to_string(j + 1));
    RowMatrix x(users, covariates + 1);
    for (std::size_t i = 0; i < users; ++i) {
        ids.push_back(node_id(i, users));
        x(i, 0) = std::numbers::e;
        for (std::size_t j = 1; j <= covariates; ++j) x(i, j) = std::exp(0.5 * rng.normal());
        double ls = 0, lk = 0;
        for (std::size_t j = 0; j <= covariates; ++j) {
            ls += std::log(x(i, j)) * beta[j];
            lk += std::log(x(i, j)) * gamma[j];
        }
        const WeibullParams p{std::exp(ls), std::exp(lk)};
        inst.truth.push_back(p);
        const std::size_t m = min_events + rng.below(max_events - min_events + 1);
        SubcascadeSample s{ids.back(), {}};
        for (std::size_t e = 0; e < m; ++e) s.delays.push_back(weibull_survival_inverse(p, rng.uniform()));
        std::sort(s.delays.begin(), s.delays.end());
        inst.samples.push_back(std::move(s));
    }
    inst.features = FeatureMatrix(names, ids, std::move(x));
    return inst;
}

// 3. Descent and stationarity at the default hyperparameters.
Outcome newer_descent() {
    constexpr double kMonotoneTol = 1e-9;
    constexpr double kGradientTol = 1e-3;
    // Central differences of an objective of size |F| carry round-off of
    // about eps |F| / h; mismatches below this multiple of it are noise.
    constexpr double kRoundoffMultiple = 16.0;
    // Stationarity: largest |dF/d log theta_i| per event of user i.
    constexpr double kStationaryTol = 1e-3;
    const Instance inst = synthetic_instance(200, 3, {6.0, 0.8, 0.0, -0.5}, {0.0, 0.4, 0.0, 0.0}, 20, 80, 303);
    const FitResult fit = fit_newer(inst.samples, inst.features, Hyperparams{});
    const auto& trace = fit.report.objective;
    double worst_rise = 0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        worst_rise = std::max(worst_rise, (trace[i] - trace[i - 1]) / std::abs(trace[i - 1]));
    }

    // Central differences in log-parameter space, at the fitted point and
    // at a perturbed point where gradients are far from zero.
    double worst_mismatch = 0, worst_stationary = 0;
    std::size_t compared = 0;
    const double h = 1e-4;
    for (int perturbed = 0; perturbed < 2; ++perturbed) {
        NewerModel m = fit.model;
        if (perturbed) {
            for (auto& u : m.users) {
                u.params.scale *= 1.3;
                u.params.shape *= 0.8;
            }
        }
        const double f = newer_objective(m, inst.samples, inst.features);
        const double noise = kRoundoffMultiple * std::numeric_limits<double>::epsilon() * std::abs(f) / h;
        const auto grad = newer_gradient(m, inst.samples, inst.features);
        for (std::size_t i = 0; i < m.users.size(); ++i) {
            for (int which = 0; which < 2; ++which) {
                NewerModel up = m, down = m;
                double& pu = which ? up.users[i].params.shape : up.users[i].params.scale;
                double& pd = which ? down.users[i].params.shape : down.users[i].params.scale;
                const double base = pu;
                pu = base * std::exp(h);
                pd = base * std::exp(-h);
                const double fd = (newer_objective(up, inst.samples, inst.features) -
                                   newer_objective(down, inst.samples, inst.features)) / (2 * h);
                const double analytic = base * (which ? grad[i].d_shape : grad[i].d_scale);
                const double allowed = kGradientTol * std::max(std::abs(analytic), std::abs(fd)) + noise;
                worst_mismatch = std::max(worst_mismatch, std::abs(analytic - fd) / allowed);
                ++compared;
                if (!perturbed) {
                    const double m_i = static_cast<double>(inst.samples[i].size());
                    worst_stationary = std::max(worst_stationary, std::abs(analytic) / m_i);
                }
            }
        }
    }
    const bool pass = fit.report.converged && worst_rise <= kMonotoneTol && worst_mismatch <= 1.0 &&
                      worst_stationary <= kStationaryTol;
    return {pass, fmt("%d iterations, max relative rise %.2e, %zu gradient pairs with max mismatch %.3f of "
                      "allowance (1e-3 relative + round-off), max per-event |log-gradient| at optimum %.2e",
                      fit.report.iterations, std::max(0.0, worst_rise), compared, worst_mismatch, worst_stationary)};
}

// 4. Sparse covariate recovery and out-of-sample regression.
Outcome covariate_recovery() {
    constexpr double kAlpha = 0.01;
    constexpr double kHiddenFraction = 0.1;
    constexpr double kMedianTol = 0.15;
    const std::vector<double> beta = {7.0, 1.0, 0.0, -0.8, 0.0, 0.0};
    const std::vector<double> gamma = {0.1, 0.0, 0.6, 0.0, 0.0, -0.5};
    const Instance inst = synthetic_instance(500, 5, beta, gamma, 200, 400, 404);
    Rng rng(405);
    std::vector<std::size_t> order(inst.samples.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const auto hidden_count = static_cast<std::size_t>(kHiddenFraction * static_cast<double>(order.size()));
    std::set<std::size_t> hidden(order.begin(), order.begin() + static_cast<long>(hidden_count));
    std::vector<SubcascadeSample> train;
    for (std::size_t i = 0; i < inst.samples.size(); ++i) {
        if (!hidden.contains(i)) train.push_back(inst.samples[i]);
    }
    Hyperparams hyper;
    hyper.alpha_beta = kAlpha;
    hyper.alpha_gamma = kAlpha;
    const FitResult fit = fit_newer(train, inst.features, hyper);

    auto support_ok = [](const std::vector<double>& truth, const std::vector<double>& got) {
        for (std::size_t j = 0; j < truth.size(); ++j) {
            if (truth[j] == 0.0 ? got[j] != 0.0 : (got[j] * truth[j] <= 0.0)) return false;
        }
        return true;
    };
    const bool support = support_ok(beta, fit.model.beta) && support_ok(gamma, fit.model.gamma);
    std::vector<double> scale_err, shape_err;
    for (std::size_t i : hidden) {
        const auto p = regress_out_of_sample(fit.model, inst.features.row(i));
        scale_err.push_back(rel(p.scale, inst.truth[i].scale));
        shape_err.push_back(rel(p.shape, inst.truth[i].shape));
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    };
    const double ms = median(scale_err), mk = median(shape_err);
    std::string coef = "beta=[";
    for (double b : fit.model.beta) coef += fmt("%.3f ", b);
    coef += "] gamma=[";
    for (double g : fit.model.gamma) coef += fmt("%.3f ", g);
    coef += "]";
    return {support && ms <= kMedianTol && mk <= kMedianTol,
            fmt("support/sign %s, %zu hidden users, median rel error lambda %.4f k %.4f (alpha %.2g); ",
                support ? "correct" : "WRONG", hidden.size(), ms, mk, kAlpha) + coef};
}

// 5. Boundary exactness and the worked example.
Outcome algorithm_exactness() {
    constexpr int kCascades = 1000;
    constexpr double kExampleTol = 1e-12;
    Rng rng(505);
    int mismatches = 0;
    for (int i = 0; i < kCascades; ++i) {
        const std::size_t n = 1 + rng.below(200);
        const Cascade c = test::random_cascade(rng, n, log_uniform(rng, 0.1, 1000.0), "c" + std::to_string(i));
        DynamicsTable table;
        test::add_random_dynamics(rng, c, table, 1.0, 1e5);
        const double t_limit = c.events.back().time + (i % 2 ? 0.0 : 100.0 * rng.uniform());
        const PartialCascade pc{c, t_limit, 1 + rng.below(100000)};
        if (predict_size_basic(pc, table, t_limit) != static_cast<double>(n)) ++mismatches;
    }
    // Root with two children and death rate 0.4, one child with one child of
    // its own and death rate 1/3, final size.
    const double elapsed = 99.0;
    auto exponential_with_cdf = [&](double d) {
        return WeibullParams{(elapsed + kDelayShift) / -std::log1p(-d), 1.0};
    };
    Cascade c{"worked", {{"r", std::nullopt, 0.0}, {"a", "r", 0.0}, {"b", "r", 0.0}, {"g", "a", 0.0}}};
    DynamicsTable table;
    table.set("r", exponential_with_cdf(0.4));
    table.set("a", exponential_with_cdf(1.0 / 3.0));
    table.set("b", {1.0, 1.0});
    table.set("g", {1.0, 1.0});
    const double example = predict_final_size({c, elapsed, 1000}, table);
    const bool pass = mismatches == 0 && std::abs(example - 9.0) <= kExampleTol;
    return {pass, fmt("%d/%d boundary mismatches, worked example %.15f", mismatches, kCascades, example)};
}

// Replays the basic predictor on the events seen so far at `now`.
double basic_replay(const Cascade& c, std::size_t seen, double now, double horizon, std::size_t n,
                    const DynamicsTable& table) {
    const PartialCascade pc{c.first_events(seen), now, n};
    return predict_size_basic(pc, table, horizon);
}

// 6. Sampling error bound and recalculation budget.
Outcome sampling_bound() {
    constexpr int kStreams = 1000;
    Rng rng(606);
    std::size_t violations = 0, budget_violations = 0, queries = 0;
    double worst_ratio = 0;
    for (double eps : {0.01, 0.1, 0.5}) {
        for (int s = 0; s < kStreams; ++s) {
            const std::size_t events = 2 + rng.below(60);
            const Cascade c = test::random_cascade(rng, events, log_uniform(rng, 1.0, 2000.0), "s" + std::to_string(s));
            DynamicsTable table;
            test::add_random_dynamics(rng, c, table, 10.0, 1e5, 0.3, 4.0);
            const std::size_t n = 10 + rng.below(100000);
            const bool finite = s % 3 == 0;
            const double last = c.events.back().time;
            const double horizon = finite ? last + log_uniform(rng, 1.0, 1e6)
                                          : std::numeric_limits<double>::infinity();
            SamplingPredictor sp({eps, n, horizon}, table);
            auto check = [&](std::size_t seen, double now) {
                if (now > horizon) return;
                const double got = sp.query_size(now);
                const double want = basic_replay(c, seen, now, horizon, n, table);
                ++queries;
                const double r = std::abs(got - want) / want;
                worst_ratio = std::max(worst_ratio, r / eps);
                if (r > eps) ++violations;
            };
            for (std::size_t i = 0; i < events; ++i) {
                sp.feed_event(c.events[i]);
                check(i + 1, c.events[i].time);
                const double next = i + 1 < events ? c.events[i + 1].time : last + 1e6;
                for (int q = 0; q < 3; ++q) {
                    check(i + 1, sp.clock() + (next - sp.clock()) * rng.uniform());
                }
            }
            for (double later : {1e3, 1e5, 1e7, 1e9}) check(events, sp.clock() + later);
            const auto budget = SamplingPredictor::recalculation_budget(eps, n) + 1;
            if (sp.max_threshold_recalculations() > budget) ++budget_violations;
        }
    }
    return {violations == 0 && budget_violations == 0,
            fmt("%zu queries over %d streams x 3 epsilons: %zu bound violations (worst error/eps %.4f), "
                "%zu budget violations",
                queries, kStreams, violations, worst_ratio, budget_violations)};
}

// 7. Recalculation savings on a long stream.
Outcome sampling_efficiency() {
    constexpr std::size_t kEvents = 10000;
    constexpr double kEpsilon = 0.1;
    constexpr double kMinReduction = 10.0;
    constexpr std::size_t kNetwork = 100000;
    Rng rng(707);
    const Cascade c = test::random_cascade(rng, kEvents, 1.0, "long", 0.8);
    DynamicsTable table;
    test::add_random_dynamics(rng, c, table, 100.0, 1e4, 0.5, 2.0);
    SamplingPredictor sp({kEpsilon, kNetwork}, table);
    const double first = c.events.front().time;
    const double last = c.events.back().time;
    std::size_t next = 0;
    double replay_ops = 0;
    // The basic replay recomputes every observed subcascade once per second.
    for (double now = first; now <= std::ceil(last); now += 1.0) {
        while (next < kEvents && c.events[next].time <= now) sp.feed_event(c.events[next++]);
        sp.query_size(now);
        replay_ops += static_cast<double>(next);
    }
    const double sampling_ops = static_cast<double>(sp.recalculations());
    const double reduction = replay_ops / sampling_ops;
    return {reduction >= kMinReduction,
            fmt("%zu events over %.0f s: basic replay %.3g ops, sampling %.0f ops (%zu reply, %zu threshold), "
                "reduction %.1fx",
                kEvents, last - first, replay_ops, sampling_ops, sp.reply_recalculations(),
                sp.threshold_recalculations(), reduction)};
}

// Simulator config used by criteria 8 and 9: few high-audience roots with
// long histories and shallow cascades.
SimConfig ranking_config() {
    SimConfig cfg;
    cfg.nodes = 10000;
    cfg.degree = {2.5, 2, 0};
    cfg.cascades = 1500;
    cfg.covariates = 3;
    cfg.covariate_sigma = 0.8;
    cfg.beta_star = {7.0, 0.0, 1.0, 0.0};
    cfg.gamma_star = {0.0, 1.0, 0.0, 0.0};
    cfg.retweet_scale = 5.0;
    cfg.depth_decay = 0.02;
    cfg.virality_sigma = 1.0;
    cfg.min_root_followers = 100;
    cfg.horizon = 60.0 * 86400.0;
    cfg.seed = 909;
    return cfg;
}

// 8. Outbreak binary search vs exhaustive scan.
Outcome outbreak_consistency() {
    constexpr double kThreshold = 1000.0;
    constexpr std::size_t kCascades = 100;
    constexpr std::size_t kObserved = 5;
    constexpr double kWindow = 2.0 * 86400.0;
    // Large-audience roots so that a share of predictions crosses 1000.
    SimConfig cfg = ranking_config();
    cfg.nodes = 50000;
    cfg.degree = {2.1, 2, 0};
    cfg.cascades = kCascades;
    cfg.min_root_followers = 500;
    cfg.fixed_retweet_probability = 0.5;
    cfg.depth_decay = 0.01;
    cfg.seed = 808;
    const SimOutput sim = simulate(cfg);
    DynamicsTable table;
    for (std::size_t i = 0; i < sim.network.size(); ++i) table.set(sim.network.id(i), sim.truth.params[i]);
    OutbreakOptions options;
    options.max_horizon = kWindow;
    std::size_t checked = 0, mismatches = 0, reached = 0;
    for (const Cascade& c : sim.cascades) {
        if (checked == kCascades) break;
        if (c.size() <= kObserved) continue;
        ++checked;
        const PartialCascade pc = observe_first(c, kObserved, sim.network.size());
        const auto fast = predict_outbreak_time(pc, table, kThreshold, options);
        const BasicPredictor basic(pc, table);
        std::optional<double> scan;
        for (double j = 0; j <= kWindow; j += 1.0) {
            if (basic.size_at(pc.t_limit + j) >= kThreshold) {
                scan = pc.t_limit + j;
                break;
            }
        }
        if (fast != scan) ++mismatches;
        if (scan) ++reached;
    }
    return {checked == kCascades && mismatches == 0,
            fmt("%zu cascades, threshold %.0f: %zu mismatches, %zu reach the threshold within %.0f s", checked,
                kThreshold, mismatches, reached, kWindow)};
}

// 9. Model ranking and per-user goodness of fit.
Outcome model_ranking() {
    constexpr double kShapeMargin = 0.25;  // |ln k*| and |ln k* - ln 2| must exceed this
    constexpr std::size_t kMinEvents = 100;
    const SimConfig cfg = ranking_config();
    const SimOutput sim = simulate(cfg);
    ExperimentConfig exp;
    exp.protocol = Protocol::size;
    exp.prefixes = {5, 10, 25};
    exp.folds = 10;
    exp.seed = 910;
    const ExperimentReport report = run_experiment(exp, sim.network, sim.cascades, sim.truth.features);

    bool ranked = true;
    std::string detail;
    for (double s : {5.0, 10.0, 25.0}) {
        const MetricRow* newer_row = report.find("newer", s);
        if (!newer_row) return {false, fmt("no NEWER row at prefix %.0f", s)};
        detail += fmt("s=%.0f n=%zu newer %.3f", s, newer_row->count, newer_row->rmsle);
        for (const char* other : {"exponential", "rayleigh", "cox_shared_shape", "loglinear"}) {
            const MetricRow* row = report.find(other, s);
            if (!row) return {false, fmt("no %s row at prefix %.0f", other, s)};
            detail += fmt(" %s %.3f", other, row->rmsle);
            if (newer_row->rmsle > row->rmsle) ranked = false;
        }
        detail += "; ";
    }

    const auto samples = select_training_samples(extract_subcascades(filter_cascades(sim.cascades)), 2);
    const auto wbl = fit_newer(samples, sim.truth.features, {});
    const auto ex = fit_baseline(ModelKind::exponential, samples, sim.truth.features, {});
    const auto ray = fit_baseline(ModelKind::rayleigh, samples, sim.truth.features, {});
    std::size_t users = 0, ks_failures = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto idx = sim.network.index_of(samples[i].user);
        const double k_star = sim.truth.params[*idx].shape;
        if (samples[i].size() < kMinEvents || std::abs(std::log(k_star)) < kShapeMargin ||
            std::abs(std::log(k_star / 2.0)) < kShapeMargin) {
            continue;
        }
        ++users;
        const EmpiricalSurvival emp(samples[i].delays);
        const double kw = ks_statistic(wbl.model.find(samples[i].user)->params, emp);
        const double ke = ks_statistic(ex.model.find(samples[i].user)->params, emp);
        const double kr = ks_statistic(ray.model.find(samples[i].user)->params, emp);
        if (!(kw < ke && kw < kr)) ++ks_failures;
    }
    detail += fmt("KS: %zu/%zu users with k* away from 1 and 2 favour Weibull", users - ks_failures, users);
    return {ranked && users > 0 && ks_failures == 0, detail};
}

// 10. Pipeline determinism across runs and thread counts.
Outcome pipeline_determinism() {
    auto run_pipeline = [](const std::filesystem::path& dir, const std::string& threads) {
        std::ostringstream out, err;
        auto run = [&](std::vector<std::string> args) {
            args.insert(args.begin(), {"newer", "--threads", threads});
            const int code = cli::run(args, out, err);
            if (code != 0) throw std::runtime_error("pipeline step failed: " + err.str());
        };
        const std::string d = dir.string();
        run({"simulate", "--out", d + "/sim", "--nodes", "3000", "--cascades", "600", "--seed", "1010"});
        run({"fit", "--cascades", d + "/sim/cascades.jsonl", "--features", d + "/sim/features.csv", "--out",
             d + "/model.json"});
        run({"predict", "--model", d + "/model.json", "--cascades", d + "/sim/cascades.jsonl", "--features",
             d + "/sim/features.csv", "--network", d + "/sim/network.csv", "--observe-first", "3", "--task",
             "process", "--out", d + "/pred.jsonl"});
        run({"evaluate", "--predictions", d + "/pred.jsonl", "--cascades", d + "/sim/cascades.jsonl", "--out",
             d + "/eval", "--dominance"});
        run({"experiment", "--network", d + "/sim/network.csv", "--cascades", d + "/sim/cascades.jsonl",
             "--features", d + "/sim/features.csv", "--models", "newer", "exponential", "loglinear", "--prefixes",
             "2", "4", "--folds", "5", "--min-cascade-size", "3", "--seed", "1011", "--out", d + "/exp"});
    };
    const std::vector<std::string> files = {"sim/network.csv", "sim/cascades.jsonl", "sim/truth.json",
                                            "model.json",      "model.report.json",  "pred.jsonl",
                                            "eval/metrics.csv", "eval/summary.json", "eval/dominance.json",
                                            "exp/report.csv",  "exp/report.json"};
    const auto a = test::scratch_dir("accept_a"), b = test::scratch_dir("accept_b"), c = test::scratch_dir("accept_c");
    run_pipeline(a, "1");
    run_pipeline(b, "1");
    run_pipeline(c, "4");
    std::size_t differing = 0;
    for (const auto& f : files) {
        const std::string base = read_text(a / f);
        if (base != read_text(b / f) || base != read_text(c / f)) ++differing;
    }
    return {differing == 0, fmt("%zu/%zu output files differ across two runs and threads {1, 4}", differing,
                                files.size())};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "distribution identities", 5, distribution_identities},
        {2, "MLE recovery", 30, mle_recovery},
        {3, "NEWER descent and stationarity", 120, newer_descent},
        {4, "NEWER covariate recovery", 300, covariate_recovery},
        {5, "basic predictor exactness", 5, algorithm_exactness},
        {6, "sampling error bound", 120, sampling_bound},
        {7, "sampling efficiency", 60, sampling_efficiency},
        {8, "outbreak consistency", 60, outbreak_consistency},
        {9, "model ranking", 600, model_ranking},
        {10, "end-to-end determinism", 600, pipeline_determinism},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.contains(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = o.pass && secs <= c.budget_seconds;
        if (!pass) ++failures;
        std::printf("%s criterion %d (%s): %s [%.2f s, budget %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_seconds);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
