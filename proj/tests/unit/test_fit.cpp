#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "newer/error.hpp"
#include "newer/fit.hpp"
#include "newer/random.hpp"

using namespace newer;

namespace {

struct Instance {
    std::vector<SubcascadeSample> samples;
    FeatureMatrix features;
};

// Users with Weibull delays whose log-parameters depend on one log-normal covariate.
Instance make_instance(std::uint64_t seed, std::size_t users, std::size_t events) {
    Rng rng(seed);
    Instance inst;
    std::vector<std::string> ids;
    RowMatrix x(users, 2);
    for (std::size_t i = 0; i < users; ++i) {
        SubcascadeSample s;
        s.user = "u" + std::to_string(1000 + i);
        x(i, 0) = std::numbers::e;
        x(i, 1) = std::exp(0.5 * rng.normal());
        const WeibullParams p{std::exp(5.0 + 0.8 * std::log(x(i, 1))), std::exp(0.3 * std::log(x(i, 1)))};
        for (std::size_t j = 0; j < events; ++j) {
            s.delays.push_back(1.0 + weibull_survival_inverse(p, rng.uniform()));
        }
        std::sort(s.delays.begin(), s.delays.end());
        ids.push_back(s.user);
        inst.samples.push_back(std::move(s));
    }
    inst.features = FeatureMatrix({"bias", "x1"}, ids, x);
    return inst;
}

double direct_log_likelihood(const WeibullParams& p, const SubcascadeSample& s) {
    double acc = 0.0;
    for (double t : s.delays) acc += std::log(weibull_pdf(p, t));
    return acc;
}

}  // namespace

TEST_CASE("log likelihood equals the sum of log densities") {
    const auto inst = make_instance(31, 3, 40);
    for (const auto& s : inst.samples) {
        for (const WeibullParams p : {WeibullParams{100.0, 0.6}, WeibullParams{3000.0, 1.7}}) {
            CHECK(user_log_likelihood(p, s) == doctest::Approx(direct_log_likelihood(p, s)).epsilon(1e-12));
        }
    }
}

TEST_CASE("exponential and rayleigh baselines have closed forms") {
    const auto inst = make_instance(32, 20, 30);
    const auto expo = fit_baseline(ModelKind::exponential, inst.samples, inst.features, {});
    const auto ray = fit_baseline(ModelKind::rayleigh, inst.samples, inst.features, {});
    for (const auto& s : inst.samples) {
        double mean = 0.0;
        double mean_sq = 0.0;
        for (double t : s.delays) {
            mean += t / static_cast<double>(s.size());
            mean_sq += t * t / static_cast<double>(s.size());
        }
        const auto* e = expo.model.find(s.user);
        const auto* r = ray.model.find(s.user);
        REQUIRE(e);
        REQUIRE(r);
        CHECK(e->params.shape == 1.0);
        CHECK(e->params.scale == doctest::Approx(mean).epsilon(1e-12));
        CHECK(r->params.shape == 2.0);
        CHECK(r->params.scale == doctest::Approx(std::sqrt(mean_sq)).epsilon(1e-12));
    }
}

TEST_CASE("plain weibull fit solves the likelihood equations") {
    const auto inst = make_instance(33, 15, 200);
    SolverOptions opts;
    opts.tolerance = 1e-13;
    const auto fit = fit_baseline(ModelKind::plain_weibull, inst.samples, inst.features, {}, opts);
    for (const auto& s : inst.samples) {
        const auto* u = fit.model.find(s.user);
        REQUIRE(u);
        const double k = u->params.shape;
        // Profile equation in k and the closed-form scale given k.
        double sum_pow = 0.0, sum_pow_log = 0.0, sum_log = 0.0;
        for (double t : s.delays) {
            sum_pow += std::pow(t, k);
            sum_pow_log += std::pow(t, k) * std::log(t);
            sum_log += std::log(t);
        }
        const double m = static_cast<double>(s.size());
        CHECK(std::abs(1.0 / k + sum_log / m - sum_pow_log / sum_pow) < 1e-7);
        // The last block updates k after the scale, so the scale trails by O(dk ln T).
        CHECK(u->params.scale == doctest::Approx(std::pow(sum_pow / m, 1.0 / k)).epsilon(1e-6));
    }
}

TEST_CASE("cox baseline shares one profile-optimal shape") {
    const auto inst = make_instance(34, 30, 50);
    const auto fit = fit_baseline(ModelKind::cox_shared_shape, inst.samples, inst.features, {});
    const double k = fit.model.users.front().params.shape;
    for (const auto& u : fit.model.users) CHECK(u.params.shape == k);
    // Profile log-likelihood derivative: n_total / k + sum ln T - sum_i m_i sum_j T^k ln T / sum_j T^k.
    double d = 0.0;
    for (const auto& s : inst.samples) {
        double sp = 0.0, spl = 0.0;
        for (double t : s.delays) {
            sp += std::pow(t, k);
            spl += std::pow(t, k) * std::log(t);
            d += 1.0 / k + std::log(t);
        }
        d -= static_cast<double>(s.size()) * spl / sp;
    }
    CHECK(std::abs(d) / 1500.0 < 1e-7);
}

TEST_CASE("newer gradient matches finite differences") {
    const auto inst = make_instance(35, 10, 25);
    auto fit = fit_newer(inst.samples, inst.features, {});
    NewerModel model = fit.model;
    for (auto& u : model.users) {
        u.params.scale *= 1.4;
        u.params.shape *= 0.7;
    }
    const auto grad = newer_gradient(model, inst.samples, inst.features);
    for (std::size_t i = 0; i < inst.samples.size(); ++i) {
        auto& u = model.users[i];
        REQUIRE(u.id == inst.samples[i].user);
        for (int which = 0; which < 2; ++which) {
            double& theta = which == 0 ? u.params.scale : u.params.shape;
            const double saved = theta;
            const double h = 1e-5 * saved;
            theta = saved + h;
            const double up = newer_objective(model, inst.samples, inst.features);
            theta = saved - h;
            const double down = newer_objective(model, inst.samples, inst.features);
            theta = saved;
            const double fd = (up - down) / (2.0 * h);
            const double g = which == 0 ? grad[i].d_scale : grad[i].d_shape;
            CHECK(g == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("objective trace never increases") {
    const auto inst = make_instance(36, 60, 20);
    const auto fit = fit_newer(inst.samples, inst.features, {});
    CHECK(fit.report.converged);
    const auto& f = fit.report.objective;
    REQUIRE(f.size() >= 2);
    for (std::size_t i = 1; i < f.size(); ++i) {
        CHECK(f[i] <= f[i - 1] + 1e-9 * std::abs(f[i - 1]));
    }
    CHECK(newer_objective(fit.model, inst.samples, inst.features) == doctest::Approx(f.back()).epsilon(1e-12));
}

TEST_CASE("warm start is no worse than a cold start") {
    const auto inst = make_instance(37, 60, 20);
    SolverOptions loose;
    loose.max_iterations = 3;
    const auto partial = fit_newer(inst.samples, inst.features, {}, loose);
    const auto cold = fit_newer(inst.samples, inst.features, {}, loose);
    const auto warm = fit_newer(inst.samples, inst.features, {}, loose, &partial.model);
    CHECK(warm.report.objective.back() <= cold.report.objective.back());
    CHECK(warm.report.objective.front() == doctest::Approx(partial.report.objective.back()).epsilon(1e-12));
}

TEST_CASE("fixed shape pins every user") {
    const auto inst = make_instance(38, 10, 20);
    SolverOptions opts;
    opts.fixed_shape = 1.0;
    const auto fit = fit_newer(inst.samples, inst.features, {}, opts);
    for (const auto& u : fit.model.users) CHECK(u.params.shape == 1.0);
    opts.fixed_shape = 0.0;
    CHECK_THROWS_AS(fit_newer(inst.samples, inst.features, {}, opts), ConfigError);
}

TEST_CASE("out-of-sample regression") {
    NewerModel m;
    m.feature_names = {"bias", "x1"};
    m.beta = {5.0, 0.5};
    m.gamma = {0.2, -0.1};
    const std::vector<double> x = {std::numbers::e, 4.0};
    const auto p = regress_out_of_sample(m, x);
    CHECK(p.scale == doctest::Approx(std::exp(5.0 + 0.5 * std::log(4.0))).epsilon(1e-14));
    CHECK(p.shape == doctest::Approx(std::exp(0.2 - 0.1 * std::log(4.0))).epsilon(1e-14));

    m.beta = {100.0, 0.0};
    CHECK(regress_out_of_sample(m, x).scale == doctest::Approx(kMaxScale).epsilon(1e-14));

    m.out_of_sample = OutOfSampleMode::regress_scale;
    m.out_of_sample_params = {1.0, 2.0};
    CHECK(regress_out_of_sample(m, x).shape == 2.0);

    m.out_of_sample = OutOfSampleMode::population_mean;
    m.out_of_sample_params = {42.0, 0.5};
    CHECK(regress_out_of_sample(m, x) == WeibullParams{42.0, 0.5});

    m.out_of_sample = OutOfSampleMode::regress;
    CHECK_THROWS_AS(regress_out_of_sample(m, std::vector<double>{1.0}), InputError);
    CHECK_THROWS_AS(regress_out_of_sample(m, std::vector<double>{1.0, 0.0}), DomainError);
}

TEST_CASE("input errors") {
    const auto inst = make_instance(39, 4, 10);
    CHECK_THROWS_AS(fit_newer({}, inst.features, {}), InputError);
    auto dup = inst.samples;
    dup.push_back(dup.front());
    CHECK_THROWS_AS(fit_newer(dup, inst.features, {}), InputError);
    auto flat = inst.samples;
    flat[0].delays.assign(5, 7.0);
    CHECK_THROWS_AS(fit_newer(flat, inst.features, {}), InputError);
    Hyperparams bad;
    bad.mu = -1.0;
    CHECK_THROWS_AS(fit_newer(inst.samples, inst.features, bad), ConfigError);
    CHECK_THROWS_AS(parse_model_kind("gompertz"), ConfigError);
    CHECK(parse_model_kind("cox") == ModelKind::cox_shared_shape);
    CHECK(parse_model_kind("wbl") == ModelKind::plain_weibull);
}

TEST_CASE("training sample selection") {
    std::vector<SubcascadeSample> s = {{"a", {1.0, 2.0, 3.0}}, {"b", {4.0}}, {"c", {2.0, 2.0}}, {"d", {1.0, 5.0}}};
    const auto kept = select_training_samples(s, 2);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].user == "a");
    CHECK(kept[1].user == "d");
    CHECK(select_training_samples(s, 3).size() == 1);
}

TEST_CASE("fit is independent of thread count") {
    const auto inst = make_instance(40, 50, 15);
    SolverOptions one;
    SolverOptions four;
    four.threads = 4;
    const auto a = fit_newer(inst.samples, inst.features, {}, one);
    const auto b = fit_newer(inst.samples, inst.features, {}, four);
    CHECK(a.model == b.model);
    CHECK(a.report.objective == b.report.objective);
}
