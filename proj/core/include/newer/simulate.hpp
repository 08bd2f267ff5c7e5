#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "newer/network.hpp"
#include "newer/samples.hpp"
#include "newer/survival.hpp"

namespace newer {

/// Follower counts follow a discrete power law with pdf exponent
/// `exponent`: d = floor(min_degree * U^{-1/(exponent-1)}), capped at
/// max_degree (0 means n - 1).
struct DegreeLaw {
    double exponent = 2.5;
    std::size_t min_degree = 2;
    std::size_t max_degree = 0;
};

struct SimConfig {
    std::size_t nodes = 1000;
    DegreeLaw degree;
    std::size_t cascades = 500;

    /// Log-normal covariates: log x ~ N(0, covariate_sigma^2). A leading
    /// "bias" column equal to e carries the intercept.
    std::size_t covariates = 3;
    double covariate_sigma = 0.5;
    /// Coefficients over [bias, covariates...]: log lambda = log x . beta_star.
    std::vector<double> beta_star = {7.0, 0.8, 0.0, -0.5};
    std::vector<double> gamma_star = {0.0, 0.4, 0.0, 0.0};
    /// Overrides the regression: one entry per node, or one for every node.
    std::vector<WeibullParams> explicit_params;

    /// Per-user probability that each follower retweets:
    /// min(max_probability, retweet_scale / sqrt(followers)).
    double retweet_scale = 0.3;
    double max_probability = 1.0;
    std::optional<double> fixed_retweet_probability;
    /// Multiplies the retweet probability of a user at depth h by
    /// depth_decay^h. Values below 1 make cascades shallower.
    double depth_decay = 1.0;
    /// Per-cascade appeal: every retweet probability of a cascade is scaled
    /// by exp(virality_sigma * Z), Z standard normal, and capped at 1.
    double virality_sigma = 0.0;

    /// Retweets later than root time + horizon are discarded.
    double horizon = 7.0 * 86400.0;
    /// Root posts are spread uniformly over [0, window).
    double window = 30.0 * 86400.0;
    std::size_t min_root_followers = 1;
    /// 0 means unlimited.
    std::size_t max_cascade_size = 0;

    std::uint64_t seed = 1;
    unsigned threads = 1;

    /// Throws ConfigError on nonpositive counts or inconsistent shapes.
    void validate() const;
};

struct GroundTruth {
    FeatureMatrix features;
    std::vector<double> beta;
    std::vector<double> gamma;
    /// Indexed like the network's nodes.
    std::vector<WeibullParams> params;
    std::vector<double> retweet_probability;
};

struct SimOutput {
    Network network;
    GroundTruth truth;
    std::vector<Cascade> cascades;
};

/// Zero-padded id so lexicographic order equals numeric order.
std::string node_id(std::size_t index, std::size_t nodes);

/// Each node draws a follower count from the degree law, then that many
/// distinct followers uniformly at random.
Network gen_network(const SimConfig& cfg);

GroundTruth gen_ground_truth(const Network& network, const SimConfig& cfg);

/// Independent-cascade simulation with Weibull delays. Each cascade uses a
/// seed derived from (cfg.seed, cascade index). When `gaps` is given it
/// receives, per cascade and event, the drawn parent-to-child gap (0 for the
/// root).
std::vector<Cascade> gen_cascades(const Network& network, const GroundTruth& truth,
                                  const SimConfig& cfg,
                                  std::vector<std::vector<double>>* gaps = nullptr);

SimOutput simulate(const SimConfig& cfg);

}  // namespace newer
