#include "newer/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <unordered_set>

#include "newer/error.hpp"
#include "newer/parallel.hpp"
#include "newer/random.hpp"

namespace newer {

namespace {

// Distinct seed streams for the three generation stages.
constexpr std::uint64_t kNetworkStream = 0;
constexpr std::uint64_t kTruthStream = 1;
constexpr std::uint64_t kCascadeStream = 2;

struct Pending {
    double time;
    std::size_t user;
    std::size_t parent;
    double gap;
    std::size_t depth;
    bool operator>(const Pending& o) const {
        return time != o.time ? time > o.time : user > o.user;
    }
};

}  // namespace

void SimConfig::validate() const {
    if (nodes < 1) throw ConfigError("nodes must be positive");
    if (cascades < 1) throw ConfigError("cascades must be positive");
    if (!(degree.exponent > 1.0)) throw ConfigError("degree exponent must exceed 1");
    if (degree.max_degree != 0 && degree.max_degree < degree.min_degree) {
        throw ConfigError("max degree is below min degree");
    }
    if (nodes > 1 && degree.min_degree > nodes - 1) {
        throw ConfigError("min degree exceeds the number of other nodes");
    }
    if (!(covariate_sigma >= 0.0)) throw ConfigError("covariate sigma must be nonnegative");
    if (explicit_params.empty()) {
        if (beta_star.size() != covariates + 1 || gamma_star.size() != covariates + 1) {
            throw ConfigError("beta_star and gamma_star need covariates + 1 entries");
        }
    } else if (explicit_params.size() != 1 && explicit_params.size() != nodes) {
        throw ConfigError("explicit params need one entry or one per node");
    }
    for (const auto& p : explicit_params) {
        if (!p.valid()) throw ConfigError("explicit params must be positive and finite");
    }
    if (!(retweet_scale >= 0.0)) throw ConfigError("retweet scale must be nonnegative");
    if (!(max_probability >= 0.0 && max_probability <= 1.0)) {
        throw ConfigError("max probability must lie in [0, 1]");
    }
    if (fixed_retweet_probability &&
        !(*fixed_retweet_probability >= 0.0 && *fixed_retweet_probability <= 1.0)) {
        throw ConfigError("fixed retweet probability must lie in [0, 1]");
    }
    if (!(virality_sigma >= 0.0)) throw ConfigError("virality sigma must be nonnegative");
    if (!(depth_decay >= 0.0 && depth_decay <= 1.0)) throw ConfigError("depth decay must lie in [0, 1]");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(window >= 0.0) || !std::isfinite(window)) throw ConfigError("window must be finite");
}

std::string node_id(std::size_t index, std::size_t nodes) {
    std::size_t width = 1;
    for (std::size_t v = nodes > 0 ? nodes - 1 : 0; v >= 10; v /= 10) ++width;
    std::string digits = std::to_string(index);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return "u" + digits;
}

Network gen_network(const SimConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.nodes;
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = node_id(i, n);
    std::vector<Network::Edge> edges;
    if (n == 1) {
        return Network(std::move(ids), edges);
    }
    const std::size_t cap = cfg.degree.max_degree == 0 ? n - 1 : std::min(cfg.degree.max_degree, n - 1);
    Rng rng(mix_seed(cfg.seed, kNetworkStream));
    const double tail = 1.0 / (cfg.degree.exponent - 1.0);
    for (std::size_t u = 0; u < n; ++u) {
        const double draw = static_cast<double>(cfg.degree.min_degree) * std::pow(rng.uniform(), -tail);
        const std::size_t d = draw >= static_cast<double>(cap) ? cap : static_cast<std::size_t>(draw);
        // Floyd's algorithm over the n - 1 other nodes.
        std::unordered_set<std::size_t> chosen;
        std::vector<std::size_t> order;
        order.reserve(d);
        for (std::size_t j = n - 1 - d; j < n - 1; ++j) {
            std::size_t t = rng.below(j + 1);
            if (chosen.contains(t)) t = j;
            chosen.insert(t);
            order.push_back(t);
        }
        for (std::size_t slot : order) {
            const std::size_t follower = slot >= u ? slot + 1 : slot;
            edges.emplace_back(ids[follower], ids[u]);
        }
    }
    return Network(std::move(ids), edges);
}

GroundTruth gen_ground_truth(const Network& network, const SimConfig& cfg) {
    cfg.validate();
    const std::size_t n = network.size();
    Rng rng(mix_seed(cfg.seed, kTruthStream));

    std::vector<std::string> names = {"bias"};
    for (std::size_t j = 0; j < cfg.covariates; ++j) names.push_back("x" + std::to_string(j + 1));
    RowMatrix x(n, cfg.covariates + 1);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = std::numbers::e;
        for (std::size_t j = 0; j < cfg.covariates; ++j) {
            x(i, j + 1) = std::exp(cfg.covariate_sigma * rng.normal());
        }
    }
    std::vector<std::string> users(network.ids().begin(), network.ids().end());

    GroundTruth truth;
    truth.beta = cfg.beta_star;
    truth.gamma = cfg.gamma_star;
    truth.params.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!cfg.explicit_params.empty()) {
            truth.params[i] = cfg.explicit_params.size() == 1 ? cfg.explicit_params[0]
                                                              : cfg.explicit_params[i];
            continue;
        }
        double log_scale = 0.0;
        double log_shape = 0.0;
        for (std::size_t j = 0; j <= cfg.covariates; ++j) {
            const double lx = std::log(x(i, j));
            log_scale += lx * cfg.beta_star[j];
            log_shape += lx * cfg.gamma_star[j];
        }
        truth.params[i] = {std::exp(log_scale), std::exp(log_shape)};
        if (!truth.params[i].valid()) {
            throw ConfigError("ground-truth parameters overflow for node " + users[i]);
        }
    }
    truth.retweet_probability.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (cfg.fixed_retweet_probability) {
            truth.retweet_probability[i] = *cfg.fixed_retweet_probability;
        } else {
            const double audience = std::max<double>(1.0, network.followers(i).size());
            truth.retweet_probability[i] =
                std::min(cfg.max_probability, cfg.retweet_scale / std::sqrt(audience));
        }
    }
    truth.features = FeatureMatrix(std::move(names), std::move(users), std::move(x));
    return truth;
}

std::vector<Cascade> gen_cascades(const Network& network, const GroundTruth& truth,
                                  const SimConfig& cfg, std::vector<std::vector<double>>* gaps) {
    cfg.validate();
    const std::size_t n = network.size();
    if (truth.params.size() != n || truth.retweet_probability.size() != n) {
        throw ConfigError("ground truth does not match the network size");
    }
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < n; ++i) {
        if (network.followers(i).size() >= cfg.min_root_followers) eligible.push_back(i);
    }
    if (eligible.empty()) {
        throw ConfigError("no node has at least min_root_followers followers");
    }

    std::vector<Cascade> out(cfg.cascades);
    std::vector<std::vector<double>> drawn(cfg.cascades);
    const std::size_t cascade_digits = node_id(cfg.cascades - 1, cfg.cascades).size() - 1;
    parallel_for(cfg.cascades, cfg.threads, [&](std::size_t c) {
        Rng rng(mix_seed(cfg.seed, kCascadeStream + c));
        Cascade& cascade = out[c];
        std::string label = std::to_string(c);
        cascade.id = "c" + std::string(cascade_digits - std::min(cascade_digits, label.size()), '0') + label;

        const std::size_t root = eligible[rng.below(eligible.size())];
        const double start = rng.uniform() * cfg.window;
        const double end = start + cfg.horizon;
        const double appeal = cfg.virality_sigma > 0.0 ? std::exp(cfg.virality_sigma * rng.normal()) : 1.0;
        std::unordered_set<std::size_t> infected;
        std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
        queue.push({start, root, root, 0.0, 0});
        while (!queue.empty()) {
            const Pending next = queue.top();
            queue.pop();
            if (!infected.insert(next.user).second) continue;
            Event e{network.id(next.user), std::nullopt, next.time};
            if (next.user != root) e.parent = network.id(next.parent);
            cascade.events.push_back(std::move(e));
            drawn[c].push_back(next.gap);
            if (cfg.max_cascade_size != 0 && cascade.events.size() >= cfg.max_cascade_size) break;

            const double p = std::min(1.0, appeal * truth.retweet_probability[next.user] *
                                               std::pow(cfg.depth_decay, static_cast<double>(next.depth)));
            for (std::size_t f : network.followers(next.user)) {
                // Draw for every follower so the stream does not depend on
                // infection order.
                const bool fires = rng.bernoulli(p);
                const double gap = weibull_survival_inverse(truth.params[next.user], rng.uniform());
                if (!fires || infected.contains(f)) continue;
                const double t = next.time + gap;
                if (t <= end) queue.push({t, f, next.user, gap, next.depth + 1});
            }
        }
    });
    if (gaps) *gaps = std::move(drawn);
    return out;
}

SimOutput simulate(const SimConfig& cfg) {
    SimOutput out;
    out.network = gen_network(cfg);
    out.truth = gen_ground_truth(out.network, cfg);
    out.cascades = gen_cascades(out.network, out.truth, cfg);
    return out;
}

}  // namespace newer
