#include "newer/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <unordered_map>

#include "newer/error.hpp"

namespace newer {

namespace {

constexpr double kSecondsPerDay = 86400.0;

struct UserHistory {
    std::size_t posts = 0;         // events authored (root or retweet)
    std::size_t retweets = 0;      // non-root events
    std::size_t participations = 0;
    std::size_t children = 0;
    std::size_t productive = 0;    // cascades with at least one child
};

}  // namespace

std::vector<std::string> feature_schema(const FeatureOptions& options) {
    std::vector<std::string> names = {"follower_count",
                                      "avg_follower_follower_count",
                                      "follower_avg_inflow_rate",
                                      "follower_avg_retweet_rate",
                                      "historical_subcascade_count",
                                      "avg_subcascade_size"};
    if (options.intercept) {
        names.emplace_back("bias");
    }
    return names;
}

std::vector<SubcascadeSample> extract_subcascades(std::span<const Cascade> cascades) {
    std::map<std::string, std::vector<double>> delays;
    for (const Cascade& c : cascades) {
        c.validate();
        std::unordered_map<std::string, double> joined;
        joined.reserve(c.events.size());
        for (const Event& e : c.events) {
            if (e.parent) {
                const auto it = joined.find(*e.parent);
                if (it == joined.end()) {
                    throw InputError("cascade '" + c.id + "': unknown parent '" + *e.parent + "'");
                }
                delays[*e.parent].push_back(e.time - it->second + kDelayShift);
            }
            joined.emplace(e.user, e.time);
        }
    }
    std::vector<SubcascadeSample> out;
    out.reserve(delays.size());
    for (auto& [user, d] : delays) {
        std::sort(d.begin(), d.end());
        out.push_back({user, std::move(d)});
    }
    return out;
}

FeatureMatrix extract_features(const Network& network, std::span<const Cascade> cascades,
                               const FeatureOptions& options) {
    const std::size_t n = network.size();
    std::vector<UserHistory> history(n);
    double first = std::numeric_limits<double>::infinity();
    double last = -std::numeric_limits<double>::infinity();

    for (const Cascade& c : cascades) {
        c.validate();
        std::unordered_map<std::string, std::size_t> children;
        for (const Event& e : c.events) {
            const auto idx = network.index_of(e.user);
            if (!idx) {
                throw InputError("cascade '" + c.id + "': user '" + e.user +
                                 "' is not in the network");
            }
            UserHistory& h = history[*idx];
            ++h.posts;
            ++h.participations;
            if (e.parent) {
                ++h.retweets;
                ++children[*e.parent];
            }
            first = std::min(first, e.time);
            last = std::max(last, e.time);
        }
        for (const auto& [user, count] : children) {
            UserHistory& h = history[*network.index_of(user)];
            h.children += count;
            ++h.productive;
        }
    }
    const double window_days =
        std::isfinite(first) ? std::max(1.0, (last - first) / kSecondsPerDay) : 1.0;

    std::vector<double> posts_received(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t followee : network.followees(v)) {
            posts_received[v] += static_cast<double>(history[followee].posts);
        }
    }
    std::vector<double> inflow(n);
    std::vector<double> retweet_rate(n);
    for (std::size_t v = 0; v < n; ++v) {
        inflow[v] = posts_received[v] / window_days;
        retweet_rate[v] =
            posts_received[v] > 0.0 ? static_cast<double>(history[v].retweets) / posts_received[v] : 0.0;
    }

    const auto names = feature_schema(options);
    RowMatrix values(n, names.size());
    for (std::size_t u = 0; u < n; ++u) {
        const auto followers = network.followers(u);
        double weight_total = 0.0;
        for (std::size_t f : followers) {
            weight_total += static_cast<double>(history[f].retweets) + 1.0;
        }
        double follower_followers = 0.0;
        double follower_inflow = 0.0;
        double follower_rate = 0.0;
        for (std::size_t f : followers) {
            const double w = (static_cast<double>(history[f].retweets) + 1.0) / weight_total;
            follower_followers += w * static_cast<double>(network.followers(f).size());
            follower_inflow += w * inflow[f];
            follower_rate += w * retweet_rate[f];
        }
        const UserHistory& h = history[u];
        const double avg_children =
            h.participations > 0
                ? static_cast<double>(h.children) / static_cast<double>(h.participations)
                : 0.0;
        auto row = values.row(u);
        row[0] = static_cast<double>(followers.size()) + 1.0;
        row[1] = follower_followers + 1.0;
        row[2] = follower_inflow + 1.0;
        row[3] = follower_rate + 1.0;
        row[4] = static_cast<double>(h.productive) + 1.0;
        row[5] = avg_children + 1.0;
        if (options.intercept) {
            row[6] = std::numbers::e;
        }
    }
    std::vector<std::string> users(network.ids().begin(), network.ids().end());
    return FeatureMatrix(names, std::move(users), std::move(values));
}

std::vector<Cascade> filter_cascades(std::span<const Cascade> cascades, std::size_t min_size) {
    std::vector<Cascade> out;
    for (const Cascade& c : cascades) {
        if (c.size() >= min_size) {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace newer
