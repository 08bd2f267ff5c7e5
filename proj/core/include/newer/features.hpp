#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "newer/network.hpp"
#include "newer/samples.hpp"

namespace newer {

/// Seconds added to every raw parent-to-child gap so that delays are >= 1.
/// Fitting and prediction both use this convention.
inline constexpr double kDelayShift = 1.0;

/// Smaller cascades carry too little of the process to learn from.
inline constexpr std::size_t kDefaultMinCascadeSize = 5;

struct FeatureOptions {
    /// Appends a constant "bias" column equal to e, so its log is 1. A column
    /// of ones cannot act as an intercept because log(1) = 0.
    bool intercept = false;
};

/// Column names produced by extract_features, in order.
std::vector<std::string> feature_schema(const FeatureOptions& options = {});

/// One sample per user that has at least one child, sorted by user id. A
/// child joining at t_child under a parent that joined at t_parent adds
/// delay t_child - t_parent + kDelayShift to the parent's sample.
/// Throws InputError naming the cascade when a cascade is malformed.
std::vector<SubcascadeSample> extract_subcascades(std::span<const Cascade> cascades);

/// Per-user covariates for every network node, add-one smoothed so every
/// entry is >= 1. Follower aggregates weight each follower by its
/// retweet count plus one, normalized to sum to one.
///
///   follower_count               followers + 1
///   avg_follower_follower_count  weighted mean follower count of followers + 1
///   follower_avg_inflow_rate     weighted mean posts received per day + 1
///   follower_avg_retweet_rate    weighted mean (retweets / posts received) + 1
///   historical_subcascade_count  cascades where the user has a child + 1
///   avg_subcascade_size          children per cascade joined + 1
///
/// Throws InputError if a cascade user is not in the network.
FeatureMatrix extract_features(const Network& network, std::span<const Cascade> cascades,
                               const FeatureOptions& options = {});

/// Cascades with at least `min_size` events, order preserved.
std::vector<Cascade> filter_cascades(std::span<const Cascade> cascades,
                                     std::size_t min_size = kDefaultMinCascadeSize);

}  // namespace newer
