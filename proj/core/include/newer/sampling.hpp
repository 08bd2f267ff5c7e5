#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "newer/features.hpp"
#include "newer/network.hpp"
#include "newer/predict.hpp"

namespace newer {

struct SamplingOptions {
    double epsilon = 0.1;
    std::size_t network_size = 1;
    /// Absolute prediction time t_e; +inf estimates the final size.
    double horizon = std::numeric_limits<double>::infinity();
    double time_shift = kDelayShift;
};

/// Streaming estimate of the additive subcascade predictor with relative
/// error at most epsilon against the exact estimate at the same instant.
///
/// Each subcascade caches the death rate d0 from its last recalculation. A
/// subcascade is recalculated when it gains a reply, or once the clock
/// passes the time at which its death rate reaches (1 + epsilon) * d0; due
/// times live in a min-heap and are processed lazily when the clock moves.
/// Subcascades without replies are never evaluated.
///
/// Single writer: feed_event and query_size must come from one thread.
/// snapshot() may be called from any thread.
class SamplingPredictor {
public:
    /// `dynamics` must outlive the predictor. Throws ConfigError on
    /// epsilon <= 0 or network_size < 1.
    SamplingPredictor(const SamplingOptions& options, const DynamicsTable& dynamics);

    /// Events must arrive in nondecreasing time, root first. Throws
    /// InputError on out-of-order, duplicate or orphan events.
    void feed_event(const Event& event);

    /// Advances the clock to `now`, runs due recalculations and returns the
    /// current size estimate.
    double query_size(double now);

    /// Last published estimate; safe to read concurrently with the writer.
    double snapshot() const noexcept { return published_.load(std::memory_order_acquire); }

    double clock() const noexcept { return clock_; }
    std::size_t observed_size() const noexcept { return subs_.size(); }

    /// Recalculations triggered by new replies.
    std::size_t reply_recalculations() const noexcept { return reply_recalcs_; }
    /// Recalculations triggered by a death-rate threshold.
    std::size_t threshold_recalculations() const noexcept { return threshold_recalcs_; }
    std::size_t recalculations() const noexcept { return reply_recalcs_ + threshold_recalcs_; }
    /// Largest number of threshold recalculations of any single subcascade.
    std::size_t max_threshold_recalculations() const noexcept;

    /// ceil(log_{1+epsilon} |V|): the threshold-recalculation budget per subcascade.
    static std::size_t recalculation_budget(double epsilon, std::size_t network_size);

private:
    struct Subcascade {
        WeibullParams params;
        double join = 0.0;
        double fdrate = 1.0;
        double deathrate = 1.0;
        double contribution = 0.0;
        std::size_t replies = 0;
        std::uint64_t version = 0;
        std::size_t threshold_recalcs = 0;
    };
    struct Due {
        double time;
        std::size_t index;
        std::uint64_t version;
        bool operator>(const Due& o) const {
            return time != o.time ? time > o.time : index > o.index;
        }
    };

    void advance(double now);
    void recalculate(std::size_t index, double now);
    double death_rate(const Subcascade& s, double now) const;

    SamplingOptions options_;
    const DynamicsTable* dynamics_;
    double floor_;
    double clock_ = -std::numeric_limits<double>::infinity();
    double total_ = 0.0;
    std::vector<Subcascade> subs_;
    std::unordered_map<std::string, std::size_t> index_;
    std::priority_queue<Due, std::vector<Due>, std::greater<>> due_;
    std::size_t reply_recalcs_ = 0;
    std::size_t threshold_recalcs_ = 0;
    std::atomic<double> published_{0.0};
};

}  // namespace newer
