#include "newer/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "newer/error.hpp"

namespace newer {

namespace {

// Schedules slightly ahead of the exact threshold so rounding in the
// inverse can never let the error exceed epsilon.
constexpr double kThresholdMargin = 1e-9;

}  // namespace

SamplingPredictor::SamplingPredictor(const SamplingOptions& options, const DynamicsTable& dynamics)
    : options_(options), dynamics_(&dynamics) {
    if (!(options.epsilon > 0.0) || !std::isfinite(options.epsilon)) {
        throw ConfigError("sampling epsilon must be positive and finite");
    }
    if (options.network_size < 1) {
        throw ConfigError("network size must be at least 1");
    }
    if (!(options.time_shift >= 0.0)) {
        throw ConfigError("time shift must be nonnegative");
    }
    floor_ = 1.0 / static_cast<double>(options.network_size);
}

std::size_t SamplingPredictor::recalculation_budget(double epsilon, std::size_t network_size) {
    return static_cast<std::size_t>(
        std::ceil(std::log(static_cast<double>(network_size)) / std::log1p(epsilon)));
}

std::size_t SamplingPredictor::max_threshold_recalculations() const noexcept {
    std::size_t worst = 0;
    for (const auto& s : subs_) worst = std::max(worst, s.threshold_recalcs);
    return worst;
}

double SamplingPredictor::death_rate(const Subcascade& s, double now) const {
    return std::max(weibull_cdf(s.params, now - s.join + options_.time_shift), floor_);
}

void SamplingPredictor::recalculate(std::size_t index, double now) {
    Subcascade& s = subs_[index];
    const double d = death_rate(s, now);
    const double updated = static_cast<double>(s.replies) * (s.fdrate / d);
    total_ += updated - s.contribution;
    s.contribution = updated;
    s.deathrate = d;
    ++s.version;

    const double target = (1.0 + options_.epsilon * (1.0 - kThresholdMargin)) * d;
    if (target < 1.0) {
        double when = s.join - options_.time_shift + weibull_cdf_inverse(s.params, target);
        if (!(when > now)) {
            when = std::nextafter(now, std::numeric_limits<double>::infinity());
        }
        due_.push({when, index, s.version});
    }
}

void SamplingPredictor::advance(double now) {
    while (!due_.empty() && due_.top().time <= now) {
        const Due due = due_.top();
        due_.pop();
        Subcascade& s = subs_[due.index];
        if (due.version != s.version) {
            continue;
        }
        ++s.threshold_recalcs;
        ++threshold_recalcs_;
        recalculate(due.index, now);
    }
}

void SamplingPredictor::feed_event(const Event& event) {
    if (!std::isfinite(event.time)) {
        throw InputError("event for user '" + event.user + "' has a non-finite time");
    }
    if (event.time < clock_) {
        throw InputError("event for user '" + event.user + "' arrived out of order");
    }
    if (subs_.empty() == event.parent.has_value()) {
        throw InputError(subs_.empty() ? "the first event must be the root"
                                       : "second root '" + event.user + "'");
    }
    if (index_.contains(event.user)) {
        throw InputError("user '" + event.user + "' joined twice");
    }
    std::size_t parent = 0;
    if (event.parent) {
        const auto it = index_.find(*event.parent);
        if (it == index_.end()) {
            throw InputError("parent '" + *event.parent + "' of '" + event.user + "' is unknown");
        }
        parent = it->second;
    }
    const auto entry = dynamics_->lookup(event.user);
    if (!entry) {
        throw InputError("no dynamics for user '" + event.user + "'");
    }

    advance(event.time);
    clock_ = event.time;

    Subcascade s;
    s.params = entry->params;
    s.join = event.time;
    if (std::isfinite(options_.horizon)) {
        s.fdrate = std::max(
            weibull_cdf(s.params, std::max(0.0, options_.horizon - s.join) + options_.time_shift),
            floor_);
    }
    index_.emplace(event.user, subs_.size());
    subs_.push_back(s);

    if (event.parent) {
        ++subs_[parent].replies;
        ++reply_recalcs_;
        recalculate(parent, event.time);
    } else {
        total_ = 1.0;
    }
    published_.store(total_, std::memory_order_release);
}

double SamplingPredictor::query_size(double now) {
    if (std::isnan(now) || now < clock_) {
        throw InputError("query time precedes the last event");
    }
    advance(now);
    clock_ = now;
    published_.store(total_, std::memory_order_release);
    return total_;
}

}  // namespace newer
