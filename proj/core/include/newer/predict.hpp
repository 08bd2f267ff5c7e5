#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "newer/features.hpp"
#include "newer/fit.hpp"
#include "newer/network.hpp"
#include "newer/survival.hpp"

namespace newer {

/// The observed prefix of a cascade up to t_limit.
struct PartialCascade {
    Cascade observed;
    double t_limit = 0.0;
    /// |V|; 1/|V| floors every death rate.
    std::size_t network_size = 1;

    /// Cascade invariants, t_limit >= last observed time, network_size >= 1.
    void validate() const;
};

/// Events of `full` with time <= t_limit.
PartialCascade observe_until(const Cascade& full, double t_limit, std::size_t network_size);
/// The first `count` events of `full`; t_limit is the time of the last one.
PartialCascade observe_first(const Cascade& full, std::size_t count, std::size_t network_size);

enum class DynamicsSource { fitted, regressed, fallback, given };

std::string_view to_string(DynamicsSource source);

/// Immutable user -> WeibullParams lookup used by every predictor. Users
/// without an entry get the fallback, if one is set.
class DynamicsTable {
public:
    struct Entry {
        WeibullParams params;
        DynamicsSource source = DynamicsSource::given;
    };

    DynamicsTable() = default;

    /// Fitted users first, then every feature row not fitted is regressed
    /// through the model. The model's population median is the fallback when
    /// `use_fallback` is set.
    static DynamicsTable from_model(const NewerModel& model, const FeatureMatrix* features,
                                    bool use_fallback = true);

    void set(std::string user, WeibullParams params, DynamicsSource source = DynamicsSource::given);
    void set_fallback(std::optional<WeibullParams> fallback);

    std::optional<Entry> lookup(std::string_view user) const;
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::unordered_map<std::string, Entry> entries_;
    std::optional<WeibullParams> fallback_;
};

struct PredictOptions {
    /// Added to elapsed time before evaluating a user's survival function,
    /// matching the shift applied to fitting delays.
    double time_shift = kDelayShift;
};

/// Additive subcascade estimate of the cascade size at t_e >= t_limit:
///   1 + sum_u replynum(u) * fdrate(u) / deathrate(u)
/// with deathrate(u) = max(1 - S_u(t_limit - t_u), 1/|V|) and
/// fdrate(u) = max(1 - S_u(t_e - t_u), 1/|V|). Pass +inf for the final size.
double predict_size_basic(const PartialCascade& pc, const DynamicsTable& dynamics, double t_e,
                          const PredictOptions& options = {});

/// predict_size_basic with fdrate = 1 for every user.
double predict_final_size(const PartialCascade& pc, const DynamicsTable& dynamics,
                          const PredictOptions& options = {});

struct OutbreakOptions {
    /// Search window past t_limit; beyond it the answer is "never".
    double max_horizon = 30.0 * 86400.0;
    PredictOptions predict;
};

/// Earliest t = t_limit + j (integer j >= 0 seconds) with predicted size >=
/// threshold, by binary search. Empty when the threshold is never reached
/// within the window or exceeds the predicted final size.
std::optional<double> predict_outbreak_time(const PartialCascade& pc, const DynamicsTable& dynamics,
                                            double threshold, const OutbreakOptions& options = {});

struct ProcessCurve {
    std::vector<std::pair<double, double>> points;  // (time, size)
};

/// Predicted size at each grid time. Grid must be sorted and >= t_limit.
ProcessCurve predict_process(const PartialCascade& pc, const DynamicsTable& dynamics,
                             std::span<const double> grid, const PredictOptions& options = {});

/// Precomputed per-subcascade terms of one partial cascade, for repeated
/// evaluation at many horizons.
class BasicPredictor {
public:
    BasicPredictor(const PartialCascade& pc, const DynamicsTable& dynamics,
                   const PredictOptions& options = {});

    double size_at(double t_e) const;
    double final_size() const;
    double t_limit() const noexcept { return t_limit_; }
    std::size_t observed_size() const noexcept { return observed_; }
    /// Users that were served by the fallback parameters.
    const std::vector<std::string>& fallback_users() const noexcept { return fallback_users_; }

private:
    struct Term {
        WeibullParams params;
        double join = 0.0;
        double replies = 0.0;
        double deathrate = 1.0;
    };
    std::vector<Term> terms_;
    std::vector<std::string> fallback_users_;
    double floor_ = 1.0;
    double t_limit_ = 0.0;
    double shift_ = 0.0;
    std::size_t observed_ = 0;
};

}  // namespace newer
