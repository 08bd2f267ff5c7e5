#include "newer/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "newer/error.hpp"

namespace newer {

void PartialCascade::validate() const {
    observed.validate();
    if (network_size < 1) {
        throw InputError("cascade '" + observed.id + "': network size must be at least 1");
    }
    if (!(t_limit >= observed.events.back().time)) {
        throw InputError("cascade '" + observed.id + "': t_limit precedes the last observed event");
    }
}

PartialCascade observe_until(const Cascade& full, double t_limit, std::size_t network_size) {
    PartialCascade pc{full.prefix_until(t_limit), t_limit, network_size};
    if (pc.observed.events.empty()) {
        throw InputError("cascade '" + full.id + "': no events before t_limit");
    }
    return pc;
}

PartialCascade observe_first(const Cascade& full, std::size_t count, std::size_t network_size) {
    if (count == 0 || full.events.empty()) {
        throw InputError("cascade '" + full.id + "': must observe at least one event");
    }
    Cascade prefix = full.first_events(count);
    const double t_limit = prefix.events.back().time;
    return {std::move(prefix), t_limit, network_size};
}

std::string_view to_string(DynamicsSource source) {
    switch (source) {
        case DynamicsSource::fitted: return "fitted";
        case DynamicsSource::regressed: return "regressed";
        case DynamicsSource::fallback: return "fallback";
        case DynamicsSource::given: return "given";
    }
    return "unknown";
}

DynamicsTable DynamicsTable::from_model(const NewerModel& model, const FeatureMatrix* features,
                                        bool use_fallback) {
    DynamicsTable table;
    for (const auto& u : model.users) {
        table.set(u.id, u.params, DynamicsSource::fitted);
    }
    if (features) {
        if (features->names() != model.feature_names) {
            throw InputError("feature schema does not match the model");
        }
        for (std::size_t r = 0; r < features->rows(); ++r) {
            const std::string& user = features->users()[r];
            if (!model.find(user)) {
                table.set(user, regress_out_of_sample(model, features->row(r)),
                          DynamicsSource::regressed);
            }
        }
    }
    if (use_fallback) {
        table.set_fallback(model.fallback);
    }
    return table;
}

void DynamicsTable::set(std::string user, WeibullParams params, DynamicsSource source) {
    params.validate();
    entries_.insert_or_assign(std::move(user), Entry{params, source});
}

void DynamicsTable::set_fallback(std::optional<WeibullParams> fallback) {
    if (fallback) fallback->validate();
    fallback_ = fallback;
}

std::optional<DynamicsTable::Entry> DynamicsTable::lookup(std::string_view user) const {
    const auto it = entries_.find(std::string(user));
    if (it != entries_.end()) {
        return it->second;
    }
    if (fallback_) {
        return Entry{*fallback_, DynamicsSource::fallback};
    }
    return std::nullopt;
}

BasicPredictor::BasicPredictor(const PartialCascade& pc, const DynamicsTable& dynamics,
                               const PredictOptions& options)
    : floor_(1.0 / static_cast<double>(pc.network_size)),
      t_limit_(pc.t_limit),
      shift_(options.time_shift),
      observed_(pc.observed.size()) {
    pc.validate();
    if (!(options.time_shift >= 0.0)) {
        throw ConfigError("time shift must be nonnegative");
    }
    std::unordered_map<std::string, std::size_t> replies;
    for (const Event& e : pc.observed.events) {
        if (e.parent) ++replies[*e.parent];
    }
    for (const Event& e : pc.observed.events) {
        const auto entry = dynamics.lookup(e.user);
        if (!entry) {
            throw InputError("cascade '" + pc.observed.id + "': no dynamics for user '" + e.user + "'");
        }
        if (entry->source == DynamicsSource::fallback) {
            fallback_users_.push_back(e.user);
        }
        const auto it = replies.find(e.user);
        if (it == replies.end()) {
            continue;  // a subcascade without replies contributes nothing
        }
        Term term;
        term.params = entry->params;
        term.join = e.time;
        term.replies = static_cast<double>(it->second);
        term.deathrate = std::max(weibull_cdf(term.params, t_limit_ - e.time + shift_), floor_);
        terms_.push_back(term);
    }
}

double BasicPredictor::size_at(double t_e) const {
    if (!(t_e >= t_limit_)) {
        throw InputError("prediction time precedes t_limit");
    }
    double sum = 1.0;
    for (const Term& term : terms_) {
        const double fdrate = std::max(weibull_cdf(term.params, t_e - term.join + shift_), floor_);
        sum += term.replies * (fdrate / term.deathrate);
    }
    return sum;
}

double BasicPredictor::final_size() const {
    double sum = 1.0;
    for (const Term& term : terms_) {
        sum += term.replies * (1.0 / term.deathrate);
    }
    return sum;
}

double predict_size_basic(const PartialCascade& pc, const DynamicsTable& dynamics, double t_e,
                          const PredictOptions& options) {
    return BasicPredictor(pc, dynamics, options).size_at(t_e);
}

double predict_final_size(const PartialCascade& pc, const DynamicsTable& dynamics,
                          const PredictOptions& options) {
    return BasicPredictor(pc, dynamics, options).final_size();
}

std::optional<double> predict_outbreak_time(const PartialCascade& pc, const DynamicsTable& dynamics,
                                            double threshold, const OutbreakOptions& options) {
    if (!(threshold >= 1.0)) {
        throw InputError("outbreak threshold must be at least 1");
    }
    if (!(options.max_horizon >= 0.0)) {
        throw ConfigError("outbreak search horizon must be nonnegative");
    }
    const BasicPredictor predictor(pc, dynamics, options.predict);
    const double start = pc.t_limit;
    if (predictor.size_at(start) >= threshold) {
        return start;
    }
    if (predictor.final_size() < threshold) {
        return std::nullopt;
    }
    double hi = std::floor(options.max_horizon);
    if (predictor.size_at(start + hi) < threshold) {
        return std::nullopt;
    }
    double lo = 0.0;  // size(start + lo) < threshold <= size(start + hi)
    while (hi - lo > 1.0) {
        const double mid = std::floor(0.5 * (lo + hi));
        if (predictor.size_at(start + mid) >= threshold) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return start + hi;
}

ProcessCurve predict_process(const PartialCascade& pc, const DynamicsTable& dynamics,
                             std::span<const double> grid, const PredictOptions& options) {
    const BasicPredictor predictor(pc, dynamics, options);
    ProcessCurve curve;
    curve.points.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0 && grid[i] < grid[i - 1]) {
            throw InputError("prediction grid must be sorted");
        }
        if (!(grid[i] >= pc.t_limit)) {
            throw InputError("prediction grid must not precede t_limit");
        }
        curve.points.emplace_back(grid[i], predictor.size_at(grid[i]));
    }
    return curve;
}

}  // namespace newer
