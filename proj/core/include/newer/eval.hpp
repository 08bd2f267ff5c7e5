#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newer/fit.hpp"
#include "newer/network.hpp"
#include "newer/predict.hpp"
#include "newer/samples.hpp"

namespace newer {

enum class Task { size, outbreak, process_point };

std::string_view to_string(Task task);

struct PredictionRecord {
    std::string cascade;
    double truth = 0.0;
    double predicted = 0.0;
    Task task = Task::size;
};

/// sqrt(mean (ln predicted - ln truth)^2). Throws InputError on an empty set
/// or a nonpositive value.
double rmsle(std::span<const PredictionRecord> records);

/// Fraction with truth (1 - sigma) <= predicted <= truth (1 + sigma).
double sigma_precision(std::span<const PredictionRecord> records, double sigma);

/// Fraction of grid points where the predicted size is within (1 +- sigma)
/// of the true size. Both curves must share the same times.
double process_precision(const ProcessCurve& predicted, const ProcessCurve& truth, double sigma);

/// Observed cumulative size of `cascade` at each grid time.
ProcessCurve true_process(const Cascade& cascade, std::span<const double> grid);

struct CascadeDominance {
    std::string cascade;
    /// (user, children / all non-root events), descending share, ties by id.
    std::vector<std::pair<std::string, double>> shares;
    std::vector<double> cumulative;
    /// Share of the top ceil(1%) of participants.
    double top_percent_share = 0.0;
    /// Smallest number of users whose children make up half of all children.
    std::size_t half_set = 0;
    /// Quartiles of (join - root time) / (last - root time) over that set.
    std::vector<double> join_quantiles;
};

struct DominanceReport {
    std::vector<CascadeDominance> cascades;
    /// Pooled over cascades: share of all children generated by the top
    /// ceil(1%) of participating users.
    double pooled_top_percent_share = 0.0;
    std::size_t participants = 0;
};

DominanceReport dominance_report(std::span<const Cascade> cascades);

/// Early-stage features of the log-linear baseline: log observed size, log
/// speed, log(1 + root followers), log(1 + mean observed followers), depth,
/// and mean node depth.
std::vector<double> loglinear_features(const PartialCascade& pc, const Network& network);

/// Ordinary least squares of ln(final size) on loglinear_features plus an
/// intercept.
class LogLinearModel {
public:
    LogLinearModel() = default;
    static LogLinearModel fit(std::span<const std::vector<double>> rows, std::span<const double> sizes);
    double predict(std::span<const double> row) const;
    const std::vector<double>& coefficients() const noexcept { return coef_; }

private:
    std::vector<double> coef_;
};

enum class Protocol { size, outbreak, process, out_of_sample };

std::string_view to_string(Protocol protocol);
Protocol parse_protocol(std::string_view name);

struct ExperimentConfig {
    Protocol protocol = Protocol::size;
    /// Survival models to fit; "loglinear" is handled separately.
    std::vector<ModelKind> models = {ModelKind::newer, ModelKind::exponential, ModelKind::rayleigh,
                                     ModelKind::cox_shared_shape};
    bool loglinear = true;

    /// Observed prefix sizes (size and outbreak protocols).
    std::vector<std::size_t> prefixes = {5, 10, 25};
    /// Early-stage fractions of each cascade's duration (process protocol).
    std::vector<double> fractions = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
    std::size_t grid_points = 20;

    std::size_t folds = 10;
    std::size_t min_cascade_size = kDefaultMinCascadeSize;
    std::size_t min_user_events = 2;
    double sigma = 0.2;
    double outbreak_threshold = 1000.0;
    double outbreak_horizon = 30.0 * 86400.0;
    double hidden_fraction = 0.1;

    Hyperparams hyper;
    SolverOptions solver;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    void validate() const;
};

struct MetricRow {
    std::string protocol;
    std::string model;
    std::string sweep;
    double sweep_value = 0.0;
    std::size_t count = 0;
    double rmsle = 0.0;
    double precision = 0.0;
};

struct ExperimentReport {
    std::vector<MetricRow> rows;
    const MetricRow* find(std::string_view model, double sweep_value) const;
};

/// Fold index per cascade. Cascades are ranked by size, cut into deciles
/// and dealt round-robin to folds within each decile after a seeded shuffle.
std::vector<std::size_t> stratified_folds(std::span<const Cascade> cascades, std::size_t folds,
                                          std::uint64_t seed);

/// Runs one protocol. Per-user dynamics are fitted on the training folds;
/// users without training data are regressed from `features`. Throws
/// InputError when a fold has no training or test cascades.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const Network& network,
                                std::span<const Cascade> cascades, const FeatureMatrix& features);

}  // namespace newer
