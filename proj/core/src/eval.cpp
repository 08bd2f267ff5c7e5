#include "newer/eval.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "newer/error.hpp"
#include "newer/features.hpp"
#include "newer/parallel.hpp"
#include "newer/random.hpp"

namespace newer {

namespace {

constexpr std::string_view kLogLinear = "loglinear";

void require_sigma(double sigma) {
    if (!(sigma > 0.0 && sigma < 1.0)) {
        throw InputError("sigma must lie in (0, 1)");
    }
}

bool within(double truth, double predicted, double sigma) {
    return truth * (1.0 - sigma) <= predicted && predicted <= truth * (1.0 + sigma);
}

// Type-7 sample quantile of a sorted vector.
double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::size_t top_percent(std::size_t participants) {
    return (participants + 99) / 100;
}

// Records for one (model, sweep value) cell, kept per fold so the merge
// order is fixed.
struct Cell {
    std::vector<PredictionRecord> records;
    std::vector<double> precisions;  // per-cascade process precision
};

using CellKey = std::pair<std::string, std::size_t>;  // (model, sweep index)

struct FoldOutput {
    std::map<CellKey, Cell> cells;
};

std::vector<std::string> model_names(const ExperimentConfig& cfg) {
    std::vector<std::string> names;
    for (ModelKind k : cfg.models) names.emplace_back(to_string(k));
    if (cfg.loglinear) names.emplace_back(kLogLinear);
    return names;
}

std::vector<Cascade> select(std::span<const Cascade> cascades, const std::vector<std::size_t>& fold,
                            std::size_t f, bool in_fold) {
    std::vector<Cascade> out;
    for (std::size_t i = 0; i < cascades.size(); ++i) {
        if ((fold[i] == f) == in_fold) out.push_back(cascades[i]);
    }
    return out;
}

std::vector<DynamicsTable> fit_tables(const ExperimentConfig& cfg,
                                      std::span<const SubcascadeSample> samples,
                                      const FeatureMatrix& features) {
    if (samples.empty()) {
        throw InputError("no training users with enough events");
    }
    SolverOptions solver = cfg.solver;
    solver.threads = 1;
    std::vector<DynamicsTable> tables;
    for (ModelKind kind : cfg.models) {
        const FitResult fit = fit_model(kind, samples, features, cfg.hyper, solver);
        tables.push_back(DynamicsTable::from_model(fit.model, &features));
    }
    return tables;
}

void size_fold(const ExperimentConfig& cfg, const Network& network,
               std::span<const Cascade> train, std::span<const Cascade> test,
               const std::vector<DynamicsTable>& tables, FoldOutput& out) {
    const std::size_t n = network.size();
    for (std::size_t si = 0; si < cfg.prefixes.size(); ++si) {
        const std::size_t s = cfg.prefixes[si];
        for (const Cascade& c : test) {
            if (c.size() <= s) continue;
            const PartialCascade pc = observe_first(c, s, n);
            for (std::size_t m = 0; m < tables.size(); ++m) {
                const double pred = predict_final_size(pc, tables[m]);
                out.cells[{std::string(to_string(cfg.models[m])), si}].records.push_back(
                    {c.id, static_cast<double>(c.size()), pred, Task::size});
            }
        }
        if (!cfg.loglinear) continue;
        std::vector<std::vector<double>> rows;
        std::vector<double> sizes;
        for (const Cascade& c : train) {
            if (c.size() <= s) continue;
            rows.push_back(loglinear_features(observe_first(c, s, n), network));
            sizes.push_back(static_cast<double>(c.size()));
        }
        if (rows.empty()) continue;
        const LogLinearModel model = LogLinearModel::fit(rows, sizes);
        for (const Cascade& c : test) {
            if (c.size() <= s) continue;
            const double pred = model.predict(loglinear_features(observe_first(c, s, n), network));
            out.cells[{std::string(kLogLinear), si}].records.push_back(
                {c.id, static_cast<double>(c.size()), pred, Task::size});
        }
    }
}

void outbreak_fold(const ExperimentConfig& cfg, std::span<const Cascade> test,
                   const std::vector<DynamicsTable>& tables, std::size_t network_size,
                   FoldOutput& out) {
    const auto needed = static_cast<std::size_t>(std::ceil(cfg.outbreak_threshold));
    OutbreakOptions options;
    options.max_horizon = cfg.outbreak_horizon;
    for (std::size_t si = 0; si < cfg.prefixes.size(); ++si) {
        const std::size_t s = cfg.prefixes[si];
        for (const Cascade& c : test) {
            if (c.size() <= s || c.size() < needed || s >= needed) continue;
            const double root = c.root().time;
            const double truth = c.events[needed - 1].time - root + kDelayShift;
            const PartialCascade pc = observe_first(c, s, network_size);
            for (std::size_t m = 0; m < tables.size(); ++m) {
                const auto t = predict_outbreak_time(pc, tables[m], cfg.outbreak_threshold, options);
                const double end = t ? *t : pc.t_limit + cfg.outbreak_horizon;
                out.cells[{std::string(to_string(cfg.models[m])), si}].records.push_back(
                    {c.id, truth, end - root + kDelayShift, Task::outbreak});
            }
        }
    }
}

void process_fold(const ExperimentConfig& cfg, std::span<const Cascade> test,
                  const std::vector<DynamicsTable>& tables, std::size_t network_size,
                  FoldOutput& out) {
    const std::size_t g = std::max<std::size_t>(cfg.grid_points, 2);
    for (std::size_t fi = 0; fi < cfg.fractions.size(); ++fi) {
        for (const Cascade& c : test) {
            const double root = c.root().time;
            const double duration = c.events.back().time - root;
            if (!(duration > 0.0)) continue;
            const double t_limit = root + cfg.fractions[fi] * duration;
            const PartialCascade pc = observe_until(c, t_limit, network_size);
            std::vector<double> grid(g);
            for (std::size_t j = 0; j < g; ++j) {
                grid[j] = j + 1 == g ? root + duration
                                     : t_limit + (root + duration - t_limit) * static_cast<double>(j) /
                                                     static_cast<double>(g - 1);
            }
            const ProcessCurve truth = true_process(c, grid);
            for (std::size_t m = 0; m < tables.size(); ++m) {
                const ProcessCurve pred = predict_process(pc, tables[m], grid);
                Cell& cell = out.cells[{std::string(to_string(cfg.models[m])), fi}];
                for (std::size_t j = 0; j < g; ++j) {
                    cell.records.push_back({c.id, truth.points[j].second, pred.points[j].second,
                                            Task::process_point});
                }
                cell.precisions.push_back(process_precision(pred, truth, cfg.sigma));
            }
        }
    }
}

}  // namespace

std::string_view to_string(Task task) {
    switch (task) {
        case Task::size: return "size";
        case Task::outbreak: return "outbreak";
        case Task::process_point: return "process-point";
    }
    return "unknown";
}

double rmsle(std::span<const PredictionRecord> records) {
    if (records.empty()) {
        throw InputError("rmsle needs at least one record");
    }
    double sum = 0.0;
    for (const auto& r : records) {
        if (!(r.truth > 0.0) || !(r.predicted > 0.0)) {
            throw InputError("rmsle: cascade '" + r.cascade + "' has a nonpositive value");
        }
        const double d = std::log(r.predicted) - std::log(r.truth);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(records.size()));
}

double sigma_precision(std::span<const PredictionRecord> records, double sigma) {
    require_sigma(sigma);
    if (records.empty()) {
        throw InputError("precision needs at least one record");
    }
    std::size_t hits = 0;
    for (const auto& r : records) {
        if (within(r.truth, r.predicted, sigma)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

double process_precision(const ProcessCurve& predicted, const ProcessCurve& truth, double sigma) {
    require_sigma(sigma);
    if (predicted.points.size() != truth.points.size() || truth.points.empty()) {
        throw InputError("process curves must share a nonempty grid");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.points.size(); ++i) {
        if (predicted.points[i].first != truth.points[i].first) {
            throw InputError("process curves must share a grid");
        }
        if (within(truth.points[i].second, predicted.points[i].second, sigma)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.points.size());
}

ProcessCurve true_process(const Cascade& cascade, std::span<const double> grid) {
    std::vector<double> times;
    times.reserve(cascade.events.size());
    for (const Event& e : cascade.events) times.push_back(e.time);
    ProcessCurve curve;
    for (double t : grid) {
        const auto count = std::upper_bound(times.begin(), times.end(), t) - times.begin();
        curve.points.emplace_back(t, static_cast<double>(count));
    }
    return curve;
}

DominanceReport dominance_report(std::span<const Cascade> cascades) {
    DominanceReport report;
    std::map<std::string, std::size_t> pooled;
    std::size_t pooled_children = 0;
    for (const Cascade& c : cascades) {
        c.validate();
        CascadeDominance d;
        d.cascade = c.id;
        std::map<std::string, std::size_t> children;
        std::unordered_map<std::string, double> joined;
        for (const Event& e : c.events) {
            joined.emplace(e.user, e.time);
            pooled.try_emplace(e.user, 0);
            if (e.parent) {
                ++children[*e.parent];
                ++pooled[*e.parent];
            }
        }
        const double total = static_cast<double>(c.size() - 1);
        pooled_children += c.size() - 1;
        for (const auto& [user, count] : children) {
            d.shares.emplace_back(user, static_cast<double>(count) / total);
        }
        std::stable_sort(d.shares.begin(), d.shares.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        double running = 0.0;
        for (const auto& [user, share] : d.shares) {
            running += share;
            d.cumulative.push_back(running);
        }
        const std::size_t top = std::min(top_percent(c.size()), d.shares.size());
        d.top_percent_share = top == 0 ? 0.0 : d.cumulative[top - 1];

        std::vector<double> joins;
        const double root = c.root().time;
        const double span = c.events.back().time - root;
        for (std::size_t i = 0; i < d.shares.size(); ++i) {
            const double rel = span > 0.0 ? (joined[d.shares[i].first] - root) / span : 0.0;
            joins.push_back(rel);
            // Half of all children, with slack for rounding in the running sum.
            if (d.cumulative[i] >= 0.5 - 1e-12) {
                d.half_set = i + 1;
                break;
            }
        }
        std::sort(joins.begin(), joins.end());
        d.join_quantiles = {quantile(joins, 0.25), quantile(joins, 0.5), quantile(joins, 0.75)};
        report.cascades.push_back(std::move(d));
    }
    report.participants = pooled.size();
    std::vector<std::size_t> counts;
    for (const auto& [user, count] : pooled) counts.push_back(count);
    std::sort(counts.rbegin(), counts.rend());
    const std::size_t top = std::min(top_percent(counts.size()), counts.size());
    const std::size_t top_children = std::accumulate(counts.begin(), counts.begin() + top, std::size_t{0});
    report.pooled_top_percent_share =
        pooled_children == 0 ? 0.0 : static_cast<double>(top_children) / static_cast<double>(pooled_children);
    return report;
}

std::vector<double> loglinear_features(const PartialCascade& pc, const Network& network) {
    const Cascade& c = pc.observed;
    const double n = static_cast<double>(c.size());
    const double elapsed = pc.t_limit - c.root().time + kDelayShift;
    auto followers = [&](const std::string& user) {
        const auto idx = network.index_of(user);
        return idx ? static_cast<double>(network.followers(*idx).size()) : 0.0;
    };
    std::unordered_map<std::string, std::size_t> depth;
    double depth_sum = 0.0;
    double max_depth = 0.0;
    double follower_sum = 0.0;
    for (const Event& e : c.events) {
        const std::size_t d = e.parent ? depth.at(*e.parent) + 1 : 0;
        depth.emplace(e.user, d);
        depth_sum += static_cast<double>(d);
        max_depth = std::max(max_depth, static_cast<double>(d));
        follower_sum += followers(e.user);
    }
    return {std::log(n),
            std::log(n / elapsed),
            std::log1p(followers(c.root().user)),
            std::log1p(follower_sum / n),
            max_depth,
            depth_sum / n};
}

LogLinearModel LogLinearModel::fit(std::span<const std::vector<double>> rows,
                                   std::span<const double> sizes) {
    if (rows.empty() || rows.size() != sizes.size()) {
        throw InputError("log-linear fit needs matching nonempty rows and sizes");
    }
    const auto p = static_cast<Eigen::Index>(rows.front().size() + 1);
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), p);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        a(r, 0) = 1.0;
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            a(r, static_cast<Eigen::Index>(j + 1)) = rows[i][j];
        }
        y(r) = std::log(sizes[i]);
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y);
    LogLinearModel model;
    model.coef_.assign(coef.data(), coef.data() + coef.size());
    return model;
}

double LogLinearModel::predict(std::span<const double> row) const {
    if (row.size() + 1 != coef_.size()) {
        throw InputError("log-linear row has the wrong length");
    }
    double z = coef_[0];
    for (std::size_t j = 0; j < row.size(); ++j) z += coef_[j + 1] * row[j];
    return std::exp(z);
}

std::string_view to_string(Protocol protocol) {
    switch (protocol) {
        case Protocol::size: return "size";
        case Protocol::outbreak: return "outbreak";
        case Protocol::process: return "process";
        case Protocol::out_of_sample: return "out_of_sample";
    }
    return "unknown";
}

Protocol parse_protocol(std::string_view name) {
    if (name == "size") return Protocol::size;
    if (name == "outbreak") return Protocol::outbreak;
    if (name == "process") return Protocol::process;
    if (name == "out_of_sample" || name == "out-of-sample") return Protocol::out_of_sample;
    throw ConfigError("unknown protocol '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
    if (models.empty() && !loglinear) throw ConfigError("no models to evaluate");
    if (folds < 2) throw ConfigError("folds must be at least 2");
    if (prefixes.empty() && protocol != Protocol::process) throw ConfigError("no prefixes given");
    for (std::size_t s : prefixes) {
        if (s < 1) throw ConfigError("prefixes must be positive");
    }
    for (double f : fractions) {
        if (!(f > 0.0 && f < 1.0)) throw ConfigError("fractions must lie in (0, 1)");
    }
    if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("sigma must lie in (0, 1)");
    if (!(outbreak_threshold >= 1.0)) throw ConfigError("outbreak threshold must be at least 1");
    if (!(hidden_fraction > 0.0 && hidden_fraction < 1.0)) {
        throw ConfigError("hidden fraction must lie in (0, 1)");
    }
    hyper.validate();
}

const MetricRow* ExperimentReport::find(std::string_view model, double sweep_value) const {
    for (const auto& row : rows) {
        if (row.model == model && row.sweep_value == sweep_value) return &row;
    }
    return nullptr;
}

std::vector<std::size_t> stratified_folds(std::span<const Cascade> cascades, std::size_t folds,
                                          std::uint64_t seed) {
    if (folds < 1) throw ConfigError("folds must be positive");
    const std::size_t n = cascades.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (cascades[a].size() != cascades[b].size()) return cascades[a].size() < cascades[b].size();
        return cascades[a].id < cascades[b].id;
    });
    Rng rng(seed);
    std::vector<std::size_t> fold(n);
    std::size_t dealt = 0;
    for (std::size_t decile = 0; decile < 10; ++decile) {
        const std::size_t begin = decile * n / 10;
        const std::size_t end = (decile + 1) * n / 10;
        for (std::size_t i = end; i > begin + 1; --i) {
            std::swap(order[i - 1], order[begin + rng.below(i - begin)]);
        }
        for (std::size_t i = begin; i < end; ++i) fold[order[i]] = dealt++ % folds;
    }
    return fold;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const Network& network,
                                std::span<const Cascade> cascades, const FeatureMatrix& features) {
    cfg.validate();
    const std::vector<Cascade> data = filter_cascades(cascades, cfg.min_cascade_size);
    const std::size_t n = network.size();
    const std::vector<std::string> names = model_names(cfg);

    std::vector<FoldOutput> outputs;
    std::string sweep = "prefix";
    std::vector<double> sweep_values(cfg.prefixes.begin(), cfg.prefixes.end());

    if (cfg.protocol == Protocol::out_of_sample) {
        const std::vector<SubcascadeSample> all =
            select_training_samples(extract_subcascades(data), cfg.min_user_events);
        std::vector<std::size_t> order(all.size());
        std::iota(order.begin(), order.end(), 0);
        Rng rng(mix_seed(cfg.seed, 0));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        const auto hidden_count = static_cast<std::size_t>(
            std::ceil(cfg.hidden_fraction * static_cast<double>(all.size())));
        std::unordered_set<std::string> hidden;
        for (std::size_t i = 0; i < hidden_count && i < order.size(); ++i) hidden.insert(all[order[i]].user);
        std::vector<SubcascadeSample> visible;
        for (const auto& s : all) {
            if (!hidden.contains(s.user)) visible.push_back(s);
        }
        std::vector<Cascade> test;
        for (const Cascade& c : data) {
            if (hidden.contains(c.root().user)) test.push_back(c);
        }
        if (test.empty()) throw InputError("no cascade is rooted at a hidden user");
        ExperimentConfig survival_only = cfg;
        survival_only.loglinear = false;
        outputs.resize(1);
        size_fold(survival_only, network, {}, test, fit_tables(cfg, visible, features), outputs[0]);
    } else {
        if (data.size() < cfg.folds) {
            throw InputError("insufficient cascades for " + std::to_string(cfg.folds) + " folds");
        }
        const std::vector<std::size_t> fold = stratified_folds(data, cfg.folds, mix_seed(cfg.seed, 1));
        outputs.resize(cfg.folds);
        parallel_for(cfg.folds, cfg.threads, [&](std::size_t f) {
            const std::vector<Cascade> train = select(data, fold, f, false);
            const std::vector<Cascade> test = select(data, fold, f, true);
            if (train.empty() || test.empty()) {
                throw InputError("fold " + std::to_string(f) + " has no training or test cascades");
            }
            const auto samples = select_training_samples(extract_subcascades(train), cfg.min_user_events);
            const auto tables = fit_tables(cfg, samples, features);
            switch (cfg.protocol) {
                case Protocol::size: size_fold(cfg, network, train, test, tables, outputs[f]); break;
                case Protocol::outbreak: outbreak_fold(cfg, test, tables, n, outputs[f]); break;
                case Protocol::process: process_fold(cfg, test, tables, n, outputs[f]); break;
                case Protocol::out_of_sample: break;
            }
        });
        if (cfg.protocol == Protocol::process) {
            sweep = "fraction";
            sweep_values = cfg.fractions;
        }
    }

    ExperimentReport report;
    for (const std::string& model : names) {
        for (std::size_t si = 0; si < sweep_values.size(); ++si) {
            Cell merged;
            for (const FoldOutput& out : outputs) {
                const auto it = out.cells.find({model, si});
                if (it == out.cells.end()) continue;
                merged.records.insert(merged.records.end(), it->second.records.begin(),
                                      it->second.records.end());
                merged.precisions.insert(merged.precisions.end(), it->second.precisions.begin(),
                                         it->second.precisions.end());
            }
            if (merged.records.empty()) continue;
            MetricRow row{std::string(to_string(cfg.protocol)), model, sweep, sweep_values[si],
                          merged.records.size(), rmsle(merged.records), 0.0};
            if (merged.precisions.empty()) {
                row.precision = sigma_precision(merged.records, cfg.sigma);
            } else {
                row.count = merged.precisions.size();
                row.precision = std::accumulate(merged.precisions.begin(), merged.precisions.end(), 0.0) /
                                static_cast<double>(merged.precisions.size());
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

}  // namespace newer
