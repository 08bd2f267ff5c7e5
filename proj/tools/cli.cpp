#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <ostream>

#include "newer/error.hpp"
#include "newer/eval.hpp"
#include "newer/features.hpp"
#include "newer/fit.hpp"
#include "newer/io.hpp"
#include "newer/parallel.hpp"
#include "newer/predict.hpp"
#include "newer/sampling.hpp"
#include "newer/simulate.hpp"

namespace newer::cli {

namespace fs = std::filesystem;

namespace {

struct SimulateArgs {
    fs::path out;
    std::string config;
    std::optional<std::size_t> nodes;
    std::optional<std::size_t> cascades;
    std::optional<std::uint64_t> seed;
};

struct FitArgs {
    fs::path network, cascades, features, out, report, warm_start, subcascades_out;
    std::string model = "newer";
    Hyperparams hyper;
    std::size_t min_cascade_size = kDefaultMinCascadeSize;
    std::size_t min_events = 2;
    double tolerance = 1e-7;
    int max_iterations = 200;
};

struct PredictArgs {
    fs::path model, cascades, features, network, out;
    std::size_t network_size = 0;
    std::string task = "size";
    std::string mode = "basic";
    std::string te = "inf";
    double epsilon = 0.1;
    double threshold = 1000.0;
    double horizon = 30.0 * 86400.0;
    std::size_t observe_first = 0;
    double observe_for = -1.0;
    std::size_t grid_points = 20;
    double grid_span = 86400.0;
    bool no_fallback = false;
};

struct EvaluateArgs {
    fs::path predictions, cascades, out;
    double sigma = 0.2;
    double threshold = 1000.0;
    double horizon = 30.0 * 86400.0;
    bool dominance = false;
};

struct ExperimentArgs {
    fs::path network, cascades, features, out;
    std::string protocol = "size";
    std::vector<std::string> models = {"newer", "exponential", "rayleigh", "cox"};
    std::vector<std::size_t> prefixes = {5, 10, 25};
    std::vector<double> fractions = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
    std::size_t folds = 10;
    std::size_t min_cascade_size = kDefaultMinCascadeSize;
    std::size_t min_events = 2;
    double sigma = 0.2;
    double threshold = 1000.0;
    Hyperparams hyper;
    std::uint64_t seed = 1;
};

void add_hyper(CLI::App* cmd, Hyperparams& h) {
    cmd->add_option("--mu", h.mu, "Weight of the scale regression term")->capture_default_str();
    cmd->add_option("--eta", h.eta, "Weight of the shape regression term")->capture_default_str();
    cmd->add_option("--alpha-beta", h.alpha_beta, "L1 weight on beta")->capture_default_str();
    cmd->add_option("--alpha-gamma", h.alpha_gamma, "L1 weight on gamma")->capture_default_str();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError(dir.string(), "cannot create output directory");
}

int cmd_simulate(const SimulateArgs& a, unsigned threads, std::ostream& out) {
    SimConfig cfg;
    if (!a.config.empty()) cfg = sim_config_from_json(read_text(a.config));
    if (a.nodes) cfg.nodes = *a.nodes;
    if (a.cascades) cfg.cascades = *a.cascades;
    if (a.seed) cfg.seed = *a.seed;
    cfg.threads = threads;
    cfg.validate();
    ensure_dir(a.out);
    const SimOutput sim = simulate(cfg);
    write_network(a.out / "network.csv", sim.network);
    write_cascades(a.out / "cascades.jsonl", sim.cascades);
    write_truth(a.out / "truth.json", sim.network, sim.truth);
    write_features(a.out / "features.csv", sim.truth.features);
    write_size_histogram(a.out / "size_histogram.csv", sim.cascades);
    write_text(a.out / "sim_config.json", sim_config_to_json(cfg));
    out << "simulated " << sim.cascades.size() << " cascades on " << sim.network.size() << " nodes\n";
    return kExitOk;
}

FeatureMatrix load_or_extract_features(const fs::path& features, const fs::path& network,
                                       const std::vector<Cascade>& cascades) {
    if (!features.empty()) return read_features(features);
    if (network.empty()) throw ConfigError("either --features or --network is required");
    return extract_features(read_network(network), cascades);
}

int cmd_fit(const FitArgs& a, unsigned threads, std::ostream& out) {
    const ModelKind kind = parse_model_kind(a.model);
    a.hyper.validate();
    const std::vector<Cascade> all = read_cascades(a.cascades);
    const std::vector<Cascade> cascades = filter_cascades(all, a.min_cascade_size);
    const FeatureMatrix features = load_or_extract_features(a.features, a.network, all);
    const auto raw = extract_subcascades(cascades);
    if (!a.subcascades_out.empty()) write_subcascades(a.subcascades_out, raw);
    const auto samples = select_training_samples(raw, a.min_events);
    if (samples.empty()) throw InputError("no user has enough events to fit");

    SolverOptions solver;
    solver.tolerance = a.tolerance;
    solver.max_iterations = a.max_iterations;
    solver.threads = threads;
    std::optional<NewerModel> warm;
    if (!a.warm_start.empty()) warm = load_model(a.warm_start);
    const FitResult fit = fit_model(kind, samples, features, a.hyper, solver, warm ? &*warm : nullptr);

    save_model(a.out, fit.model);
    fs::path report = a.report;
    if (report.empty()) {
        report = a.out;
        report.replace_extension(".report.json");
    }
    write_fit_report(report, fit.report);
    out << "fitted " << fit.model.users.size() << " users, objective " << fit.report.objective.back()
        << (fit.report.converged ? "" : " (not converged)") << "\n";
    return kExitOk;
}

double parse_te(const std::string& te) {
    if (te == "now") return 0.0;
    if (te == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(te, &used);
        if (used == te.size() && v >= 0.0) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("--te must be 'now', 'inf' or nonnegative seconds past t_limit");
}

double sampling_size(const PartialCascade& pc, const DynamicsTable& table, double horizon, double epsilon) {
    SamplingOptions options;
    options.epsilon = epsilon;
    options.network_size = pc.network_size;
    options.horizon = horizon;
    SamplingPredictor predictor(options, table);
    for (const Event& e : pc.observed.events) predictor.feed_event(e);
    return predictor.query_size(pc.t_limit);
}

int cmd_predict(const PredictArgs& a, unsigned threads, std::ostream& out, std::ostream& err) {
    if (a.task != "size" && a.task != "outbreak" && a.task != "process") {
        throw ConfigError("--task must be size, outbreak or process");
    }
    if (a.mode != "basic" && a.mode != "sampling") throw ConfigError("--mode must be basic or sampling");
    if (a.mode == "sampling" && !(a.epsilon > 0.0)) throw ConfigError("--epsilon must be positive");
    if (!(a.threshold >= 1.0)) throw ConfigError("--threshold must be at least 1");
    const double te = parse_te(a.te);

    const NewerModel model = load_model(a.model);
    std::optional<FeatureMatrix> features;
    if (!a.features.empty()) features = read_features(a.features);
    const DynamicsTable table = DynamicsTable::from_model(model, features ? &*features : nullptr, !a.no_fallback);
    std::size_t network_size = a.network_size;
    if (!a.network.empty()) network_size = read_network(a.network).size();
    if (network_size < 1) throw ConfigError("--network or --network-size is required");

    const std::vector<Cascade> cascades = read_cascades(a.cascades);
    std::vector<PredictionLine> lines(cascades.size());
    parallel_for(cascades.size(), threads, [&](std::size_t i) {
        const Cascade& c = cascades[i];
        PartialCascade pc;
        if (a.observe_first > 0) {
            pc = observe_first(c, a.observe_first, network_size);
        } else if (a.observe_for >= 0.0) {
            pc = observe_until(c, c.root().time + a.observe_for, network_size);
        } else {
            pc = PartialCascade{c, c.events.back().time, network_size};
        }
        const BasicPredictor basic(pc, table);
        PredictionLine& line = lines[i];
        line.cascade = c.id;
        line.t_limit = pc.t_limit;
        line.observed = pc.observed.size();
        line.fallback_users = basic.fallback_users();
        const double horizon = pc.t_limit + te;
        line.final_size = a.mode == "sampling" ? sampling_size(pc, table, horizon, a.epsilon)
                                               : basic.size_at(horizon);
        if (a.task == "outbreak") {
            OutbreakOptions options;
            options.max_horizon = a.horizon;
            line.outbreak_t = predict_outbreak_time(pc, table, a.threshold, options);
        } else if (a.task == "process") {
            const std::size_t g = std::max<std::size_t>(a.grid_points, 1);
            for (std::size_t j = 0; j < g; ++j) {
                const double t = pc.t_limit + (g == 1 ? 0.0 : a.grid_span * static_cast<double>(j) /
                                                                  static_cast<double>(g - 1));
                const double size = a.mode == "sampling" ? sampling_size(pc, table, t, a.epsilon)
                                                         : basic.size_at(t);
                line.curve.emplace_back(t, size);
            }
        }
    });
    for (const auto& line : lines) {
        if (!line.fallback_users.empty()) {
            err << "warning: cascade '" << line.cascade << "': " << line.fallback_users.size()
                << " user(s) without dynamics used fallback parameters\n";
        }
    }
    write_predictions(a.out, lines);
    out << "wrote " << lines.size() << " predictions\n";
    return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    if (!(a.sigma > 0.0 && a.sigma < 1.0)) throw ConfigError("--sigma must lie in (0, 1)");
    const auto predictions = read_predictions(a.predictions);
    const auto cascades = read_cascades(a.cascades);
    std::map<std::string, const Cascade*> truth;
    for (const Cascade& c : cascades) truth.emplace(c.id, &c);

    std::vector<PredictionRecord> sizes, outbreaks, points;
    std::vector<double> process;
    const auto needed = static_cast<std::size_t>(std::ceil(a.threshold));
    for (const auto& p : predictions) {
        const auto it = truth.find(p.cascade);
        if (it == truth.end()) throw InputError("prediction for unknown cascade '" + p.cascade + "'");
        const Cascade& c = *it->second;
        sizes.push_back({p.cascade, static_cast<double>(c.size()), p.final_size, Task::size});
        if (p.outbreak_t && c.size() >= needed) {
            const double root = c.root().time;
            outbreaks.push_back({p.cascade, c.events[needed - 1].time - root + kDelayShift,
                                 *p.outbreak_t - root + kDelayShift, Task::outbreak});
        }
        if (!p.curve.empty()) {
            std::vector<double> grid;
            ProcessCurve predicted;
            for (const auto& pt : p.curve) {
                grid.push_back(pt.first);
                predicted.points.push_back(pt);
            }
            const ProcessCurve actual = true_process(c, grid);
            process.push_back(process_precision(predicted, actual, a.sigma));
            for (std::size_t j = 0; j < grid.size(); ++j) {
                points.push_back({p.cascade, actual.points[j].second, predicted.points[j].second,
                                  Task::process_point});
            }
        }
    }
    if (sizes.empty()) throw InputError("no predictions to evaluate");

    ensure_dir(a.out);
    std::string csv = "task,count,rmsle,precision\n";
    nlohmann::ordered_json summary;
    auto emit = [&](const std::string& task, const std::vector<PredictionRecord>& records,
                    std::optional<double> precision) {
        if (records.empty()) return;
        const double r = rmsle(records);
        const double prec = precision ? *precision : sigma_precision(records, a.sigma);
        csv += task + "," + std::to_string(records.size()) + "," + format_double(r) + "," +
               format_double(prec) + "\n";
        summary[task] = {{"count", records.size()}, {"rmsle", r}, {"precision", prec}};
    };
    emit("size", sizes, std::nullopt);
    emit("outbreak", outbreaks, std::nullopt);
    if (!process.empty()) {
        double mean = 0.0;
        for (double v : process) mean += v;
        emit("process", points, mean / static_cast<double>(process.size()));
    }
    summary["sigma"] = a.sigma;
    write_text(a.out / "metrics.csv", csv);
    write_text(a.out / "summary.json", summary.dump(1) + "\n");

    if (a.dominance) {
        const DominanceReport d = dominance_report(cascades);
        nlohmann::ordered_json j;
        j["pooled_top_percent_share"] = d.pooled_top_percent_share;
        j["participants"] = d.participants;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& c : d.cascades) {
            rows.push_back({{"cascade", c.cascade}, {"top_percent_share", c.top_percent_share},
                            {"half_set", c.half_set}, {"join_quantiles", c.join_quantiles}});
        }
        j["cascades"] = std::move(rows);
        write_text(a.out / "dominance.json", j.dump(1) + "\n");
    }
    out << "evaluated " << sizes.size() << " predictions\n";
    return kExitOk;
}

int cmd_experiment(const ExperimentArgs& a, unsigned threads, std::ostream& out) {
    ExperimentConfig cfg;
    cfg.protocol = parse_protocol(a.protocol);
    cfg.models.clear();
    cfg.loglinear = false;
    for (const auto& m : a.models) {
        if (m == "loglinear" || m == "log-linear") {
            cfg.loglinear = true;
        } else {
            cfg.models.push_back(parse_model_kind(m));
        }
    }
    cfg.prefixes = a.prefixes;
    cfg.fractions = a.fractions;
    cfg.folds = a.folds;
    cfg.min_cascade_size = a.min_cascade_size;
    cfg.min_user_events = a.min_events;
    cfg.sigma = a.sigma;
    cfg.outbreak_threshold = a.threshold;
    cfg.hyper = a.hyper;
    cfg.seed = a.seed;
    cfg.threads = threads;
    cfg.validate();

    const Network network = read_network(a.network);
    const auto cascades = read_cascades(a.cascades);
    const FeatureMatrix features = a.features.empty() ? extract_features(network, cascades)
                                                      : read_features(a.features);
    const ExperimentReport report = run_experiment(cfg, network, cascades, features);
    ensure_dir(a.out);
    write_report_csv(a.out / "report.csv", report);
    write_report_json(a.out / "report.json", report);
    out << "wrote " << report.rows.size() << " report rows\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weibull cascade dynamics: simulate, fit, predict, evaluate"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML file with defaults for any flag");
    unsigned threads = 1;
    app.add_option("--threads", threads, "Worker threads")->envname("NEWER_THREADS")->check(CLI::PositiveNumber);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic network and cascades");
    simulate_cmd->add_option("--out", sim.out, "Output directory")->required();
    simulate_cmd->add_option("--sim-config", sim.config, "Simulation config JSON")->check(CLI::ExistingFile);
    simulate_cmd->add_option("--nodes", sim.nodes, "Node count");
    simulate_cmd->add_option("--cascades", sim.cascades, "Cascade count");
    simulate_cmd->add_option("--seed", sim.seed, "Random seed");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit per-user dynamics");
    fit_cmd->add_option("--cascades", fit.cascades, "Cascade JSONL")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--network", fit.network, "Network CSV")->check(CLI::ExistingFile);
    fit_cmd->add_option("--features", fit.features, "Feature CSV")->check(CLI::ExistingFile);
    fit_cmd->add_option("--model", fit.model, "newer, exponential, rayleigh, cox or weibull")->capture_default_str();
    fit_cmd->add_option("--out", fit.out, "Model JSON")->required();
    fit_cmd->add_option("--report", fit.report, "Fit report JSON");
    fit_cmd->add_option("--warm-start", fit.warm_start, "Model JSON to start from")->check(CLI::ExistingFile);
    fit_cmd->add_option("--subcascades-out", fit.subcascades_out, "Write extracted subcascades JSONL");
    fit_cmd->add_option("--min-cascade-size", fit.min_cascade_size)->capture_default_str();
    fit_cmd->add_option("--min-events", fit.min_events, "Minimum delays per fitted user")->capture_default_str();
    fit_cmd->add_option("--tolerance", fit.tolerance)->capture_default_str();
    fit_cmd->add_option("--max-iterations", fit.max_iterations)->capture_default_str();
    add_hyper(fit_cmd, fit.hyper);

    PredictArgs pred;
    auto* predict_cmd = app.add_subcommand("predict", "Predict cascade growth from observed prefixes");
    predict_cmd->add_option("--model", pred.model, "Model JSON")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--cascades", pred.cascades, "Cascade JSONL")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--features", pred.features, "Feature CSV")->check(CLI::ExistingFile);
    predict_cmd->add_option("--network", pred.network, "Network CSV (sets |V|)")->check(CLI::ExistingFile);
    predict_cmd->add_option("--network-size", pred.network_size, "|V| when no network is given");
    predict_cmd->add_option("--out", pred.out, "Prediction JSONL")->required();
    predict_cmd->add_option("--task", pred.task, "size, outbreak or process")->capture_default_str();
    predict_cmd->add_option("--mode", pred.mode, "basic or sampling")->capture_default_str();
    predict_cmd->add_option("--te", pred.te, "now, inf, or seconds past t_limit")->capture_default_str();
    predict_cmd->add_option("--epsilon", pred.epsilon)->capture_default_str();
    predict_cmd->add_option("--threshold", pred.threshold, "Outbreak size")->capture_default_str();
    predict_cmd->add_option("--horizon", pred.horizon, "Outbreak search window, seconds")->capture_default_str();
    predict_cmd->add_option("--observe-first", pred.observe_first, "Observe the first N events");
    predict_cmd->add_option("--observe-for", pred.observe_for, "Observe this many seconds after the root");
    predict_cmd->add_option("--grid-points", pred.grid_points)->capture_default_str();
    predict_cmd->add_option("--grid-span", pred.grid_span, "Process curve length, seconds")->capture_default_str();
    predict_cmd->add_flag("--no-fallback", pred.no_fallback, "Fail on users without dynamics");

    EvaluateArgs eval;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against full cascades");
    evaluate_cmd->add_option("--predictions", eval.predictions)->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--cascades", eval.cascades, "Full cascade JSONL")->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--out", eval.out, "Output directory")->required();
    evaluate_cmd->add_option("--sigma", eval.sigma)->capture_default_str();
    evaluate_cmd->add_option("--threshold", eval.threshold, "Outbreak size")->capture_default_str();
    evaluate_cmd->add_flag("--dominance", eval.dominance, "Also write dominance.json");

    ExperimentArgs exp;
    auto* experiment_cmd = app.add_subcommand("experiment", "Cross-validated model comparison");
    experiment_cmd->add_option("--network", exp.network)->required()->check(CLI::ExistingFile);
    experiment_cmd->add_option("--cascades", exp.cascades)->required()->check(CLI::ExistingFile);
    experiment_cmd->add_option("--features", exp.features)->check(CLI::ExistingFile);
    experiment_cmd->add_option("--out", exp.out, "Output directory")->required();
    experiment_cmd->add_option("--protocol", exp.protocol, "size, outbreak, process or out_of_sample")->capture_default_str();
    experiment_cmd->add_option("--models", exp.models)->capture_default_str();
    experiment_cmd->add_option("--prefixes", exp.prefixes)->capture_default_str();
    experiment_cmd->add_option("--fractions", exp.fractions)->capture_default_str();
    experiment_cmd->add_option("--folds", exp.folds)->capture_default_str();
    experiment_cmd->add_option("--min-cascade-size", exp.min_cascade_size)->capture_default_str();
    experiment_cmd->add_option("--min-events", exp.min_events)->capture_default_str();
    experiment_cmd->add_option("--sigma", exp.sigma)->capture_default_str();
    experiment_cmd->add_option("--threshold", exp.threshold)->capture_default_str();
    experiment_cmd->add_option("--seed", exp.seed)->capture_default_str();
    add_hyper(experiment_cmd, exp.hyper);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate_cmd) return cmd_simulate(sim, threads, out);
        if (*fit_cmd) return cmd_fit(fit, threads, out);
        if (*predict_cmd) return cmd_predict(pred, threads, out, err);
        if (*evaluate_cmd) return cmd_evaluate(eval, out);
        if (*experiment_cmd) return cmd_experiment(exp, threads, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace newer::cli
