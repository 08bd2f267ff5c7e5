#include "newer/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "newer/error.hpp"

namespace newer {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string(), "cannot open for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

double parse_double(const std::string& text, const std::string& context) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw InputError(context + ": expected a number, got '" + text + "'");
    }
    return value;
}

json params_json(const WeibullParams& p) { return json{{"lambda", p.scale}, {"k", p.shape}}; }

WeibullParams params_from(const json& j) {
    return {j.at("lambda").get<double>(), j.at("k").get<double>()};
}

Cascade cascade_from(const json& j) {
    Cascade c;
    c.id = j.at("id").get<std::string>();
    for (const auto& e : j.at("events")) {
        Event ev;
        ev.user = e.at("u").get<std::string>();
        const auto& p = e.at("p");
        if (!p.is_null()) ev.parent = p.get<std::string>();
        ev.time = e.at("t").get<double>();
        c.events.push_back(std::move(ev));
    }
    return c;
}

json cascade_json(const Cascade& c) {
    json events = json::array();
    for (const Event& e : c.events) {
        events.push_back({{"u", e.user}, {"p", e.parent ? json(*e.parent) : json(nullptr)}, {"t", e.time}});
    }
    return json{{"id", c.id}, {"events", std::move(events)}};
}

template <class Fn>
auto with_json_errors(const std::string& context, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw InputError(context + ": " + e.what());
    }
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string(), "cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(path.string(), "cannot open for writing");
        out << text;
        if (!out.flush()) throw IoError(path.string(), "write failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError(path.string(), "cannot replace file: " + ec.message());
}

Network read_network(const fs::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0] != "follower,followee") {
        throw InputError(path.string() + ": expected header 'follower,followee'");
    }
    std::vector<std::string> nodes;
    std::vector<Network::Edge> edges;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv(lines[i]);
        if (fields.size() != 2 || fields[0].empty()) {
            throw InputError(where(path.string(), i + 1) + ": expected 'follower,followee'");
        }
        if (fields[1].empty()) {
            nodes.push_back(fields[0]);
        } else {
            edges.emplace_back(fields[0], fields[1]);
        }
    }
    return Network(std::move(nodes), edges);
}

void write_network(const fs::path& path, const Network& network) {
    std::string out = "follower,followee\n";
    for (const auto& [a, b] : network.edges()) {
        out += network.id(a) + "," + network.id(b) + "\n";
    }
    for (std::size_t i = 0; i < network.size(); ++i) {
        if (network.followers(i).empty() && network.followees(i).empty()) {
            out += network.id(i) + ",\n";
        }
    }
    write_text(path, out);
}

std::vector<Cascade> read_cascades(std::istream& in, const std::string& source) {
    std::vector<Cascade> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty() || line == "\r") continue;
        const std::string context = where(source, number);
        Cascade c = with_json_errors(context, [&] { return cascade_from(json::parse(line)); });
        c.validate();
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<Cascade> read_cascades(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string(), "cannot open for reading");
    return read_cascades(in, path.string());
}

void write_cascades(std::ostream& out, const std::vector<Cascade>& cascades) {
    for (const Cascade& c : cascades) out << cascade_json(c).dump() << '\n';
}

void write_cascades(const fs::path& path, const std::vector<Cascade>& cascades) {
    std::ostringstream out;
    write_cascades(out, cascades);
    write_text(path, out.str());
}

std::vector<SubcascadeSample> read_subcascades(const fs::path& path) {
    const auto lines = read_lines(path);
    std::vector<SubcascadeSample> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::string context = where(path.string(), i + 1);
        SubcascadeSample s = with_json_errors(context, [&] {
            const json j = json::parse(lines[i]);
            return SubcascadeSample{j.at("user").get<std::string>(), j.at("delays").get<std::vector<double>>()};
        });
        std::sort(s.delays.begin(), s.delays.end());
        out.push_back(std::move(s));
    }
    return out;
}

void write_subcascades(const fs::path& path, const std::vector<SubcascadeSample>& samples) {
    std::string out;
    for (const auto& s : samples) out += json{{"user", s.user}, {"delays", s.delays}}.dump() + "\n";
    write_text(path, out);
}

FeatureMatrix read_features(const fs::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw InputError(path.string() + ": empty feature file");
    auto header = split_csv(lines[0]);
    if (header.size() < 2 || header[0] != "user") {
        throw InputError(path.string() + ": header must start with 'user'");
    }
    std::vector<std::string> names(header.begin() + 1, header.end());
    std::vector<std::string> users;
    std::vector<double> values;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv(lines[i]);
        const std::string context = where(path.string(), i + 1);
        if (fields.size() != header.size()) throw InputError(context + ": wrong number of columns");
        users.push_back(fields[0]);
        for (std::size_t j = 1; j < fields.size(); ++j) values.push_back(parse_double(fields[j], context));
    }
    RowMatrix m(users.size(), names.size());
    m.data = std::move(values);
    return FeatureMatrix(std::move(names), std::move(users), std::move(m));
}

void write_features(const fs::path& path, const FeatureMatrix& features) {
    std::string out = "user";
    for (const auto& n : features.names()) out += "," + n;
    out += "\n";
    for (std::size_t r = 0; r < features.rows(); ++r) {
        out += features.users()[r];
        for (double v : features.row(r)) out += "," + format_double(v);
        out += "\n";
    }
    write_text(path, out);
}

std::string model_to_json(const NewerModel& model) {
    json users = json::array();
    for (const auto& u : model.users) {
        users.push_back({{"id", u.id}, {"lambda", u.params.scale}, {"k", u.params.shape}, {"n_events", u.n_events}});
    }
    json oos = params_json(model.out_of_sample_params);
    oos["mode"] = std::string(to_string(model.out_of_sample));
    const json j = {
        {"schema_version", kModelSchemaVersion},
        {"model", std::string(to_string(model.kind))},
        {"feature_names", model.feature_names},
        {"hyperparams",
         {{"mu", model.hyper.mu}, {"eta", model.hyper.eta},
          {"alpha_beta", model.hyper.alpha_beta}, {"alpha_gamma", model.hyper.alpha_gamma}}},
        {"beta", model.beta},
        {"gamma", model.gamma},
        {"users", std::move(users)},
        {"out_of_sample", std::move(oos)},
        {"fallback", params_json(model.fallback)},
    };
    return j.dump(1) + "\n";
}

NewerModel model_from_json(const std::string& text, const std::string& source) {
    NewerModel model = with_json_errors(source, [&] {
        const json j = json::parse(text);
        const int version = j.at("schema_version").get<int>();
        if (version != kModelSchemaVersion) {
            throw InputError(source + ": unsupported schema_version " + std::to_string(version));
        }
        NewerModel m;
        m.kind = parse_model_kind(j.at("model").get<std::string>());
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        const auto& h = j.at("hyperparams");
        m.hyper = {h.at("mu").get<double>(), h.at("eta").get<double>(), h.at("alpha_beta").get<double>(),
                   h.at("alpha_gamma").get<double>()};
        m.beta = j.at("beta").get<std::vector<double>>();
        m.gamma = j.at("gamma").get<std::vector<double>>();
        for (const auto& u : j.at("users")) {
            m.users.push_back({u.at("id").get<std::string>(), params_from(u), u.at("n_events").get<std::size_t>()});
        }
        const auto& oos = j.at("out_of_sample");
        m.out_of_sample = parse_out_of_sample_mode(oos.at("mode").get<std::string>());
        m.out_of_sample_params = params_from(oos);
        m.fallback = params_from(j.at("fallback"));
        return m;
    });
    std::sort(model.users.begin(), model.users.end(),
              [](const UserDynamics& a, const UserDynamics& b) { return a.id < b.id; });
    model.validate();
    return model;
}

void save_model(const fs::path& path, const NewerModel& model) { write_text(path, model_to_json(model)); }

NewerModel load_model(const fs::path& path) { return model_from_json(read_text(path), path.string()); }

void write_fit_report(const fs::path& path, const FitReport& report) {
    const json j = {{"converged", report.converged},
                    {"iterations", report.iterations},
                    {"objective", report.objective}};
    write_text(path, j.dump(1) + "\n");
}

std::string prediction_to_json(const PredictionLine& line) {
    json curve = json::array();
    for (const auto& [t, s] : line.curve) curve.push_back({t, s});
    const json j = {{"cascade", line.cascade},
                    {"t_limit", line.t_limit},
                    {"observed", line.observed},
                    {"final", line.final_size},
                    {"outbreak_t", line.outbreak_t ? json(*line.outbreak_t) : json(nullptr)},
                    {"curve", std::move(curve)},
                    {"fallback_users", line.fallback_users}};
    return j.dump();
}

std::vector<PredictionLine> read_predictions(const fs::path& path) {
    const auto lines = read_lines(path);
    std::vector<PredictionLine> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        out.push_back(with_json_errors(where(path.string(), i + 1), [&] {
            const json j = json::parse(lines[i]);
            PredictionLine p;
            p.cascade = j.at("cascade").get<std::string>();
            p.t_limit = j.at("t_limit").get<double>();
            p.observed = j.value("observed", std::size_t{0});
            p.final_size = j.at("final").get<double>();
            if (!j.at("outbreak_t").is_null()) p.outbreak_t = j.at("outbreak_t").get<double>();
            for (const auto& pt : j.at("curve")) p.curve.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
            if (j.contains("fallback_users")) p.fallback_users = j.at("fallback_users").get<std::vector<std::string>>();
            return p;
        }));
    }
    return out;
}

void write_predictions(const fs::path& path, const std::vector<PredictionLine>& lines) {
    std::string out;
    for (const auto& l : lines) out += prediction_to_json(l) + "\n";
    write_text(path, out);
}

SimConfig sim_config_from_json(const std::string& text, SimConfig cfg) {
    static const std::set<std::string> known = {
        "nodes", "degree", "cascades", "covariates", "covariate_sigma", "beta_star", "gamma_star",
        "explicit_params", "retweet_scale", "max_probability", "fixed_retweet_probability", "depth_decay",
        "virality_sigma",
        "horizon", "window", "min_root_followers", "max_cascade_size", "seed", "threads"};
    return with_json_errors("simulation config", [&] {
        const json j = json::parse(text);
        if (!j.is_object()) throw ConfigError("simulation config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (!known.contains(key)) throw ConfigError("unknown simulation config key '" + key + "'");
        }
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("nodes", cfg.nodes);
        if (j.contains("degree")) {
            const auto& d = j.at("degree");
            cfg.degree.exponent = d.value("exponent", cfg.degree.exponent);
            cfg.degree.min_degree = d.value("min", cfg.degree.min_degree);
            cfg.degree.max_degree = d.value("max", cfg.degree.max_degree);
        }
        get("cascades", cfg.cascades);
        get("covariates", cfg.covariates);
        get("covariate_sigma", cfg.covariate_sigma);
        get("beta_star", cfg.beta_star);
        get("gamma_star", cfg.gamma_star);
        if (j.contains("explicit_params")) {
            cfg.explicit_params.clear();
            for (const auto& p : j.at("explicit_params")) cfg.explicit_params.push_back(params_from(p));
        }
        get("retweet_scale", cfg.retweet_scale);
        get("max_probability", cfg.max_probability);
        if (j.contains("fixed_retweet_probability")) {
            const auto& p = j.at("fixed_retweet_probability");
            cfg.fixed_retweet_probability = p.is_null() ? std::nullopt : std::optional<double>(p.get<double>());
        }
        get("depth_decay", cfg.depth_decay);
        get("virality_sigma", cfg.virality_sigma);
        get("horizon", cfg.horizon);
        get("window", cfg.window);
        get("min_root_followers", cfg.min_root_followers);
        get("max_cascade_size", cfg.max_cascade_size);
        get("seed", cfg.seed);
        get("threads", cfg.threads);
        return cfg;
    });
}

std::string sim_config_to_json(const SimConfig& cfg) {
    json params = json::array();
    for (const auto& p : cfg.explicit_params) params.push_back(params_json(p));
    const json j = {
        {"nodes", cfg.nodes},
        {"degree", {{"exponent", cfg.degree.exponent}, {"min", cfg.degree.min_degree}, {"max", cfg.degree.max_degree}}},
        {"cascades", cfg.cascades},
        {"covariates", cfg.covariates},
        {"covariate_sigma", cfg.covariate_sigma},
        {"beta_star", cfg.beta_star},
        {"gamma_star", cfg.gamma_star},
        {"explicit_params", std::move(params)},
        {"retweet_scale", cfg.retweet_scale},
        {"max_probability", cfg.max_probability},
        {"fixed_retweet_probability",
         cfg.fixed_retweet_probability ? json(*cfg.fixed_retweet_probability) : json(nullptr)},
        {"depth_decay", cfg.depth_decay},
        {"virality_sigma", cfg.virality_sigma},
        {"horizon", cfg.horizon},
        {"window", cfg.window},
        {"min_root_followers", cfg.min_root_followers},
        {"max_cascade_size", cfg.max_cascade_size},
        {"seed", cfg.seed},
    };
    return j.dump(1) + "\n";
}

void write_truth(const fs::path& path, const Network& network, const GroundTruth& truth) {
    json users = json::array();
    for (std::size_t i = 0; i < network.size(); ++i) {
        users.push_back({{"id", network.id(i)},
                         {"lambda", truth.params[i].scale},
                         {"k", truth.params[i].shape},
                         {"p", truth.retweet_probability[i]}});
    }
    const json j = {{"feature_names", truth.features.names()},
                    {"beta", truth.beta},
                    {"gamma", truth.gamma},
                    {"users", std::move(users)}};
    write_text(path, j.dump(1) + "\n");
}

void write_size_histogram(const fs::path& path, const std::vector<Cascade>& cascades) {
    std::map<std::size_t, std::size_t> counts;
    for (const Cascade& c : cascades) ++counts[c.size()];
    std::string out = "size,count\n";
    for (const auto& [size, count] : counts) out += std::to_string(size) + "," + std::to_string(count) + "\n";
    write_text(path, out);
}

void write_report_csv(const fs::path& path, const ExperimentReport& report) {
    std::string out = "protocol,model,sweep,value,count,rmsle,precision\n";
    for (const auto& r : report.rows) {
        out += r.protocol + "," + r.model + "," + r.sweep + "," + format_double(r.sweep_value) + "," +
               std::to_string(r.count) + "," + format_double(r.rmsle) + "," + format_double(r.precision) + "\n";
    }
    write_text(path, out);
}

void write_report_json(const fs::path& path, const ExperimentReport& report) {
    json rows = json::array();
    std::map<std::string, std::pair<double, std::size_t>> mean_rmsle;
    for (const auto& r : report.rows) {
        rows.push_back({{"protocol", r.protocol}, {"model", r.model}, {"sweep", r.sweep},
                        {"value", r.sweep_value}, {"count", r.count}, {"rmsle", r.rmsle},
                        {"precision", r.precision}});
        auto& [sum, n] = mean_rmsle[r.model];
        sum += r.rmsle;
        ++n;
    }
    json summary = json::object();
    for (const auto& [model, acc] : mean_rmsle) summary[model] = {{"mean_rmsle", acc.first / static_cast<double>(acc.second)}};
    write_text(path, json{{"rows", std::move(rows)}, {"summary", std::move(summary)}}.dump(1) + "\n");
}

}  // namespace newer
