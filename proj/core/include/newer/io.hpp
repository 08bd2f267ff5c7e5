#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "newer/eval.hpp"
#include "newer/fit.hpp"
#include "newer/network.hpp"
#include "newer/predict.hpp"
#include "newer/samples.hpp"
#include "newer/simulate.hpp"

namespace newer {

inline constexpr int kModelSchemaVersion = 1;

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// CSV "follower,followee". A row with an empty followee declares an
/// isolated node.
Network read_network(const std::filesystem::path& path);
void write_network(const std::filesystem::path& path, const Network& network);

/// JSONL {"id": str, "events": [{"u": str, "p": str|null, "t": seconds}]}.
std::vector<Cascade> read_cascades(std::istream& in, const std::string& source);
std::vector<Cascade> read_cascades(const std::filesystem::path& path);
void write_cascades(std::ostream& out, const std::vector<Cascade>& cascades);
void write_cascades(const std::filesystem::path& path, const std::vector<Cascade>& cascades);

/// JSONL {"user": id, "delays": [seconds, ...]}.
std::vector<SubcascadeSample> read_subcascades(const std::filesystem::path& path);
void write_subcascades(const std::filesystem::path& path, const std::vector<SubcascadeSample>& samples);

/// CSV with header "user,<feature names...>".
FeatureMatrix read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const FeatureMatrix& features);

std::string model_to_json(const NewerModel& model);
NewerModel model_from_json(const std::string& text, const std::string& source);
void save_model(const std::filesystem::path& path, const NewerModel& model);
NewerModel load_model(const std::filesystem::path& path);

void write_fit_report(const std::filesystem::path& path, const FitReport& report);

/// One line of the prediction output.
struct PredictionLine {
    std::string cascade;
    double t_limit = 0.0;
    std::size_t observed = 0;
    double final_size = 0.0;
    std::optional<double> outbreak_t;
    std::vector<std::pair<double, double>> curve;
    std::vector<std::string> fallback_users;
};

std::string prediction_to_json(const PredictionLine& line);
std::vector<PredictionLine> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, const std::vector<PredictionLine>& lines);

/// Missing keys keep their defaults; unknown keys throw ConfigError.
SimConfig sim_config_from_json(const std::string& text, SimConfig base = {});
std::string sim_config_to_json(const SimConfig& cfg);

/// {"beta": [...], "gamma": [...], "users": [{"id", "lambda", "k", "p"}]}.
void write_truth(const std::filesystem::path& path, const Network& network, const GroundTruth& truth);

/// "size,count" rows in increasing size.
void write_size_histogram(const std::filesystem::path& path, const std::vector<Cascade>& cascades);

/// "protocol,model,sweep,value,count,rmsle,precision" rows.
void write_report_csv(const std::filesystem::path& path, const ExperimentReport& report);
void write_report_json(const std::filesystem::path& path, const ExperimentReport& report);

std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory, then renames.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace newer
