#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "proelm/hidden_layer.hpp"
#include "proelm/metrics.hpp"
#include "proelm/model_state.hpp"
#include "proelm/stream.hpp"
#include "proelm/types.hpp"

namespace proelm {

using Json = nlohmann::json;

// Hidden layers serialize as their generating recipe only; weights and biases
// are regenerated from the seed on load, never stored.
Json layer_to_json(const HiddenLayer<double>& layer);
HiddenLayer<double> layer_from_json(const Json& j);

// Matrices serialize as base64 of row-major little-endian doubles, so a
// save/load round trip is bit-exact.
Json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const Json& j);

Json model_to_json(const HiddenLayer<double>& layer, const ModelState<double>& state,
                   const Json& config = Json());

struct LoadedModel {
  HiddenLayer<double> layer;
  ModelState<double> state;
  Json config;
};

LoadedModel model_from_json(const Json& j);

void save_model(const std::filesystem::path& path, const HiddenLayer<double>& layer,
                const ModelState<double>& state, const Json& config = Json());
LoadedModel load_model(const std::filesystem::path& path);

Json plan_to_json(const StreamPlan& plan, const Json& config = Json());
StreamPlan plan_from_json(const Json& j);
void save_plan(const std::filesystem::path& path, const StreamPlan& plan,
               const Json& config = Json());
StreamPlan load_plan(const std::filesystem::path& path);

// Report JSON uses the performance-table field names:
// LIP, H, Acc, Pre, Rec, F1, T1, T2, plus LC and LD.
Json report_to_json(const MetricReport& report, const Json& config = Json());
MetricReport report_from_json(const Json& j);

// Learning-curve CSV: samples_seen, overall_hamming, then one column per
// tracked label index. The config travels in a leading comment line; a
// trailing "# error:" line marks a run that stopped early.
void write_curve_csv(std::ostream& out, const LearningCurve& curve,
                     const Json& config = Json(),
                     const std::optional<std::string>& error = std::nullopt);
void save_curve_csv(const std::filesystem::path& path, const LearningCurve& curve,
                    const Json& config = Json(),
                    const std::optional<std::string>& error = std::nullopt);

Json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace proelm
