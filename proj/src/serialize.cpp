#include "proelm/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "proelm/errors.hpp"

namespace proelm {

static_assert(std::endian::native == std::endian::little,
              "matrix codec assumes little-endian doubles");
static_assert(sizeof(double) == 8);

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= len; i += 3) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += kB64Alphabet[(v >> 6) & 63];
    out += kB64Alphabet[v & 63];
  }
  if (i + 1 == len) {
    std::uint32_t v = data[i] << 16;
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == len) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += kB64Alphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw ParseError("base64 payload length is not a multiple of 4");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      char c = text[i + k];
      if (c == '=') {
        if (i + 4 < text.size() || k < 2) throw ParseError("misplaced base64 padding");
        vals[k] = 0;
        ++pad;
      } else {
        if (pad > 0) throw ParseError("misplaced base64 padding");
        vals[k] = b64_value(c);
        if (vals[k] < 0) throw ParseError(std::string("invalid base64 character '") + c + "'");
      }
    }
    std::uint32_t v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<unsigned char>(v & 0xff));
  }
  return out;
}

const Json& require_field(const Json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end())
    throw ParseError(std::string(what) + " is missing required field \"" + key + "\"");
  return *it;
}

void require_format(const Json& j, const std::string& expected, const char* what) {
  const Json& tag = require_field(j, "format", what);
  if (!tag.is_string() || tag.get<std::string>() != expected)
    throw ParseError(std::string(what) + " has format tag " + tag.dump() + ", expected \"" +
                     expected + "\"");
}

std::vector<Index> index_vector(const Json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + " must be an array");
  std::vector<Index> out;
  out.reserve(j.size());
  for (const Json& v : j) {
    if (!v.is_number_integer()) throw ParseError(std::string(what) + " must hold integers");
    out.push_back(v.get<Index>());
  }
  return out;
}

}  // namespace

Json layer_to_json(const HiddenLayer<double>& layer) {
  return Json{{"input_dim", layer.input_dim()},
              {"hidden_dim", layer.hidden_dim()},
              {"activation", to_string(layer.activation())},
              {"seed", layer.seed()}};
}

HiddenLayer<double> layer_from_json(const Json& j) {
  const Json& act = require_field(j, "activation", "hidden layer");
  if (!act.is_string()) throw ParseError("hidden layer activation must be a string");
  return HiddenLayer<double>(require_field(j, "input_dim", "hidden layer").get<Index>(),
                             require_field(j, "hidden_dim", "hidden layer").get<Index>(),
                             parse_activation(act.get<std::string>()),
                             require_field(j, "seed", "hidden layer").get<Seed>());
}

Json matrix_to_json(const MatrixXd& m) {
  std::vector<unsigned char> bytes(static_cast<std::size_t>(m.size()) * sizeof(double));
  std::size_t pos = 0;
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) {
      double v = m(r, c);
      std::memcpy(bytes.data() + pos, &v, sizeof(double));
      pos += sizeof(double);
    }
  return Json{{"rows", m.rows()},
              {"cols", m.cols()},
              {"data", base64_encode(bytes.data(), bytes.size())}};
}

MatrixXd matrix_from_json(const Json& j) {
  Index rows = require_field(j, "rows", "matrix").get<Index>();
  Index cols = require_field(j, "cols", "matrix").get<Index>();
  if (rows < 0 || cols < 0) throw ParseError("matrix dimensions must be non-negative");
  std::vector<unsigned char> bytes =
      base64_decode(require_field(j, "data", "matrix").get<std::string>());
  std::size_t expected = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) *
                         sizeof(double);
  if (bytes.size() != expected)
    throw ParseError("matrix payload holds " + std::to_string(bytes.size()) +
                     " bytes, expected " + std::to_string(expected));
  MatrixXd m(rows, cols);
  std::size_t pos = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      double v;
      std::memcpy(&v, bytes.data() + pos, sizeof(double));
      m(r, c) = v;
      pos += sizeof(double);
    }
  return m;
}

Json model_to_json(const HiddenLayer<double>& layer, const ModelState<double>& state,
                   const Json& config) {
  Json labels = Json::array();
  for (Index i = 0; i < state.labels.count(); ++i) labels.push_back(state.labels.name(i));
  Json j{{"format", "proelm-model/1"},
         {"hidden_layer", layer_to_json(layer)},
         {"state",
          {{"beta", matrix_to_json(state.beta)},
           {"m_inv", matrix_to_json(state.m_inv)},
           {"hidden_sum", matrix_to_json(state.hidden_sum)},
           {"samples_seen", state.samples_seen},
           {"ridge", state.ridge},
           {"labels", labels}}}};
  if (!config.is_null()) j["config"] = config;
  return j;
}

LoadedModel model_from_json(const Json& j) {
  require_format(j, "proelm-model/1", "model file");
  const Json& s = require_field(j, "state", "model file");
  ModelState<double> state;
  state.beta = matrix_from_json(require_field(s, "beta", "model state"));
  state.m_inv = matrix_from_json(require_field(s, "m_inv", "model state"));
  MatrixXd hs = matrix_from_json(require_field(s, "hidden_sum", "model state"));
  if (hs.cols() != 1 && hs.size() != 0)
    throw ParseError("hidden_sum must be a single column");
  state.hidden_sum = hs.col(0);
  state.samples_seen = require_field(s, "samples_seen", "model state").get<long long>();
  state.ridge = require_field(s, "ridge", "model state").get<double>();
  for (const Json& name : require_field(s, "labels", "model state"))
    state.labels.append(name.get<std::string>());
  if (state.labels.count() != state.beta.cols())
    throw ParseError("model lists " + std::to_string(state.labels.count()) +
                     " labels but beta has " + std::to_string(state.beta.cols()) + " columns");
  LoadedModel loaded{layer_from_json(require_field(j, "hidden_layer", "model file")),
                     std::move(state), j.value("config", Json())};
  if (loaded.layer.hidden_dim() != loaded.state.beta.rows())
    throw ParseError("hidden layer size does not match beta rows");
  return loaded;
}

void save_model(const std::filesystem::path& path, const HiddenLayer<double>& layer,
                const ModelState<double>& state, const Json& config) {
  save_json_file(path, model_to_json(layer, state, config));
}

LoadedModel load_model(const std::filesystem::path& path) {
  return model_from_json(load_json_file(path));
}

Json plan_to_json(const StreamPlan& plan, const Json& config) {
  Json phases = Json::array();
  for (const StreamPhase& phase : plan.phases)
    phases.push_back(Json{{"introduced_labels", phase.introduced_labels},
                          {"samples", phase.samples}});
  Json j{{"format", "proelm-plan/1"},
         {"pattern", plan.pattern},
         {"label_order", plan.label_order},
         {"initial_block", plan.initial_block},
         {"phases", phases},
         {"chunk_size", plan.chunk_size},
         {"seed", plan.seed}};
  if (!config.is_null()) j["config"] = config;
  return j;
}

StreamPlan plan_from_json(const Json& j) {
  require_format(j, "proelm-plan/1", "plan file");
  StreamPlan plan;
  plan.pattern = index_vector(require_field(j, "pattern", "plan"), "pattern");
  plan.label_order = index_vector(require_field(j, "label_order", "plan"), "label_order");
  plan.initial_block = index_vector(require_field(j, "initial_block", "plan"), "initial_block");
  const Json& phases = require_field(j, "phases", "plan");
  if (!phases.is_array()) throw ParseError("plan phases must be an array");
  for (const Json& p : phases) {
    StreamPhase phase;
    phase.introduced_labels =
        index_vector(require_field(p, "introduced_labels", "phase"), "introduced_labels");
    phase.samples = index_vector(require_field(p, "samples", "phase"), "samples");
    plan.phases.push_back(std::move(phase));
  }
  plan.chunk_size = require_field(j, "chunk_size", "plan").get<Index>();
  plan.seed = require_field(j, "seed", "plan").get<Seed>();
  return plan;
}

void save_plan(const std::filesystem::path& path, const StreamPlan& plan, const Json& config) {
  save_json_file(path, plan_to_json(plan, config));
}

StreamPlan load_plan(const std::filesystem::path& path) {
  return plan_from_json(load_json_file(path));
}

namespace {

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

}  // namespace

Json report_to_json(const MetricReport& report, const Json& config) {
  Json j{{"format", "proelm-report/1"},
         {"LIP", report.lip},
         {"H", report.hamming},
         {"Acc", report.accuracy},
         {"Pre", report.precision},
         {"Rec", report.recall},
         {"F1", report.f1},
         {"T1", round3(report.train_time_s)},
         {"T2", round3(report.test_time_s)},
         {"LC", report.label_cardinality},
         {"LD", report.label_density}};
  if (!config.is_null()) j["config"] = config;
  return j;
}

MetricReport report_from_json(const Json& j) {
  require_format(j, "proelm-report/1", "report file");
  MetricReport r;
  r.lip = require_field(j, "LIP", "report").get<std::string>();
  r.hamming = require_field(j, "H", "report").get<double>();
  r.accuracy = require_field(j, "Acc", "report").get<double>();
  r.precision = require_field(j, "Pre", "report").get<double>();
  r.recall = require_field(j, "Rec", "report").get<double>();
  r.f1 = require_field(j, "F1", "report").get<double>();
  r.train_time_s = require_field(j, "T1", "report").get<double>();
  r.test_time_s = require_field(j, "T2", "report").get<double>();
  r.label_cardinality = require_field(j, "LC", "report").get<double>();
  r.label_density = require_field(j, "LD", "report").get<double>();
  return r;
}

void write_curve_csv(std::ostream& out, const LearningCurve& curve, const Json& config,
                     const std::optional<std::string>& error) {
  if (!config.is_null()) out << "# config: " << config.dump() << "\n";
  out << "samples_seen,overall_hamming";
  for (Index label : curve.tracked_labels) out << ",label_" << label;
  out << "\n";
  out << std::setprecision(17);
  for (const CurvePoint& point : curve.points) {
    out << point.samples_seen << "," << point.overall_hamming;
    for (double v : point.per_label) out << "," << v;
    out << "\n";
  }
  if (error) out << "# error: " << *error << "\n";
}

void save_curve_csv(const std::filesystem::path& path, const LearningCurve& curve,
                    const Json& config, const std::optional<std::string>& error) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_curve_csv(out, curve, config, error);
  if (!out) throw IoError("failed writing " + path.string());
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(path.string() + " is not valid JSON");
  return j;
}

void save_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace proelm
