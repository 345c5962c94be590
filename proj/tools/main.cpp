#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "proelm/dataset.hpp"
#include "proelm/errors.hpp"
#include "proelm/evaluation.hpp"
#include "proelm/prediction.hpp"
#include "proelm/serialize.hpp"
#include "proelm/stream.hpp"
#include "proelm/training.hpp"

namespace fs = std::filesystem;
using proelm::Index;
using proelm::Json;

namespace {

struct CliConfig {
  std::string command;
  std::string data;
  std::string format;
  std::vector<std::string> labels;
  Index trailing_labels = -1;
  Index hidden = 0;
  std::string activation = "sigmoid";
  proelm::Seed seed = 0;
  double ridge = 0.0;
  Index init_block = 0;
  Index chunk = 1;
  std::string pattern;
  std::string mode = "history-exact";
  double threshold = 0.0;
  Index folds = 10;
  double train_fraction = 0.8;
  std::vector<Index> candidates;
  std::string model_path;
  std::string plan_path;
  std::string out = ".";
};

std::vector<Index> parse_pattern(const std::string& text) {
  if (text.empty()) throw proelm::InvalidPatternError("pattern must be nonempty");
  std::vector<Index> pattern;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = std::min(text.find('+', pos), text.size());
    const std::string token = text.substr(pos, next - pos);
    Index value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || value < 1)
      throw proelm::InvalidPatternError("pattern token '" + token +
                                        "' is not a positive integer");
    pattern.push_back(value);
    pos = next + 1;
  }
  return pattern;
}

std::string resolve_format(const CliConfig& cfg) {
  if (!cfg.format.empty()) return cfg.format;
  const std::string ext = fs::path(cfg.data).extension().string();
  if (ext == ".csv") return "csv";
  if (ext == ".arff") return "arff";
  throw proelm::InvalidArgumentError("cannot infer dataset format from '" + cfg.data +
                                     "'; pass --format csv|arff");
}

proelm::Dataset load_dataset(const CliConfig& cfg, bool require_labels) {
  if (cfg.data.empty()) throw proelm::InvalidArgumentError("--data is required");
  if (!fs::exists(cfg.data)) throw proelm::IoError("dataset file not found: " + cfg.data);
  const bool has_names = !cfg.labels.empty();
  const bool has_trailing = cfg.trailing_labels >= 0;
  if (require_labels && !has_names && !has_trailing)
    throw proelm::InvalidArgumentError("specify label columns via --labels or --trailing-labels");

  const std::string format = resolve_format(cfg);
  if (format == "csv") {
    proelm::LabelSelector sel = has_names
                                    ? proelm::LabelSelector::by_names(cfg.labels)
                                    : proelm::LabelSelector::by_trailing(
                                          has_trailing ? cfg.trailing_labels : 0);
    return proelm::parse_csv(cfg.data, sel);
  }
  if (format == "arff") {
    std::vector<std::string> names = cfg.labels;
    if (!has_names) {
      const Index k = has_trailing ? cfg.trailing_labels : 0;
      const std::vector<std::string> all = proelm::arff_attribute_names(cfg.data);
      if (k > static_cast<Index>(all.size()))
        throw proelm::InvalidArgumentError("--trailing-labels exceeds attribute count");
      names.assign(all.end() - k, all.end());
    }
    return proelm::parse_arff(cfg.data, names);
  }
  throw proelm::InvalidArgumentError("unknown format '" + format + "'; use csv or arff");
}

Json config_json(const CliConfig& cfg) {
  Json j{{"command", cfg.command},
         {"seed", cfg.seed},
         {"ridge", cfg.ridge},
         {"threshold", cfg.threshold},
         {"out", cfg.out}};
  if (!cfg.data.empty()) {
    j["data"] = cfg.data;
    j["format"] = resolve_format(cfg);
  }
  if (!cfg.labels.empty()) j["labels"] = cfg.labels;
  if (cfg.trailing_labels >= 0) j["trailing_labels"] = cfg.trailing_labels;
  if (cfg.hidden > 0) j["hidden"] = cfg.hidden;
  j["activation"] = cfg.activation;
  if (!cfg.pattern.empty()) j["pattern"] = cfg.pattern;
  if (cfg.command == "stream" || cfg.command == "crossval") {
    j["mode"] = cfg.mode;
    j["chunk"] = cfg.chunk;
    j["init_block"] =
        cfg.init_block > 0 ? cfg.init_block : proelm::default_initial_block(cfg.hidden);
  }
  if (cfg.command == "crossval") j["folds"] = cfg.folds;
  if (cfg.command == "train" || cfg.command == "stream" || cfg.command == "tune")
    j["train_fraction"] = cfg.train_fraction;
  if (!cfg.candidates.empty()) j["candidates"] = cfg.candidates;
  if (!cfg.model_path.empty()) j["model"] = cfg.model_path;
  if (!cfg.plan_path.empty()) j["plan"] = cfg.plan_path;
  return j;
}

fs::path ensure_out_dir(const CliConfig& cfg) {
  fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw proelm::IoError("cannot create output directory " + dir.string());
  return dir;
}

void require_hidden(const CliConfig& cfg) {
  if (cfg.hidden < 1) throw proelm::InvalidArgumentError("--hidden must be at least 1");
}

double seconds_between(std::chrono::steady_clock::time_point a,
                       std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

int cmd_train(const CliConfig& cfg) {
  require_hidden(cfg);
  const proelm::Dataset ds = load_dataset(cfg, true);
  const Json config = config_json(cfg);
  const auto split = proelm::split_train_test(ds, cfg.train_fraction, cfg.seed);
  const proelm::HiddenLayer<double> layer(ds.feature_count(), cfg.hidden,
                                          proelm::parse_activation(cfg.activation), cfg.seed);

  const auto t0 = std::chrono::steady_clock::now();
  const proelm::MatrixXd h = proelm::hidden_map(layer, split.train.features);
  const proelm::ModelState<double> state =
      proelm::init_batch(h, split.train.targets, cfg.ridge,
                         proelm::LabelRegistry(ds.label_names));
  const auto t1 = std::chrono::steady_clock::now();

  proelm::MetricReport report =
      proelm::evaluate_model(state, layer, split.test, cfg.threshold);
  report.train_time_s = seconds_between(t0, t1);
  report.lip = std::to_string(ds.label_count());

  const fs::path dir = ensure_out_dir(cfg);
  const Json report_json = proelm::report_to_json(report, config);
  proelm::save_json_file(dir / "report.json", report_json);
  proelm::save_model(dir / "model.json", layer, state, config);
  std::cout << report_json.dump(2) << "\n";
  return 0;
}

int cmd_stream(const CliConfig& cfg) {
  require_hidden(cfg);
  if (cfg.pattern.empty()) throw proelm::InvalidArgumentError("--pattern is required");
  const proelm::Dataset ds = load_dataset(cfg, true);
  const Json config = config_json(cfg);
  const std::vector<Index> pattern = parse_pattern(cfg.pattern);
  const auto split = proelm::split_train_test(ds, cfg.train_fraction, cfg.seed);

  const Index n0 =
      cfg.init_block > 0 ? cfg.init_block : proelm::default_initial_block(cfg.hidden);
  const proelm::StreamPlan plan =
      proelm::build_stream_plan(split.train, pattern, n0, cfg.chunk, cfg.seed);
  const proelm::HiddenLayer<double> layer(ds.feature_count(), cfg.hidden,
                                          proelm::parse_activation(cfg.activation), cfg.seed);

  const fs::path dir = ensure_out_dir(cfg);
  proelm::save_plan(dir / "plan.json", plan, config);

  proelm::StreamOptions options;
  options.threshold = cfg.threshold;
  options.eval = &split.test;
  proelm::StreamResult run;
  try {
    run = proelm::run_stream(split.train, plan, layer, cfg.ridge,
                             proelm::parse_expansion_mode(cfg.mode), options);
  } catch (const proelm::StreamRunError& e) {
    proelm::save_curve_csv(dir / "curve.csv", e.partial_curve(), config, e.what());
    throw;
  }

  proelm::MetricReport report =
      proelm::evaluate_model(run.state, layer, split.test, cfg.threshold);
  report.train_time_s = run.train_time_s;
  report.lip = proelm::pattern_to_string(pattern);

  proelm::save_curve_csv(dir / "curve.csv", run.curve, config);
  proelm::save_model(dir / "model.json", layer, run.state, config);
  const Json report_json = proelm::report_to_json(report, config);
  proelm::save_json_file(dir / "report.json", report_json);
  std::cout << report_json.dump(2) << "\n";
  return 0;
}

int cmd_crossval(const CliConfig& cfg) {
  require_hidden(cfg);
  if (cfg.pattern.empty()) throw proelm::InvalidArgumentError("--pattern is required");
  const proelm::Dataset ds = load_dataset(cfg, true);
  const Json config = config_json(cfg);

  proelm::StreamRunConfig run_config;
  run_config.pattern = parse_pattern(cfg.pattern);
  run_config.hidden_dim = cfg.hidden;
  run_config.activation = proelm::parse_activation(cfg.activation);
  run_config.seed = cfg.seed;
  run_config.ridge = cfg.ridge;
  run_config.initial_block = cfg.init_block;
  run_config.chunk_size = cfg.chunk;
  run_config.mode = proelm::parse_expansion_mode(cfg.mode);
  run_config.threshold = cfg.threshold;
  run_config.folds = cfg.folds;

  const proelm::CrossvalResult result = proelm::crossval_stream(ds, run_config);

  Json report_json = proelm::report_to_json(result.mean, config);
  Json stddev = proelm::report_to_json(result.stddev);
  stddev.erase("format");
  report_json["stddev"] = stddev;
  Json folds = Json::array();
  for (const proelm::MetricReport& r : result.fold_reports) {
    Json fold = proelm::report_to_json(r);
    fold.erase("format");
    folds.push_back(fold);
  }
  report_json["folds"] = folds;

  const fs::path dir = ensure_out_dir(cfg);
  proelm::save_json_file(dir / "report.json", report_json);
  std::cout << report_json.dump(2) << "\n";
  return 0;
}

int cmd_tune(const CliConfig& cfg) {
  if (cfg.candidates.empty())
    throw proelm::InvalidArgumentError("--candidates is required, e.g. --candidates 10,20,40");
  const proelm::Dataset ds = load_dataset(cfg, true);
  const Json config = config_json(cfg);

  const proelm::TuneResult result = proelm::tune_hidden(
      ds, cfg.candidates, cfg.train_fraction, proelm::parse_activation(cfg.activation),
      cfg.seed, cfg.ridge, cfg.threshold);

  const fs::path dir = ensure_out_dir(cfg);
  std::ofstream csv(dir / "tune.csv");
  if (!csv) throw proelm::IoError("cannot open " + (dir / "tune.csv").string());
  csv << "hidden_dim,train_hamming,train_accuracy,val_hamming,val_accuracy,status\n";
  Json rows = Json::array();
  for (const proelm::TuneRow& row : result.rows) {
    if (row.singular) {
      csv << row.hidden_dim << ",,,,,singular-matrix\n";
      rows.push_back(Json{{"hidden_dim", row.hidden_dim},
                          {"status", "singular-matrix"},
                          {"error", row.error}});
    } else {
      csv << row.hidden_dim << "," << row.train_hamming << "," << row.train_accuracy << ","
          << row.val_hamming << "," << row.val_accuracy << ",ok\n";
      rows.push_back(Json{{"hidden_dim", row.hidden_dim},
                          {"status", "ok"},
                          {"train_hamming", row.train_hamming},
                          {"train_accuracy", row.train_accuracy},
                          {"val_hamming", row.val_hamming},
                          {"val_accuracy", row.val_accuracy}});
    }
  }
  Json summary{{"format", "proelm-tune/1"}, {"rows", rows}, {"config", config}};
  if (result.recommended > 0) summary["recommended"] = result.recommended;
  proelm::save_json_file(dir / "tune.json", summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_predict(const CliConfig& cfg) {
  if (cfg.model_path.empty()) throw proelm::InvalidArgumentError("--model is required");
  if (!fs::exists(cfg.model_path))
    throw proelm::IoError("model file not found: " + cfg.model_path);
  const proelm::LoadedModel model = proelm::load_model(cfg.model_path);
  const proelm::Dataset ds = load_dataset(cfg, false);
  const Json config = config_json(cfg);

  const proelm::PredictionBatch<double> batch =
      proelm::predict(model.state, model.layer, ds.features, cfg.threshold);

  const fs::path dir = ensure_out_dir(cfg);
  std::ofstream csv(dir / "predictions.csv");
  if (!csv) throw proelm::IoError("cannot open " + (dir / "predictions.csv").string());
  csv << "sample";
  for (Index i = 0; i < model.state.labels.count(); ++i)
    csv << "," << model.state.labels.name(i);
  csv << "\n";
  for (Index r = 0; r < batch.bipolar.rows(); ++r) {
    csv << r;
    for (Index c = 0; c < batch.bipolar.cols(); ++c)
      csv << "," << static_cast<int>(batch.bipolar(r, c));
    csv << "\n";
  }

  Json summary{{"samples", batch.bipolar.rows()},
               {"labels", batch.bipolar.cols()},
               {"threshold", cfg.threshold}};
  if (ds.label_count() > 0) {
    proelm::MetricReport report =
        proelm::evaluate_model(model.state, model.layer, ds, cfg.threshold);
    report.lip = std::to_string(model.state.labels.count());
    const Json report_json = proelm::report_to_json(report, config);
    proelm::save_json_file(dir / "report.json", report_json);
    summary["report"] = report_json;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_inspect(const CliConfig& cfg) {
  if (!cfg.model_path.empty()) {
    const proelm::LoadedModel model = proelm::load_model(cfg.model_path);
    Json labels = Json::array();
    for (Index i = 0; i < model.state.labels.count(); ++i)
      labels.push_back(model.state.labels.name(i));
    Json j{{"kind", "model"},
           {"hidden_layer", proelm::layer_to_json(model.layer)},
           {"labels", labels},
           {"samples_seen", model.state.samples_seen},
           {"ridge", model.state.ridge}};
    if (!model.config.is_null()) j["config"] = model.config;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  if (!cfg.plan_path.empty()) {
    const proelm::StreamPlan plan = proelm::load_plan(cfg.plan_path);
    Json phases = Json::array();
    for (const proelm::StreamPhase& phase : plan.phases)
      phases.push_back(Json{{"introduced_labels", phase.introduced_labels},
                            {"samples", phase.samples.size()}});
    Json j{{"kind", "plan"},
           {"pattern", proelm::pattern_to_string(plan.pattern)},
           {"label_order", plan.label_order},
           {"initial_block", plan.initial_block.size()},
           {"chunk_size", plan.chunk_size},
           {"seed", plan.seed},
           {"phases", phases}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  throw proelm::InvalidArgumentError("inspect needs --model or --plan");
}

int exit_code_for(const std::string& kind) {
  static const std::set<std::string> config_kinds = {
      "io", "parse", "invalid-pattern", "infeasible", "invalid-argument", "config"};
  return config_kinds.count(kind) ? 2 : 1;
}

void emit_error(const std::string& kind, const std::string& message) {
  Json j{{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CliConfig cfg;
  CLI::App app{"Progressive multi-label ELM: train, stream, and evaluate"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--data", cfg.data, "dataset file");
    cmd->add_option("--format", cfg.format, "dataset format: csv or arff")
        ->check(CLI::IsMember({"csv", "arff"}));
    auto* labels = cmd->add_option("--labels", cfg.labels, "label column names")
                       ->delimiter(',');
    cmd->add_option("--trailing-labels", cfg.trailing_labels,
                    "number of trailing columns that are labels")
        ->excludes(labels);
    cmd->add_option("--activation", cfg.activation, "sigmoid, tanh, or radial-basis");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--ridge", cfg.ridge, "ridge regularization strength");
    cmd->add_option("--threshold", cfg.threshold, "bipolar decision threshold");
    cmd->add_option("--out", cfg.out, "output directory");
    return cmd;
  };

  CLI::App* train = add_common(app.add_subcommand("train", "batch-train and evaluate"));
  train->add_option("--hidden", cfg.hidden, "hidden layer width");
  train->add_option("--train-fraction", cfg.train_fraction, "train split fraction");

  CLI::App* stream = add_common(app.add_subcommand("stream", "streaming run with label introduction"));
  stream->add_option("--hidden", cfg.hidden, "hidden layer width");
  stream->add_option("--train-fraction", cfg.train_fraction, "train split fraction");
  stream->add_option("--pattern", cfg.pattern, "label introduction pattern, e.g. 39+2+2+1+1");
  stream->add_option("--mode", cfg.mode, "expansion mode")
      ->check(CLI::IsMember({"history-exact", "paper-literal"}));
  stream->add_option("--init-block", cfg.init_block, "initial block size");
  stream->add_option("--chunk", cfg.chunk, "chunk size");

  CLI::App* crossval = add_common(app.add_subcommand("crossval", "k-fold cross-validation"));
  crossval->add_option("--hidden", cfg.hidden, "hidden layer width");
  crossval->add_option("--pattern", cfg.pattern, "label introduction pattern");
  crossval->add_option("--mode", cfg.mode, "expansion mode")
      ->check(CLI::IsMember({"history-exact", "paper-literal"}));
  crossval->add_option("--init-block", cfg.init_block, "initial block size");
  crossval->add_option("--chunk", cfg.chunk, "chunk size");
  crossval->add_option("--folds", cfg.folds, "fold count");

  CLI::App* tune = add_common(app.add_subcommand("tune", "sweep hidden layer widths"));
  tune->add_option("--candidates", cfg.candidates, "hidden widths to try")->delimiter(',');
  tune->add_option("--train-fraction", cfg.train_fraction, "train split fraction");

  CLI::App* predict = add_common(app.add_subcommand("predict", "predict with a saved model"));
  predict->add_option("--model", cfg.model_path, "model file");

  CLI::App* inspect = app.add_subcommand("inspect", "describe a saved model or plan");
  inspect->add_option("--model", cfg.model_path, "model file");
  inspect->add_option("--plan", cfg.plan_path, "plan file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("config", e.what());
    return 2;
  }

  try {
    if (train->parsed()) return (cfg.command = "train", cmd_train(cfg));
    if (stream->parsed()) return (cfg.command = "stream", cmd_stream(cfg));
    if (crossval->parsed()) return (cfg.command = "crossval", cmd_crossval(cfg));
    if (tune->parsed()) return (cfg.command = "tune", cmd_tune(cfg));
    if (predict->parsed()) return (cfg.command = "predict", cmd_predict(cfg));
    if (inspect->parsed()) return (cfg.command = "inspect", cmd_inspect(cfg));
  } catch (const proelm::Error& e) {
    emit_error(e.kind(), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
  return 0;
}
