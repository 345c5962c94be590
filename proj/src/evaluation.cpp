#include "proelm/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "proelm/errors.hpp"
#include "proelm/prediction.hpp"

namespace proelm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<Index> shuffled_indices(Index count, Seed seed) {
  std::vector<Index> idx(static_cast<std::size_t>(count));
  std::iota(idx.begin(), idx.end(), Index(0));
  std::mt19937 gen(static_cast<std::mt19937::result_type>(seed));
  std::shuffle(idx.begin(), idx.end(), gen);
  return idx;
}

}  // namespace

Index default_initial_block(Index hidden_dim) {
  return (12 * hidden_dim + 9) / 10;
}

std::string pattern_to_string(const std::vector<Index>& pattern) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (i > 0) out += '+';
    out += std::to_string(pattern[i]);
  }
  return out;
}

Dataset subset(const Dataset& ds, const std::vector<Index>& rows) {
  for (Index r : rows)
    if (r < 0 || r >= ds.sample_count())
      throw InvalidArgumentError("subset: row " + std::to_string(r) + " out of range [0, " +
                                 std::to_string(ds.sample_count()) + ")");
  Dataset out;
  out.features = ds.features(rows, Eigen::all);
  out.targets = ds.targets(rows, Eigen::all);
  out.label_names = ds.label_names;
  out.feature_names = ds.feature_names;
  return out;
}

TrainTestSplit split_train_test(const Dataset& ds, double train_fraction, Seed seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgumentError("train fraction must lie in (0, 1), got " +
                               std::to_string(train_fraction));
  const Index n = ds.sample_count();
  if (n < 2) throw InvalidArgumentError("cannot split a dataset with fewer than 2 samples");
  Index train_count = static_cast<Index>(std::ceil(train_fraction * static_cast<double>(n)));
  train_count = std::clamp(train_count, Index(1), n - 1);

  std::vector<Index> idx = shuffled_indices(n, seed);
  TrainTestSplit split;
  split.train_indices.assign(idx.begin(), idx.begin() + train_count);
  split.test_indices.assign(idx.begin() + train_count, idx.end());
  split.train = subset(ds, split.train_indices);
  split.test = subset(ds, split.test_indices);
  return split;
}

std::vector<std::vector<Index>> make_folds(Index sample_count, Index fold_count, Seed seed) {
  if (fold_count < 2) throw InvalidArgumentError("fold count must be at least 2");
  if (fold_count > sample_count)
    throw InvalidArgumentError("fold count " + std::to_string(fold_count) +
                               " exceeds sample count " + std::to_string(sample_count));
  std::vector<Index> idx = shuffled_indices(sample_count, seed);
  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(fold_count));
  const Index base = sample_count / fold_count;
  const Index extra = sample_count % fold_count;
  Index pos = 0;
  for (Index f = 0; f < fold_count; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    folds[static_cast<std::size_t>(f)].assign(idx.begin() + pos, idx.begin() + pos + size);
    pos += size;
  }
  return folds;
}

MetricReport evaluate_model(const ModelState<double>& state, const HiddenLayer<double>& layer,
                            const Dataset& ds, double threshold) {
  std::unordered_map<std::string, Index> column_of;
  for (std::size_t c = 0; c < ds.label_names.size(); ++c)
    column_of.emplace(ds.label_names[c], static_cast<Index>(c));

  auto t0 = Clock::now();
  MatrixXd bipolar = apply_threshold(predict_raw(state, layer, ds.features), threshold);
  const double test_seconds = seconds_since(t0);

  MatrixXd pred = MatrixXd::Constant(ds.sample_count(), ds.label_count(), -1.0);
  for (Index i = 0; i < state.labels.count(); ++i) {
    auto it = column_of.find(state.labels.name(i));
    if (it != column_of.end()) pred.col(it->second) = bipolar.col(i);
  }

  const ExampleMetrics ex = example_based_metrics(pred, ds.targets);
  const LabelStats stats = label_stats(ds.targets);

  MetricReport report;
  report.hamming = hamming_loss(pred, ds.targets);
  report.accuracy = ex.accuracy;
  report.precision = ex.precision;
  report.recall = ex.recall;
  report.f1 = ex.f1;
  report.label_cardinality = stats.cardinality;
  report.label_density = stats.density;
  report.test_time_s = test_seconds;
  return report;
}

CrossvalResult crossval_stream(const Dataset& ds, const StreamRunConfig& config) {
  if (config.hidden_dim < 1) throw InvalidArgumentError("hidden width must be at least 1");
  if (config.folds < 2) throw InvalidArgumentError("fold count must be at least 2");
  if (config.folds > ds.sample_count())
    throw InvalidArgumentError("fold count " + std::to_string(config.folds) +
                               " exceeds sample count " + std::to_string(ds.sample_count()));

  const std::vector<std::vector<Index>> folds =
      make_folds(ds.sample_count(), config.folds, config.seed);
  const std::string lip = pattern_to_string(config.pattern);

  CrossvalResult result;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<Index> train_rows;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    const Dataset train = subset(ds, train_rows);
    const Dataset test = subset(ds, folds[f]);

    const Seed fold_seed = config.seed + static_cast<Seed>(f);
    const Index n0 = config.initial_block > 0 ? config.initial_block
                                              : default_initial_block(config.hidden_dim);
    const StreamPlan plan =
        build_stream_plan(train, config.pattern, n0, config.chunk_size, fold_seed);
    const HiddenLayer<double> layer(train.feature_count(), config.hidden_dim,
                                    config.activation, fold_seed);

    StreamOptions options;
    options.record_curve = false;
    options.threshold = config.threshold;
    StreamResult run = run_stream(train, plan, layer, config.ridge, config.mode, options);

    MetricReport report = evaluate_model(run.state, layer, test, config.threshold);
    report.lip = lip;
    report.train_time_s = run.train_time_s;
    result.fold_reports.push_back(report);
  }

  const double n = static_cast<double>(result.fold_reports.size());
  auto aggregate = [&](auto field) {
    double sum = 0;
    for (const MetricReport& r : result.fold_reports) sum += r.*field;
    return sum / n;
  };
  auto spread = [&](auto field, double mean) {
    if (result.fold_reports.size() < 2) return 0.0;
    double ss = 0;
    for (const MetricReport& r : result.fold_reports) {
      const double d = r.*field - mean;
      ss += d * d;
    }
    return std::sqrt(ss / (n - 1.0));
  };

  result.mean.lip = lip;
  result.stddev.lip = lip;
  auto fold_in = [&](double MetricReport::* field) {
    result.mean.*field = aggregate(field);
    result.stddev.*field = spread(field, result.mean.*field);
  };
  fold_in(&MetricReport::hamming);
  fold_in(&MetricReport::accuracy);
  fold_in(&MetricReport::precision);
  fold_in(&MetricReport::recall);
  fold_in(&MetricReport::f1);
  fold_in(&MetricReport::label_cardinality);
  fold_in(&MetricReport::label_density);
  fold_in(&MetricReport::train_time_s);
  fold_in(&MetricReport::test_time_s);
  return result;
}

TuneResult tune_hidden(const Dataset& ds, const std::vector<Index>& candidates,
                       double train_fraction, Activation activation, Seed seed,
                       double ridge, double threshold) {
  if (candidates.empty()) throw InvalidArgumentError("candidate list must be nonempty");
  for (Index c : candidates)
    if (c < 1) throw InvalidArgumentError("hidden widths must be at least 1");

  const TrainTestSplit split = split_train_test(ds, train_fraction, seed);
  LabelRegistry labels(ds.label_names);

  TuneResult result;
  double best_accuracy = -1.0;
  for (Index width : candidates) {
    TuneRow row;
    row.hidden_dim = width;
    try {
      const HiddenLayer<double> layer(ds.feature_count(), width, activation, seed);
      const MatrixXd h = hidden_map(layer, split.train.features);
      const ModelState<double> state = init_batch(h, split.train.targets, ridge, labels);
      const MetricReport on_train = evaluate_model(state, layer, split.train, threshold);
      const MetricReport on_val = evaluate_model(state, layer, split.test, threshold);
      row.train_hamming = on_train.hamming;
      row.train_accuracy = on_train.accuracy;
      row.val_hamming = on_val.hamming;
      row.val_accuracy = on_val.accuracy;
      if (row.val_accuracy > best_accuracy) {
        best_accuracy = row.val_accuracy;
        result.recommended = width;
      }
    } catch (const SingularMatrixError& e) {
      row.singular = true;
      row.error = e.what();
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace proelm
