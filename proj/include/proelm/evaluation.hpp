#pragma once

#include <string>
#include <vector>

#include "proelm/dataset.hpp"
#include "proelm/hidden_layer.hpp"
#include "proelm/metrics.hpp"
#include "proelm/model_state.hpp"
#include "proelm/stream.hpp"
#include "proelm/training.hpp"
#include "proelm/types.hpp"

namespace proelm {

// Default initial-block size for a given hidden width: 1.2x, rounded up.
Index default_initial_block(Index hidden_dim);

// Joins a pattern back into its "a+b+c" notation.
std::string pattern_to_string(const std::vector<Index>& pattern);

Dataset subset(const Dataset& ds, const std::vector<Index>& rows);

struct TrainTestSplit {
  std::vector<Index> train_indices;
  std::vector<Index> test_indices;
  Dataset train;
  Dataset test;
};

// Seeded shuffle, then the first ceil(train_fraction * N) samples train.
TrainTestSplit split_train_test(const Dataset& ds, double train_fraction, Seed seed);

// Seeded shuffle cut into fold_count contiguous blocks whose sizes differ by
// at most one; every sample lands in exactly one fold.
std::vector<std::vector<Index>> make_folds(Index sample_count, Index fold_count, Seed seed);

// Scores a model against a dataset, matching labels by name. Dataset labels
// the model has not seen are predicted as constant -1; model labels absent
// from the dataset are skipped. Fills the metric fields and test_time_s.
MetricReport evaluate_model(const ModelState<double>& state, const HiddenLayer<double>& layer,
                            const Dataset& ds, double threshold = 0.0);

struct StreamRunConfig {
  std::vector<Index> pattern;
  Index hidden_dim = 0;
  Activation activation = Activation::Sigmoid;
  Seed seed = 0;
  double ridge = 0.0;
  Index initial_block = 0;  // 0 picks default_initial_block(hidden_dim)
  Index chunk_size = 1;
  ExpansionMode mode = ExpansionMode::HistoryExact;
  double threshold = 0.0;
  Index folds = 10;
};

struct CrossvalResult {
  std::vector<MetricReport> fold_reports;
  MetricReport mean;
  MetricReport stddev;
};

// K-fold cross-validation of the full streaming protocol. Fold f holds out
// the f-th fold for testing and streams the remainder; the hidden layer and
// plan for fold f are seeded with config.seed + f.
CrossvalResult crossval_stream(const Dataset& ds, const StreamRunConfig& config);

struct TuneRow {
  Index hidden_dim = 0;
  double train_hamming = 0.0;
  double train_accuracy = 0.0;
  double val_hamming = 0.0;
  double val_accuracy = 0.0;
  bool singular = false;
  std::string error;
};

struct TuneResult {
  std::vector<TuneRow> rows;
  Index recommended = 0;
};

// Batch-trains one model per candidate hidden width on a fixed train split
// and scores train and validation sets. A candidate whose Gram matrix is
// singular is marked and skipped; the recommendation is the candidate with
// the highest validation accuracy (smallest width on ties).
TuneResult tune_hidden(const Dataset& ds, const std::vector<Index>& candidates,
                       double train_fraction, Activation activation, Seed seed,
                       double ridge, double threshold);

}  // namespace proelm
