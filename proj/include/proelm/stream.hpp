#pragma once

#include <optional>
#include <vector>

#include "proelm/dataset.hpp"
#include "proelm/hidden_layer.hpp"
#include "proelm/metrics.hpp"
#include "proelm/model_state.hpp"
#include "proelm/training.hpp"
#include "proelm/types.hpp"

namespace proelm {

// One stretch of the stream. Phase 0 introduces nothing (it continues the
// initial labels); each later phase introduces a group of label columns
// before its first chunk is trained.
struct StreamPhase {
  std::vector<Index> introduced_labels;  // dataset column indices
  std::vector<Index> samples;            // dataset row indices, in training order
};

// A fully deterministic training schedule over a dataset: who is in the
// initial block, when each label appears, and in which order samples arrive.
struct StreamPlan {
  std::vector<Index> pattern;      // label introduction pattern, e.g. {5, 1}
  std::vector<Index> label_order;  // plan position -> dataset label column
  std::vector<Index> initial_block;
  std::vector<StreamPhase> phases;
  Index chunk_size = 1;
  Seed seed = 0;

  Index initial_label_count() const { return pattern.empty() ? 0 : pattern.front(); }
};

// Builds a plan satisfying the invariants checked by validate_plan. Samples
// go to the earliest phase whose introduced labels cover their positives,
// shuffled within each phase by `seed`. If the natural label order leaves
// fewer than `initial_block` eligible samples, the labels with the lowest
// frequency of unique occurrence are held out and appended in ascending
// order; the permutation is recorded in `label_order`.
StreamPlan build_stream_plan(const Dataset& ds, const std::vector<Index>& pattern,
                             Index initial_block, Index chunk_size, Seed seed);

// Throws if any plan invariant fails against the dataset: pattern sums to the
// label count, the initial block stays within the first pattern[0] labels, no
// phase uses a label before its introduction, and every sample appears
// exactly once.
void validate_plan(const Dataset& ds, const StreamPlan& plan);

// Hamming-loss trajectory recorded after the initial block and after every
// chunk, always against the same evaluation set. Labels the model has not
// learned yet count as a constant -1 prediction.
struct CurvePoint {
  long long samples_seen = 0;
  double overall_hamming = 0;
  std::vector<double> per_label;  // aligned with LearningCurve::tracked_labels
};

struct LearningCurve {
  std::vector<Index> tracked_labels;  // dataset column indices
  std::vector<CurvePoint> points;
};

struct StreamResult {
  ModelState<double> state;
  LearningCurve curve;
  double train_time_s = 0;
};

struct StreamOptions {
  double threshold = 0.0;
  bool record_curve = true;
  // Curve evaluation set; defaults to the training dataset itself.
  const Dataset* eval = nullptr;
  // Tracked label columns; defaults to every label introduced after phase 0.
  std::optional<std::vector<Index>> tracked_labels;
};

// Runs the schedule: init_batch on the initial block, then per chunk an
// expand_labels (when the chunk's phase introduces labels) followed by a
// sequential_update. If a training step throws, the partial curve is
// attached to the error so callers can still emit it.
StreamResult run_stream(const Dataset& ds, const StreamPlan& plan,
                        const HiddenLayer<double>& layer, double ridge,
                        ExpansionMode mode, const StreamOptions& options = {});

// Carries the partial learning curve out of a failed run_stream.
class StreamRunError : public Error {
 public:
  StreamRunError(const Error& cause, LearningCurve partial)
      : Error(cause.kind(), cause.what()), partial_curve_(std::move(partial)) {}

  const LearningCurve& partial_curve() const { return partial_curve_; }

 private:
  LearningCurve partial_curve_;
};

}  // namespace proelm
