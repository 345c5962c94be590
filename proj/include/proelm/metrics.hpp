#pragma once

#include <string>

#include "proelm/errors.hpp"
#include "proelm/types.hpp"

namespace proelm {

namespace detail {

template <class DP, class DT>
void check_bipolar_pair(const Eigen::MatrixBase<DP>& pred,
                        const Eigen::MatrixBase<DT>& truth, const char* who) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw ShapeError(std::string(who) + ": prediction is " + std::to_string(pred.rows()) +
                     "x" + std::to_string(pred.cols()) + " but truth is " +
                     std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()));
  if (pred.size() == 0)
    throw InvalidArgumentError(std::string(who) + ": empty matrices");
}

template <class Derived>
bool is_bipolar(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return ((m.array() == Scalar(1)) || (m.array() == Scalar(-1))).all();
}

}  // namespace detail

// Fraction of (sample, label) cells where prediction and truth disagree.
template <class DP, class DT>
double hamming_loss(const Eigen::MatrixBase<DP>& pred, const Eigen::MatrixBase<DT>& truth) {
  detail::check_bipolar_pair(pred, truth, "hamming_loss");
  if (!detail::is_bipolar(pred) || !detail::is_bipolar(truth))
    throw InvalidArgumentError("hamming_loss: entries must be -1 or +1");
  Index mismatches = (pred.array() != truth.array()).count();
  return static_cast<double>(mismatches) / static_cast<double>(pred.size());
}

// Mismatch fraction restricted to one label column.
template <class DP, class DT>
double per_label_hamming(const Eigen::MatrixBase<DP>& pred,
                         const Eigen::MatrixBase<DT>& truth, Index label_index) {
  detail::check_bipolar_pair(pred, truth, "per_label_hamming");
  if (label_index < 0 || label_index >= pred.cols())
    throw InvalidArgumentError("per_label_hamming: label index " +
                               std::to_string(label_index) + " out of range [0, " +
                               std::to_string(pred.cols()) + ")");
  Index mismatches =
      (pred.col(label_index).array() != truth.col(label_index).array()).count();
  return static_cast<double>(mismatches) / static_cast<double>(pred.rows());
}

struct ExampleMetrics {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Example-based set-overlap metrics, averaged over samples. For sample j with
// predicted positive set P and true positive set T:
//   accuracy = |P n T| / |P u T|, precision = |P n T| / |P|,
//   recall = |P n T| / |T|, f1 = 2 |P n T| / (|P| + |T|).
// A sample with both sets empty scores 1 on all four; an empty P (or T) alone
// contributes 0 to precision (or recall).
template <class DP, class DT>
ExampleMetrics example_based_metrics(const Eigen::MatrixBase<DP>& pred,
                                     const Eigen::MatrixBase<DT>& truth) {
  detail::check_bipolar_pair(pred, truth, "example_based_metrics");
  using Scalar = typename DP::Scalar;
  const Index n = pred.rows();
  double acc = 0, prec = 0, rec = 0, f1 = 0;
  for (Index j = 0; j < n; ++j) {
    Index p = (pred.row(j).array() == Scalar(1)).count();
    Index t = (truth.row(j).array() == Scalar(1)).count();
    Index both = ((pred.row(j).array() == Scalar(1)) && (truth.row(j).array() == Scalar(1)))
                     .count();
    if (p == 0 && t == 0) {
      acc += 1;
      prec += 1;
      rec += 1;
      f1 += 1;
      continue;
    }
    Index uni = p + t - both;
    acc += static_cast<double>(both) / static_cast<double>(uni);
    if (p > 0) prec += static_cast<double>(both) / static_cast<double>(p);
    if (t > 0) rec += static_cast<double>(both) / static_cast<double>(t);
    f1 += 2.0 * static_cast<double>(both) / static_cast<double>(p + t);
  }
  ExampleMetrics out;
  out.accuracy = acc / static_cast<double>(n);
  out.precision = prec / static_cast<double>(n);
  out.recall = rec / static_cast<double>(n);
  out.f1 = f1 / static_cast<double>(n);
  return out;
}

struct LabelStats {
  double cardinality = 0;  // mean positives per sample
  double density = 0;      // cardinality / label count
};

template <class Derived>
LabelStats label_stats(const Eigen::MatrixBase<Derived>& truth) {
  using Scalar = typename Derived::Scalar;
  if (truth.size() == 0)
    throw InvalidArgumentError("label_stats: empty target matrix");
  if (!detail::is_bipolar(truth))
    throw InvalidArgumentError("label_stats: entries must be -1 or +1");
  Index positives = (truth.array() == Scalar(1)).count();
  LabelStats out;
  out.cardinality = static_cast<double>(positives) / static_cast<double>(truth.rows());
  out.density = out.cardinality / static_cast<double>(truth.cols());
  return out;
}

// One row of the performance table: loss/overlap metrics plus dataset
// statistics and wall-clock timings.
struct MetricReport {
  std::string lip;  // label introduction pattern, e.g. "5+1"
  double hamming = 0;
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double label_cardinality = 0;
  double label_density = 0;
  double train_time_s = 0;
  double test_time_s = 0;
};

}  // namespace proelm
