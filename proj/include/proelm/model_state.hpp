#pragma once

#include "proelm/label_registry.hpp"
#include "proelm/types.hpp"

namespace proelm {

// Mutable learner state. Single writer: training operations must not be
// interleaved on one state, but reading a snapshot of `beta` for prediction
// is safe while no writer is active.
//
// Invariants kept by the training operations:
//   - beta is hidden_dim x labels.count(); m_inv is hidden_dim square.
//   - m_inv tracks (H^T H + ridge I)^{-1} over every consumed sample and is
//     kept symmetric by construction.
//   - hidden_sum is the column-sum of every hidden-activation row seen so
//     far; expansion uses it to backfill -1 targets over the whole history.
template <class Scalar>
struct ModelState {
  Matrix<Scalar> beta;        // output weights, hidden_dim x label count
  Matrix<Scalar> m_inv;       // running inverse Gram, hidden_dim x hidden_dim
  Vector<Scalar> hidden_sum;  // running column-sum of hidden activations
  long long samples_seen = 0;
  LabelRegistry labels;
  Scalar ridge = Scalar(0);

  Index hidden_dim() const { return beta.rows(); }
  Index label_count() const { return labels.count(); }
};

using ModelStated = ModelState<double>;

}  // namespace proelm
