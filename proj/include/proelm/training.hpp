#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "proelm/errors.hpp"
#include "proelm/label_registry.hpp"
#include "proelm/model_state.hpp"
#include "proelm/types.hpp"

namespace proelm {

// How newly introduced output columns are initialized.
//
// HistoryExact treats every previously seen sample as carrying target -1 for
// the new labels: the correction is -M_k * hidden_sum, which equals the batch
// least-squares column for an all -1 target over the full history. This is
// the default because it satisfies the batch-retrain equivalence.
//
// PaperLiteral applies the correction -M_k * H_trigger^T * J using only the
// chunk in which the new labels first appeared.
enum class ExpansionMode { HistoryExact, PaperLiteral };

inline std::string to_string(ExpansionMode m) {
  return m == ExpansionMode::HistoryExact ? "history-exact" : "paper-literal";
}

inline ExpansionMode parse_expansion_mode(std::string_view name) {
  if (name == "history-exact") return ExpansionMode::HistoryExact;
  if (name == "paper-literal") return ExpansionMode::PaperLiteral;
  throw InvalidArgumentError("unknown expansion mode '" + std::string(name) +
                             "' (expected history-exact or paper-literal)");
}

namespace detail {

// RLS drifts m_inv off symmetry by rounding; averaging with the transpose
// after every update damps the drift at negligible cost.
template <class Scalar>
void symmetrize(Matrix<Scalar>& m) {
  m = ((m + m.transpose()) * Scalar(0.5)).eval();
}

}  // namespace detail

// Batch initialization on the first block of data:
//   m_inv = (H0^T H0 + ridge I)^{-1},  beta = m_inv H0^T Y0.
// With ridge = 0 this requires H0 to have full column rank, which in practice
// means at least hidden_dim rows in the initial block.
template <class DH, class DY>
ModelState<typename DH::Scalar> init_batch(const Eigen::MatrixBase<DH>& H0,
                                           const Eigen::MatrixBase<DY>& Y0,
                                           typename DH::Scalar ridge = 0,
                                           LabelRegistry labels = {}) {
  using Scalar = typename DH::Scalar;
  if (H0.rows() < 1)
    throw InvalidArgumentError("init_batch: initial block must contain at least one sample");
  if (Y0.rows() != H0.rows())
    throw ShapeError("init_batch: H0 has " + std::to_string(H0.rows()) +
                     " rows but Y0 has " + std::to_string(Y0.rows()));
  if (ridge < Scalar(0))
    throw InvalidArgumentError("init_batch: ridge must be nonnegative");
  if (labels.count() != 0 && labels.count() != Y0.cols())
    throw ShapeError("init_batch: registry has " + std::to_string(labels.count()) +
                     " labels but Y0 has " + std::to_string(Y0.cols()) + " columns");

  Matrix<Scalar> gram = H0.transpose() * H0;
  gram.diagonal().array() += ridge;

  Eigen::FullPivLU<Matrix<Scalar>> lu(gram);
  if (!lu.isInvertible())
    throw SingularMatrixError(
        "init_batch: H0^T H0 is singular or numerically rank-deficient; "
        "use a larger initial block, fewer hidden neurons, or ridge > 0");

  ModelState<Scalar> state;
  state.m_inv = lu.inverse();
  detail::symmetrize(state.m_inv);
  state.beta = state.m_inv * (H0.transpose() * Y0);
  state.hidden_sum = H0.colwise().sum().transpose();
  state.samples_seen = H0.rows();
  state.ridge = ridge;
  if (labels.count() == 0 && Y0.cols() > 0) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(Y0.cols()));
    for (Index j = 0; j < Y0.cols(); ++j) names.push_back("L" + std::to_string(j));
    state.labels = LabelRegistry(std::move(names));
  } else {
    state.labels = std::move(labels);
  }
  return state;
}

// Recursive least-squares update for one chunk of b samples:
//   m_inv <- m_inv - m_inv H^T (I_b + H m_inv H^T)^{-1} H m_inv
//   beta  <- beta + m_inv_new H^T (Y - H beta_old)
// For b = 1 the inner solve collapses to the scalar 1 + h^T M h.
template <class Scalar, class DH, class DY>
void sequential_update(ModelState<Scalar>& state, const Eigen::MatrixBase<DH>& H_chunk,
                       const Eigen::MatrixBase<DY>& Y_chunk) {
  const Index b = H_chunk.rows();
  if (b < 1)
    throw InvalidArgumentError("sequential_update: chunk must contain at least one sample");
  if (H_chunk.cols() != state.hidden_dim())
    throw ShapeError("sequential_update: chunk has " + std::to_string(H_chunk.cols()) +
                     " hidden columns, model has " + std::to_string(state.hidden_dim()));
  if (Y_chunk.rows() != b)
    throw ShapeError("sequential_update: H_chunk has " + std::to_string(b) +
                     " rows but Y_chunk has " + std::to_string(Y_chunk.rows()));
  if (Y_chunk.cols() != state.label_count()) {
    std::string names;
    for (const auto& n : state.labels.names()) {
      if (!names.empty()) names += ", ";
      names += n;
    }
    throw ShapeError("sequential_update: chunk carries " + std::to_string(Y_chunk.cols()) +
                     " label columns but the model knows " +
                     std::to_string(state.label_count()) + " (" + names + ")");
  }

  Matrix<Scalar> residual = Y_chunk - H_chunk * state.beta;

  if (b == 1) {
    Vector<Scalar> h = H_chunk.row(0).transpose();
    Vector<Scalar> mh = state.m_inv * h;
    Scalar denom = Scalar(1) + h.dot(mh);
    state.m_inv.noalias() -= (mh * mh.transpose()) / denom;
  } else {
    Matrix<Scalar> mht = state.m_inv * H_chunk.transpose();  // hidden x b
    Matrix<Scalar> inner = Matrix<Scalar>::Identity(b, b) + H_chunk * mht;
    state.m_inv.noalias() -= mht * inner.partialPivLu().solve(mht.transpose());
  }
  detail::symmetrize(state.m_inv);

  state.beta.noalias() += state.m_inv * (H_chunk.transpose() * residual);
  state.hidden_sum += H_chunk.colwise().sum().transpose();
  state.samples_seen += b;
}

// Progressive label expansion: appends c = |new_labels| columns to beta.
// Old columns are carried over bit-identically; the new columns get the
// correction prescribed by `mode`. m_inv, hidden_sum, and samples_seen do
// not change (no new samples are consumed).
//
// `trigger_hidden` is the hidden map of the chunk in which the new labels
// first appeared; it is only consulted in PaperLiteral mode and may be empty
// (0 x hidden_dim), in which case the new columns start at zero.
template <class Scalar>
void expand_labels(ModelState<Scalar>& state, const std::vector<std::string>& new_labels,
                   ExpansionMode mode,
                   const Matrix<Scalar>& trigger_hidden = Matrix<Scalar>()) {
  if (new_labels.empty())
    throw InvalidArgumentError("expand_labels: new_labels must be nonempty");
  std::unordered_set<std::string> seen;
  for (const auto& n : new_labels) {
    if (state.labels.find(n))
      throw ConflictError("expand_labels: label '" + n + "' already exists");
    if (!seen.insert(n).second)
      throw ConflictError("expand_labels: label '" + n + "' given twice");
  }

  const Index hidden = state.hidden_dim();
  const Index c = static_cast<Index>(new_labels.size());

  Vector<Scalar> correction;
  if (mode == ExpansionMode::HistoryExact) {
    correction = -(state.m_inv * state.hidden_sum);
  } else {
    if (trigger_hidden.rows() > 0 && trigger_hidden.cols() != hidden)
      throw ShapeError("expand_labels: trigger chunk has " +
                       std::to_string(trigger_hidden.cols()) +
                       " hidden columns, model has " + std::to_string(hidden));
    if (trigger_hidden.rows() == 0) {
      correction = Vector<Scalar>::Zero(hidden);
    } else {
      // -M h^T J: every new column receives -M times the chunk's column-sum.
      correction = -(state.m_inv * trigger_hidden.colwise().sum().transpose());
    }
  }

  const Index m_old = state.beta.cols();
  state.beta.conservativeResize(hidden, m_old + c);
  for (Index j = 0; j < c; ++j) state.beta.col(m_old + j) = correction;
  for (const auto& n : new_labels) state.labels.append(n);
}

}  // namespace proelm
