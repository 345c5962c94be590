#pragma once

#include <cmath>
#include <string>

#include "proelm/errors.hpp"
#include "proelm/hidden_layer.hpp"
#include "proelm/model_state.hpp"
#include "proelm/types.hpp"

namespace proelm {

// Raw label scores H beta, one row per sample, one column per known label.
template <class Scalar, class Derived>
Matrix<Scalar> predict_raw(const ModelState<Scalar>& state, const HiddenLayer<Scalar>& layer,
                           const Eigen::MatrixBase<Derived>& X) {
  if (layer.hidden_dim() != state.hidden_dim())
    throw ShapeError("predict_raw: layer has " + std::to_string(layer.hidden_dim()) +
                     " hidden neurons, model has " + std::to_string(state.hidden_dim()));
  return hidden_map(layer, X) * state.beta;
}

// Bipolar step at threshold tau: entries >= tau map to +1, the rest to -1.
// The boundary itself maps to +1.
template <class Derived>
Matrix<typename Derived::Scalar> apply_threshold(const Eigen::MatrixBase<Derived>& raw,
                                                 typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  for (Index j = 0; j < raw.rows(); ++j)
    for (Index i = 0; i < raw.cols(); ++i)
      if (!std::isfinite(static_cast<double>(raw(j, i))))
        throw NumericError("apply_threshold: non-finite score at row " +
                           std::to_string(j) + ", column " + std::to_string(i));
  return (raw.array() >= tau)
      .select(Matrix<Scalar>::Constant(raw.rows(), raw.cols(), Scalar(1)),
              Matrix<Scalar>::Constant(raw.rows(), raw.cols(), Scalar(-1)));
}

// Raw scores plus their thresholded bipolar view.
template <class Scalar>
struct PredictionBatch {
  Matrix<Scalar> raw;
  Matrix<Scalar> bipolar;
  Scalar threshold = Scalar(0);
};

template <class Scalar, class Derived>
PredictionBatch<Scalar> predict(const ModelState<Scalar>& state,
                                const HiddenLayer<Scalar>& layer,
                                const Eigen::MatrixBase<Derived>& X,
                                Scalar tau = Scalar(0)) {
  PredictionBatch<Scalar> out;
  out.raw = predict_raw(state, layer, X);
  out.bipolar = apply_threshold(out.raw, tau);
  out.threshold = tau;
  return out;
}

}  // namespace proelm
