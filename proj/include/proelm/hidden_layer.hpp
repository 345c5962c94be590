#pragma once

#include <cmath>
#include <random>
#include <string>

#include "proelm/activation.hpp"
#include "proelm/errors.hpp"
#include "proelm/types.hpp"

namespace proelm {

namespace detail {

// One uniform draw on [-1, 1). The mapping from raw 32-bit words is spelled
// out so that a given seed yields the same layer on every platform and
// standard library (std::uniform_real_distribution is not portable).
inline double uniform_pm1(std::mt19937& gen) {
  return 2.0 * std::ldexp(static_cast<double>(gen()), -32) - 1.0;
}

}  // namespace detail

// Frozen random feature map of a single-hidden-layer network: weights and
// biases are drawn once from a seeded generator and never tuned. Immutable
// after construction; safe to share across threads.
template <class Scalar>
class HiddenLayer {
 public:
  // Seeded construction: entries uniform on [-1, 1], generated row by row
  // (weights first, then biases) so the layout is reproducible.
  HiddenLayer(Index input_dim, Index hidden_dim, Activation activation, Seed seed)
      : activation_(activation), seed_(seed) {
    if (input_dim < 1)
      throw InvalidArgumentError("input_dim must be >= 1, got " +
                                 std::to_string(input_dim));
    if (hidden_dim < 1)
      throw InvalidArgumentError("hidden_dim must be >= 1, got " +
                                 std::to_string(hidden_dim));
    std::mt19937 gen(static_cast<std::mt19937::result_type>(seed));
    weights_.resize(hidden_dim, input_dim);
    for (Index i = 0; i < hidden_dim; ++i)
      for (Index j = 0; j < input_dim; ++j)
        weights_(i, j) = static_cast<Scalar>(detail::uniform_pm1(gen));
    biases_.resize(hidden_dim);
    for (Index i = 0; i < hidden_dim; ++i)
      biases_(i) = static_cast<Scalar>(detail::uniform_pm1(gen));
  }

  // Explicit construction from given weights/biases (mainly for tests and
  // fixtures). Entries must already lie in [-1, 1].
  HiddenLayer(Matrix<Scalar> weights, Vector<Scalar> biases, Activation activation)
      : weights_(std::move(weights)),
        biases_(std::move(biases)),
        activation_(activation),
        seed_(0) {
    if (weights_.rows() < 1 || weights_.cols() < 1)
      throw InvalidArgumentError("hidden layer must have at least one neuron "
                                 "and one input feature");
    if (biases_.size() != weights_.rows())
      throw ShapeError("bias count " + std::to_string(biases_.size()) +
                       " does not match hidden_dim " +
                       std::to_string(weights_.rows()));
    if (weights_.size() > 0 && weights_.cwiseAbs().maxCoeff() > Scalar(1))
      throw InvalidArgumentError("hidden weights must lie in [-1, 1]");
    if (biases_.size() > 0 && biases_.cwiseAbs().maxCoeff() > Scalar(1))
      throw InvalidArgumentError("hidden biases must lie in [-1, 1]");
  }

  Index input_dim() const { return weights_.cols(); }
  Index hidden_dim() const { return weights_.rows(); }
  Activation activation() const { return activation_; }
  Seed seed() const { return seed_; }

  // weights(): hidden_dim x input_dim, one hidden neuron per row.
  const Matrix<Scalar>& weights() const { return weights_; }
  const Vector<Scalar>& biases() const { return biases_; }

 private:
  Matrix<Scalar> weights_;
  Vector<Scalar> biases_;
  Activation activation_;
  Seed seed_;
};

template <class Scalar = double>
HiddenLayer<Scalar> init_hidden_layer(Index input_dim, Index hidden_dim,
                                      Activation activation, Seed seed) {
  return HiddenLayer<Scalar>(input_dim, hidden_dim, activation, seed);
}

// Hidden-layer feature map: row j of the result is the activation of every
// hidden neuron on sample j, H(j,i) = g(w_i . x_j + b_i). Pure function of
// (layer, X); rows are independent.
template <class Scalar, class Derived>
Matrix<Scalar> hidden_map(const HiddenLayer<Scalar>& layer,
                          const Eigen::MatrixBase<Derived>& X) {
  if (X.cols() != layer.input_dim())
    throw ShapeError("hidden_map: expected " + std::to_string(layer.input_dim()) +
                     " feature columns, got " + std::to_string(X.cols()));
  Matrix<Scalar> pre = X * layer.weights().transpose();
  pre.rowwise() += layer.biases().transpose();
  return activate(layer.activation(), pre);
}

}  // namespace proelm
