#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>

#include "proelm/errors.hpp"
#include "proelm/types.hpp"

namespace proelm {

// Bounded, nonconstant hidden-layer activations. All three map R into a
// bounded interval: sigmoid (0,1), tanh (-1,1), radial basis (0,1].
enum class Activation { Sigmoid, Tanh, RadialBasis };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::RadialBasis: return "radial-basis";
  }
  return "sigmoid";
}

inline Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  if (name == "radial-basis" || name == "rbf") return Activation::RadialBasis;
  throw InvalidArgumentError("unknown activation '" + std::string(name) +
                             "' (expected sigmoid, tanh, or radial-basis)");
}

template <class Scalar>
  requires std::is_arithmetic_v<Scalar>
Scalar activate(Activation kind, Scalar x) {
  switch (kind) {
    case Activation::Sigmoid: return Scalar(1) / (Scalar(1) + std::exp(-x));
    case Activation::Tanh: return std::tanh(x);
    case Activation::RadialBasis: return std::exp(-x * x);
  }
  return Scalar(0);
}

// Elementwise activation of a dense expression; returns a materialized matrix.
template <class Derived>
Matrix<typename Derived::Scalar> activate(Activation kind,
                                          const Eigen::MatrixBase<Derived>& pre) {
  using Scalar = typename Derived::Scalar;
  switch (kind) {
    case Activation::Sigmoid:
      return (Scalar(1) / (Scalar(1) + (-pre.array()).exp())).matrix();
    case Activation::Tanh:
      return pre.array().tanh().matrix();
    case Activation::RadialBasis:
      return (-pre.array().square()).exp().matrix();
  }
  return pre;
}

}  // namespace proelm
