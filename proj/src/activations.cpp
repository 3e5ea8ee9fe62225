#include "flexact/activations.hpp"

#include <cmath>
#include <stdexcept>

namespace flexact {

double activation_value(Activation kind, double x, double leaky_slope) {
  switch (kind) {
    case Activation::kRelu:
      return x > 0.0 ? x : 0.0;
    case Activation::kSigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case Activation::kTanh:
      return std::tanh(x);
    case Activation::kLeakyRelu:
      return x > 0.0 ? x : leaky_slope * x;
    case Activation::kIdentity:
      return x;
  }
  throw std::invalid_argument("activation_value: unknown kind");
}

double activation_deriv(Activation kind, double x, double leaky_slope) {
  switch (kind) {
    case Activation::kRelu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::kSigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case Activation::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::kLeakyRelu:
      return x > 0.0 ? 1.0 : leaky_slope;
    case Activation::kIdentity:
      return 1.0;
  }
  throw std::invalid_argument("activation_deriv: unknown kind");
}

Vector apply(Activation kind, const Vector& h, double leaky_slope) {
  Vector out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    out[i] = activation_value(kind, h[i], leaky_slope);
  }
  return out;
}

Vector derivative(Activation kind, const Vector& h, double leaky_slope) {
  Vector out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    out[i] = activation_deriv(kind, h[i], leaky_slope);
  }
  return out;
}

std::string_view activation_name(Activation kind) {
  switch (kind) {
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kLeakyRelu: return "lrelu";
    case Activation::kIdentity: return "identity";
  }
  return "unknown";
}

std::optional<Activation> parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "lrelu" || name == "leakyrelu" || name == "leaky_relu") {
    return Activation::kLeakyRelu;
  }
  if (name == "identity") return Activation::kIdentity;
  return std::nullopt;
}

}  // namespace flexact
