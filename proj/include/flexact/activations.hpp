#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "flexact/numkit.hpp"

namespace flexact {

/// Candidate non-linearities. The catalog order is fixed; index j in every
/// probability vector refers to this order.
enum class Activation : int {
  kRelu = 0,
  kSigmoid = 1,
  kTanh = 2,
  kLeakyRelu = 3,
  kIdentity = 4,
};

inline constexpr std::size_t kNumActivations = 5;

inline constexpr std::array<Activation, kNumActivations> kCatalog = {
    Activation::kRelu, Activation::kSigmoid, Activation::kTanh,
    Activation::kLeakyRelu, Activation::kIdentity};

/// Negative-side slope for LeakyReLU, used for both the routed candidate and
/// the ground-truth generator so "matching" is well-defined.
inline constexpr double kDefaultLeakySlope = 0.01;

double activation_value(Activation kind, double x,
                        double leaky_slope = kDefaultLeakySlope);

/// First derivative. At x == 0 the left-limit convention applies: ReLU' = 0,
/// LeakyReLU' = leaky_slope.
double activation_deriv(Activation kind, double x,
                        double leaky_slope = kDefaultLeakySlope);

Vector apply(Activation kind, const Vector& h,
             double leaky_slope = kDefaultLeakySlope);
Vector derivative(Activation kind, const Vector& h,
                  double leaky_slope = kDefaultLeakySlope);

std::string_view activation_name(Activation kind);
std::optional<Activation> parse_activation(std::string_view name);

}  // namespace flexact
