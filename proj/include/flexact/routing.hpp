#pragma once

#include <array>
#include <utility>

#include "flexact/activations.hpp"
#include "flexact/numkit.hpp"

namespace flexact {

/// Selection weights over the activation catalog: non-negative, sum to one.
using Probs = std::array<double, kNumActivations>;
using LogitArray = std::array<double, kNumActivations>;

/// Affine layer whose non-linearity is chosen by Gumbel-Softmax routing over
/// the catalog. The raw logits are the trainable routing parameters.
struct RoutedLayer {
  Matrix W;                   // d_out x d_in
  Vector b;                   // d_out
  LogitArray logits{};        // catalog order, trainable
  double temperature = 1.0;   // > 0
  bool straight_through = false;
  double leaky_slope = kDefaultLeakySlope;
};

/// Backprop cache for one route_forward call.
struct RouteTape {
  Vector x;            // layer input
  Vector h;            // pre-activation W x + b
  LogitArray noise{};  // Gumbel draws used for this pass
  Probs p_soft{};      // softmax((logits + noise) / tau)
  Probs p_fwd{};       // one-hot(argmax p_soft) under straight-through, else p_soft
  std::array<Vector, kNumActivations> acts;  // per-candidate activations of h
  bool straight_through = false;
};

struct RouteGrads {
  Matrix dW;
  Vector db;
  LogitArray dlogits{};
  Vector dx;
};

/// -log(-log u); finite for u in the clamped open interval.
double gumbel_from_uniform(double u);
double gumbel_noise(Rng& rng);

/// Index of the largest entry; ties break toward the lowest catalog index.
std::size_t argmax_index(const LogitArray& values);

/// softmax(logits / tau) with max-subtraction.
Probs tempered_softmax(const LogitArray& logits, double tau);

/// softmax((logits + noise) / tau) with max-subtraction.
Probs gumbel_softmax(const LogitArray& logits, const LogitArray& noise, double tau);

Probs gumbel_softmax_sample(const LogitArray& logits, double tau, Rng& rng);

/// Mixture forward pass: h = W x + b, y = sum_j p_fwd[j] * act_j(h).
/// Draws one Gumbel noise vector per call; the routing choice is layer-wide.
std::pair<Vector, RouteTape> route_forward(const RoutedLayer& layer,
                                           const Vector& x, Rng& rng);

/// Same forward pass with the Gumbel noise supplied by the caller. Used to
/// share one draw across a batch and to freeze noise in gradient checks.
std::pair<Vector, RouteTape> route_forward_with_noise(const RoutedLayer& layer,
                                                      const Vector& x,
                                                      const LogitArray& noise);

/// Exact gradients for the forward pass recorded on the tape. Under
/// straight-through the logit gradient flows through p_soft even though the
/// forward used the one-hot p_fwd.
RouteGrads route_backward(const RoutedLayer& layer, const RouteTape& tape,
                          const Vector& dL_dy);

/// Catalog entry at argmax(logits); ties break toward the lowest index.
Activation hard_select(const RoutedLayer& layer);

}  // namespace flexact
