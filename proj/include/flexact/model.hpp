#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "flexact/regularizer.hpp"
#include "flexact/synthdata.hpp"

namespace flexact {

enum class ModelMode { kRouted, kFixed };

/// One affine map followed by either the routed non-linearity or a fixed
/// baseline activation. Fixed mode ignores logits and temperature.
struct Network {
  RoutedLayer layer;
  ModelMode mode = ModelMode::kRouted;
  Activation fixed_kind = Activation::kRelu;
};

struct TrainConfig {
  int epochs = 300;
  int batch_size = 64;
  double learning_rate = 0.05;
  double alpha = 0.3;    // KL weight
  double lambda = 0.25;  // pseudo-probability scaling
  double tau_start = 1.0;
  double tau_end = 0.05;
  bool straight_through = false;
  std::uint64_t seed = 0;
  // The affine parameters train faster than the router so the fit matures
  // while selection is still exploratory.
  double weight_lr_scale = 4.0;
  // The KL pressure is applied at full strength early, then released on a
  // linear ramp so the task signal alone decides the final commitment.
  double kl_fade_start = 1.0 / 6.0;
  double kl_fade_end = 1.0 / 3.0;
};

/// Offset applied to cfg.seed for the training-time Gumbel noise stream;
/// make_network draws from the raw seed, so the two streams must not overlap.
/// Public so tests can replay the exact noise a train step consumed.
inline constexpr std::uint64_t kNoiseStreamSalt = 0xf1e2d3c4b5a69788ULL;

struct EpochRecord {
  double task_loss = 0.0;
  double kl_loss = 0.0;
  double total_loss = 0.0;
  double tau = 0.0;
  Probs p_soft{};  // epoch mean of the sampled selection weights
};

using TrainTrace = std::vector<EpochRecord>;

struct DivergenceError : std::runtime_error {
  int epoch;
  explicit DivergenceError(int at_epoch);
};

/// Scalar-output network: W uniform in [-0.5, 0.5] per entry from init_rng,
/// bias likewise, logits all zero (uniform prior over candidates).
Network make_network(std::size_t d_in, ModelMode mode, Activation fixed_kind,
                     Rng& init_rng);

/// Returns (mean squared error, gradient 2(pred - target)/n).
std::pair<double, Vector> mse_loss(const Vector& pred, const Vector& target);

/// Geometric interpolation from tau_start at epoch 0 to tau_end at the last
/// epoch; monotone non-increasing.
double anneal_tau(int epoch, const TrainConfig& cfg);

/// KL strength multiplier for an epoch: 1 before kl_fade_start, 0 after
/// kl_fade_end, linear in between (fractions of the epoch budget).
double kl_fade(int epoch, const TrainConfig& cfg);

/// Mini-batch gradient descent. Routed mode draws Gumbel noise per sample
/// with scale tau (exploration anneals with temperature); task gradients
/// plus the faded KL path on the logits scaled by alpha; W and b move at
/// learning_rate * weight_lr_scale. Deterministic given cfg.seed. Throws
/// DivergenceError if the batch loss goes non-finite or beyond 1e6.
TrainTrace train(Network& net, const Dataset& data, const TrainConfig& cfg);

/// Test MSE with sampling disabled: Routed mode commits to hard_select.
double evaluate(const Network& net, const Dataset& data);

}  // namespace flexact
