#include "flexact/routing.hpp"

#include <cmath>
#include <stdexcept>

namespace flexact {

double gumbel_from_uniform(double u) { return -std::log(-std::log(u)); }

double gumbel_noise(Rng& rng) { return gumbel_from_uniform(rng.uniform_open()); }

std::size_t argmax_index(const LogitArray& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Probs gumbel_softmax(const LogitArray& logits, const LogitArray& noise, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("gumbel_softmax: tau must be > 0");
  LogitArray shifted;
  for (std::size_t i = 0; i < kNumActivations; ++i) {
    shifted[i] = logits[i] + noise[i];
  }
  const double top = shifted[argmax_index(shifted)];
  Probs p{};
  double denom = 0.0;
  for (std::size_t i = 0; i < kNumActivations; ++i) {
    p[i] = std::exp((shifted[i] - top) / tau);
    denom += p[i];
  }
  for (double& v : p) v /= denom;
  return p;
}

Probs tempered_softmax(const LogitArray& logits, double tau) {
  return gumbel_softmax(logits, LogitArray{}, tau);
}

Probs gumbel_softmax_sample(const LogitArray& logits, double tau, Rng& rng) {
  LogitArray noise;
  for (double& g : noise) g = gumbel_noise(rng);
  return gumbel_softmax(logits, noise, tau);
}

std::pair<Vector, RouteTape> route_forward_with_noise(const RoutedLayer& layer,
                                                      const Vector& x,
                                                      const LogitArray& noise) {
  if (layer.W.cols != x.size()) {
    throw std::invalid_argument("route_forward: input dimension mismatch");
  }
  RouteTape tape;
  tape.x = x;
  tape.noise = noise;
  tape.straight_through = layer.straight_through;

  tape.h = matvec(layer.W, x);
  for (std::size_t k = 0; k < tape.h.size(); ++k) tape.h[k] += layer.b[k];

  tape.p_soft = gumbel_softmax(layer.logits, noise, layer.temperature);
  tape.p_fwd = tape.p_soft;
  if (layer.straight_through) {
    tape.p_fwd = Probs{};
    tape.p_fwd[argmax_index(tape.p_soft)] = 1.0;
  }

  Vector y(tape.h.size());
  for (std::size_t j = 0; j < kNumActivations; ++j) {
    tape.acts[j] = apply(kCatalog[j], tape.h, layer.leaky_slope);
    for (std::size_t k = 0; k < y.size(); ++k) {
      y[k] += tape.p_fwd[j] * tape.acts[j][k];
    }
  }
  return {std::move(y), std::move(tape)};
}

std::pair<Vector, RouteTape> route_forward(const RoutedLayer& layer,
                                           const Vector& x, Rng& rng) {
  LogitArray noise;
  for (double& g : noise) g = gumbel_noise(rng);
  return route_forward_with_noise(layer, x, noise);
}

RouteGrads route_backward(const RoutedLayer& layer, const RouteTape& tape,
                          const Vector& dL_dy) {
  const std::size_t d_out = layer.W.rows;
  const std::size_t d_in = layer.W.cols;
  if (tape.h.size() != d_out || tape.x.size() != d_in ||
      tape.straight_through != layer.straight_through) {
    throw std::invalid_argument("route_backward: tape does not match layer");
  }
  if (dL_dy.size() != d_out) {
    throw std::invalid_argument("route_backward: dL_dy dimension mismatch");
  }

  RouteGrads grads;
  grads.dW = Matrix(d_out, d_in);
  grads.db = Vector(d_out);
  grads.dx = Vector(d_in);

  // dy_k/dh_k through the forward mixture (p_fwd).
  Vector dL_dh(d_out);
  for (std::size_t k = 0; k < d_out; ++k) {
    double dydh = 0.0;
    for (std::size_t j = 0; j < kNumActivations; ++j) {
      dydh += tape.p_fwd[j] *
              activation_deriv(kCatalog[j], tape.h[k], layer.leaky_slope);
    }
    dL_dh[k] = dL_dy[k] * dydh;
  }

  for (std::size_t k = 0; k < d_out; ++k) {
    grads.db[k] = dL_dh[k];
    for (std::size_t c = 0; c < d_in; ++c) {
      grads.dW(k, c) = dL_dh[k] * tape.x[c];
      grads.dx[c] += layer.W(k, c) * dL_dh[k];
    }
  }

  // Logit path through the tempered-softmax Jacobian at the sampled p_soft:
  // sum_j act_j(h_k) p_j (delta_jl - p_l) / tau  ==  p_l (act_l(h_k) - s_k) / tau
  // with s_k = sum_j p_j act_j(h_k).
  for (std::size_t k = 0; k < d_out; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < kNumActivations; ++j) {
      s += tape.p_soft[j] * tape.acts[j][k];
    }
    for (std::size_t l = 0; l < kNumActivations; ++l) {
      grads.dlogits[l] += dL_dy[k] * tape.p_soft[l] * (tape.acts[l][k] - s) /
                          layer.temperature;
    }
  }
  return grads;
}

Activation hard_select(const RoutedLayer& layer) {
  return kCatalog[argmax_index(layer.logits)];
}

}  // namespace flexact
