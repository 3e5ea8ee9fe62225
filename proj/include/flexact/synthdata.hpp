#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "flexact/activations.hpp"
#include "flexact/numkit.hpp"

namespace flexact {

/// Synthetic regression task: y = truth(scale * x[informative_index]) with
/// the remaining input dimensions i.i.d. standard normal distractors.
struct DatasetSpec {
  Activation truth = Activation::kRelu;
  double scale = 5.0;
  std::size_t n_samples = 2560;
  std::size_t d_in = 4;
  std::size_t informative_index = 0;
  std::uint64_t seed = 0;
  double leaky_slope = kDefaultLeakySlope;
};

struct Dataset {
  Matrix X;  // n x d_in
  Vector y;  // n, noise-free labels
};

/// All inputs i.i.d. standard normal (Box-Muller over the clamped uniform),
/// labels computed exactly from the informative column. Deterministic given
/// the spec seed.
Dataset generate(const DatasetSpec& spec);

/// Disjoint row partition by seeded shuffle; both halves keep the label
/// invariant. Throws if either half would be empty.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed);

/// CSV with header x0,...,x{d-1},y.
void write_csv(const Dataset& data, const std::string& path);

}  // namespace flexact
