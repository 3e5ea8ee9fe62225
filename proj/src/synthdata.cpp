#include "flexact/synthdata.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace flexact {

Dataset generate(const DatasetSpec& spec) {
  if (spec.n_samples < 1 || spec.d_in < 1 ||
      spec.informative_index >= spec.d_in) {
    throw std::invalid_argument("generate: invalid dataset spec");
  }
  Rng rng(spec.seed);
  Dataset data;
  data.X = Matrix(spec.n_samples, spec.d_in);
  data.y = Vector(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    for (std::size_t c = 0; c < spec.d_in; ++c) data.X(i, c) = rng.normal();
    data.y[i] = activation_value(
        spec.truth, spec.scale * data.X(i, spec.informative_index),
        spec.leaky_slope);
  }
  return data;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0) {
    throw std::invalid_argument("split: train_fraction must be in (0, 1)");
  }
  const std::size_t n = data.X.rows;
  const std::size_t n_train =
      static_cast<std::size_t>(train_fraction * static_cast<double>(n));
  if (n_train == 0 || n_train == n) {
    throw std::invalid_argument("split: degenerate partition");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {  // Fisher-Yates
    const std::size_t j = rng.next_u64() % (i + 1);
    std::swap(order[i], order[j]);
  }

  auto take = [&](std::size_t begin, std::size_t count) {
    Dataset part;
    part.X = Matrix(count, data.X.cols);
    part.y = Vector(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t row = order[begin + i];
      for (std::size_t c = 0; c < data.X.cols; ++c) {
        part.X(i, c) = data.X(row, c);
      }
      part.y[i] = data.y[row];
    }
    return part;
  };
  return {take(0, n_train), take(n_train, n - n_train)};
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t c = 0; c < data.X.cols; ++c) out << 'x' << c << ',';
  out << "y\n";
  char buf[32];
  for (std::size_t i = 0; i < data.X.rows; ++i) {
    for (std::size_t c = 0; c < data.X.cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.X(i, c));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", data.y[i]);
    out << buf << '\n';
  }
}

}  // namespace flexact
