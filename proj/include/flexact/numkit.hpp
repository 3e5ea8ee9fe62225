#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

namespace flexact {

struct Vector {
  std::vector<double> data;

  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data(n, fill) {}
  Vector(std::initializer_list<double> init) : data(init) {}

  std::size_t size() const { return data.size(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool operator==(const Vector&) const = default;
};

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  static Matrix identity(std::size_t n);

  bool operator==(const Matrix&) const = default;
};

Vector matvec(const Matrix& m, const Vector& v);

/// SplitMix64 generator. Counter-based, bit-exact across platforms, so any
/// recorded run is replayable from the seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform draw clamped into (1e-10, 1 - 1e-10); log(u) and log(-log u)
  /// stay finite downstream.
  double uniform_open();

  /// Standard normal via Box-Muller over uniform_open. The second Box-Muller
  /// value is cached and returned on the next call.
  double normal();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Central differences (f(x + h e_k) - f(x - h e_k)) / (2h) per coordinate.
/// Throws if f evaluates non-finite at a probe point.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& x, double h);

}  // namespace flexact
