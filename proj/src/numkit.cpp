#include "flexact/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace flexact {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols != v.size()) {
    throw std::invalid_argument("matvec: dimension mismatch");
  }
  Vector out(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) acc += m(r, c) * v[c];
    out[r] = acc;
  }
  return out;
}

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform_open() {
  constexpr double kEps = 1e-10;
  const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return std::clamp(u, kEps, 1.0 - kEps);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& x, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_grad: h must be > 0");
  Vector grad(x.size());
  Vector probe = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double orig = probe[k];
    probe[k] = orig + h;
    const double fp = f(probe);
    probe[k] = orig - h;
    const double fm = f(probe);
    probe[k] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::runtime_error("finite_diff_grad: non-finite function value");
    }
    grad[k] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace flexact
