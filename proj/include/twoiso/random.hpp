#ifndef TWOISO_RANDOM_HPP
#define TWOISO_RANDOM_HPP

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "twoiso/linalg.hpp"

namespace twoiso {

/// Seeded source of complex Gaussian samples. Same seed, same stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  cplx gaussian() {
    std::normal_distribution<double> nd(0.0, 1.0);
    const double re = nd(engine_);
    const double im = nd(engine_);
    return {re, im};
  }

  Vector gaussian_vector(std::size_t length, std::uint64_t space_id = 0) {
    Vector v(length, space_id);
    for (std::size_t i = 0; i < length; ++i) v[i] = gaussian();
    return v;
  }

  Vector unit_vector(std::size_t length, std::uint64_t space_id = 0) {
    Vector v = gaussian_vector(length, space_id);
    v *= 1.0 / norm(v);
    return v;
  }

  /// Random unit vector in the span of an orthonormal list.
  Vector unit_vector_in(std::span<const Vector> onb) {
    Vector v = onb.front();
    v *= gaussian();
    for (std::size_t k = 1; k < onb.size(); ++k) v.axpy(gaussian(), onb[k]);
    v *= 1.0 / norm(v);
    return v;
  }

  /// `count` random orthonormal vectors supported on coordinates [0, length).
  std::vector<Vector> orthonormal_set(std::size_t length, std::size_t count, std::uint64_t space_id = 0) {
    std::vector<Vector> raw;
    raw.reserve(count);
    for (std::size_t k = 0; k < count; ++k) raw.push_back(gaussian_vector(length, space_id));
    return gram_schmidt(raw, 0.0);
  }

  /// Haar-like random unitary (Gram-Schmidt of a Gaussian matrix).
  DenseMatrix unitary(std::size_t n) {
    const auto cols = orthonormal_set(n, n);
    return DenseMatrix::from_columns(cols, n);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace twoiso

#endif  // TWOISO_RANDOM_HPP
