#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

namespace auq {

// splitmix64 finalizer. Used both as a standalone mixer (stream derivation)
// and as the core of the generator below.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and up to two tags
// (worker index, iteration, ...).  Deterministic and order-sensitive.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return mix64(seed ^ mix64(a ^ mix64(b)));
}

// Small deterministic generator (splitmix64 stream).  The standard library
// distributions are implementation-defined, so uniforms and normals are
// produced by hand; results are bit-identical across platforms and
// thread counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; second value cached.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - next_uniform();  // (0, 1]
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  Eigen::VectorXd gaussian_vector(Eigen::Index n) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = next_gaussian();
    return x;
  }

  // Gaussian direction normalized to unit Euclidean length.
  Eigen::VectorXd unit_vector(Eigen::Index n) {
    Eigen::VectorXd x = gaussian_vector(n);
    double nx = x.norm();
    while (nx == 0.0) {  // astronomically unlikely; retry keeps the contract
      x = gaussian_vector(n);
      nx = x.norm();
    }
    return x / nx;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace auq
