#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "auq/problem.hpp"

namespace auq {

// Labeled samples; rows of `features` are samples.  class_count is the
// global number of classes (kept by partitioning, so shards agree on it even
// when they only hold a subset).
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  int class_count = 0;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

// IDX image/label pair (the MNIST container format): big-endian magic and
// dimensions, unsigned-byte payload.  Pixels map to [0, 1] by /255.
// Malformed files raise data errors carrying the byte offset.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Inverse of load_idx up to quantization: pixels are written as
// round(value * 255) clamped to [0, 255], one row per sample (rows=1,
// cols=dim in the header).
void save_idx(const Dataset& d, const std::string& images_path,
              const std::string& labels_path);

// Splits by label: class c goes to worker c mod workers, keeping at most
// per_class_cap samples of each class (dataset order).  Requires
// workers <= class count so no worker ends up empty.
std::vector<Dataset> partition_by_class(const Dataset& d, int workers,
                                        Eigen::Index per_class_cap);

// Gaussian clusters around unit-norm random centers, `per_class` samples per
// class, isotropic noise.  Fully determined by the seed.
Dataset synth_blobs(Eigen::Index dim, int classes, Eigen::Index per_class,
                    double noise, std::uint64_t seed);

// Deterministic smooth grayscale test image in [0, 1] (gaussian bumps on a
// ramp), side x side.
Matrix demo_image(Eigen::Index side);

// Four-worker image denoising: worker j observes the noisy image restricted
// to quadrant j and fits 1/2 |u - b|^2 there; a small tikhonov term ties the
// quadrants together.  Pixels are flattened row-major.
struct DenoiseInstance {
  Eigen::Index side = 0;
  Vector ground_truth;
  Vector noisy;
  std::array<std::vector<Eigen::Index>, 4> quadrants;  // disjoint, covering
  std::array<Vector, 4> masked_observations;  // noisy inside quadrant, 0 outside
  double alpha = 1e-3;
  ConsensusProblem problem;
};

DenoiseInstance quadrant_denoise(const Matrix& image, double noise_sigma,
                                 std::uint64_t seed, double alpha = 1e-3);

}  // namespace auq
