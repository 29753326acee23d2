#pragma once

#include <random>

#include "lfcalib/camera_model.hpp"
#include "lfcalib/dataset.hpp"
#include "lfcalib/rotation.hpp"
#include "lfcalib/types.hpp"

namespace lfcalib::testing {

// Reference camera, k_i and k_j in mm.
inline Intrinsics reference_camera() { return {0.24, 0.25, 2.0e-3, 1.9e-3, -0.32, -0.33}; }

// Same camera with k_i, k_j a thousand times smaller.
inline Intrinsics reference_camera_unscaled() { return {2.4e-4, 2.5e-4, 2.0e-3, 1.9e-3, -0.32, -0.33}; }

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Vec3 vec3(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
  Vec3 rotation_vector(double max_angle) {
    Vec3 axis = vec3(-1.0, 1.0);
    while (axis.norm() < 1e-3) axis = vec3(-1.0, 1.0);
    return axis.normalized() * uniform(0.0, max_angle);
  }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace lfcalib::testing
