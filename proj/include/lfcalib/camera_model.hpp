#pragma once

#include "lfcalib/mpc_core.hpp"
#include "lfcalib/types.hpp"

namespace lfcalib {

/// The six-parameter decoding set mapping indexed pixels (i, j, u, v) to
/// normalized physical rays (s, t, x, y) with plane spacing 1:
///   s = k_i i,  t = k_j j,  x = k_u u + u_0,  y = k_v v + v_0.
struct Intrinsics {
  double k_i = 1.0;
  double k_j = 1.0;
  double k_u = 1.0;
  double k_v = 1.0;
  double u_0 = 0.0;
  double v_0 = 0.0;

  /// Throws InvalidIntrinsics on a zero or non-finite scale factor.
  void validate() const;

  /// Principal point of a sub-aperture image, in pixels.
  Vec2 principal_point() const { return {-u_0 / k_u, -v_0 / k_v}; }

  /// The 5x5 homogeneous decoding matrix D.
  Eigen::Matrix<double, 5, 5> decoding_matrix() const;

  bool operator==(const Intrinsics&) const = default;
};

/// Radial (k_1, k_2) and view-dependent (k_3, k_4) image-plane distortion.
struct Distortion {
  double k_1 = 0.0;
  double k_2 = 0.0;
  double k_3 = 0.0;
  double k_4 = 0.0;

  bool is_zero() const { return k_1 == 0.0 && k_2 == 0.0 && k_3 == 0.0 && k_4 == 0.0; }
  bool operator==(const Distortion&) const = default;
};

/// Indexed coordinates with continuous view indices (the image of encode).
struct IndexedRay {
  double i = 0.0;
  double j = 0.0;
  double u = 0.0;
  double v = 0.0;
};

Ray decode(const PixelIndex& px, const Intrinsics& intr);
Ray decode(const IndexedRay& px, const Intrinsics& intr);

/// Exact inverse of decode. `ray.f` must be 1.
IndexedRay encode(const Ray& ray, const Intrinsics& intr);

/// Rectifies a distorted image point seen from view (s, t).
Vec2 undistort(double x, double y, double s, double t, const Distortion& d);

struct DistortOptions {
  int max_iter = 50;
  double tolerance = 1e-14;
};

/// Numerical inverse of undistort: returns (x, y) with
/// undistort(x, y, s, t, d) == (xu, yu). Damped Newton iteration; throws
/// NoConvergence when the map is not invertible near the target.
Vec2 distort(double xu, double yu, double s, double t, const Distortion& d,
             const DistortOptions& options = {});

}  // namespace lfcalib
