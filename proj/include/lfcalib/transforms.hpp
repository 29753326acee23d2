#pragma once

#include "lfcalib/camera_model.hpp"
#include "lfcalib/mpc_core.hpp"
#include "lfcalib/types.hpp"

namespace lfcalib {

/// Additive change of ray coordinates (s, t, x, y) -> (s+s0, t+t0, x+x0, y+y0).
struct RayOffset {
  double s0 = 0.0;
  double t0 = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
};

/// Multiplicative change of ray coordinates (s, t, x, y) -> (k_s s, k_t t, k_x x, k_y y).
struct RayScale {
  double k_s = 1.0;
  double k_t = 1.0;
  double k_x = 1.0;
  double k_y = 1.0;
};

/// A 4x4 projective transform of homogeneous points induced by a linear
/// change of ray coordinates. All constructors in this header produce an
/// invertible matrix with bottom row (0, 0, 0, 1).
class ProjTransform4 {
 public:
  ProjTransform4() : m_(Mat4::Identity()) {}
  explicit ProjTransform4(const Mat4& m);

  const Mat4& matrix() const { return m_; }

  /// Applies the transform to a point and dehomogenizes.
  Point3 apply(const Point3& p) const;

  ProjTransform4 inverse() const;
  ProjTransform4 operator*(const ProjTransform4& rhs) const;

 private:
  Mat4 m_;
};

/// Change of plane spacing f -> f_new.
ProjTransform4 p1_respace(double f, double f_new);

/// Offset of ray coordinates at plane spacing f.
ProjTransform4 p2_offset(const RayOffset& m, double f);

/// Scaling of ray coordinates. Only defined when k_s/k_t == k_x/k_y (within
/// `tol_aspect`, relative); otherwise throws AspectMismatch.
ProjTransform4 p3_scale(const RayScale& k, double tol_aspect = 1e-9);

/// The transform P taking points reconstructed from decoded rays to points
/// reconstructed from indexed pixels: P X_c = X_d. Built exactly as
/// diag-plus-shear from the intrinsics; the aspect condition is not checked.
ProjTransform4 p_from_intrinsics(const Intrinsics& intr);

// Ray-side counterparts of the transforms above.
Ray respace_ray(const Ray& r, double f_new);
Ray offset_ray(const Ray& r, const RayOffset& m);
Ray scale_ray(const Ray& r, const RayScale& k);

}  // namespace lfcalib
