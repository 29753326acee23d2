#include "lfcalib/transforms.hpp"

#include <Eigen/Geometry>

#include <cmath>

#include <Eigen/LU>

#include "lfcalib/errors.hpp"

namespace lfcalib {

namespace {

void check_spacing(double f) {
  if (!(f > 0.0) || !std::isfinite(f)) {
    throw Error(ErrorKind::InvalidSpacing, "plane spacing must be positive and finite");
  }
}

}  // namespace

ProjTransform4::ProjTransform4(const Mat4& m) : m_(m) {
  if (!m_.allFinite() || std::abs(m_.determinant()) <= 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "projective transform must be invertible");
  }
}

Point3 ProjTransform4::apply(const Point3& p) const {
  const Vec4 h = m_ * p.homogeneous();
  return h.head<3>() / h(3);
}

ProjTransform4 ProjTransform4::inverse() const { return ProjTransform4(m_.inverse()); }

ProjTransform4 ProjTransform4::operator*(const ProjTransform4& rhs) const {
  return ProjTransform4(m_ * rhs.m_);
}

ProjTransform4 p1_respace(double f, double f_new) {
  check_spacing(f);
  check_spacing(f_new);
  Mat4 m = Mat4::Identity();
  m(2, 2) = f_new / f;
  return ProjTransform4(m);
}

ProjTransform4 p2_offset(const RayOffset& off, double f) {
  check_spacing(f);
  Mat4 m = Mat4::Identity();
  m(0, 2) = off.x0 / f;
  m(1, 2) = off.y0 / f;
  m(0, 3) = off.s0;
  m(1, 3) = off.t0;
  return ProjTransform4(m);
}

ProjTransform4 p3_scale(const RayScale& k, double tol_aspect) {
  for (double v : {k.k_s, k.k_t, k.k_x, k.k_y}) {
    if (v == 0.0 || !std::isfinite(v)) {
      throw Error(ErrorKind::InvalidArgument, "scale factors must be finite and nonzero");
    }
  }
  // k_s/k_t == k_x/k_y  <=>  k_s k_y == k_t k_x
  const double lhs = k.k_s * k.k_y;
  const double rhs = k.k_t * k.k_x;
  if (std::abs(lhs - rhs) > tol_aspect * std::max(std::abs(lhs), std::abs(rhs))) {
    throw Error(ErrorKind::AspectMismatch, "k_s/k_t must equal k_x/k_y");
  }
  Mat4 m = Mat4::Identity();
  m(0, 0) = k.k_s;
  m(1, 1) = k.k_t;
  m(2, 2) = k.k_s / k.k_x;
  return ProjTransform4(m);
}

ProjTransform4 p_from_intrinsics(const Intrinsics& intr) {
  intr.validate();
  Mat4 m = Mat4::Zero();
  m(0, 0) = 1.0 / intr.k_i;
  m(0, 2) = -intr.u_0 / intr.k_i;
  m(1, 1) = 1.0 / intr.k_j;
  m(1, 2) = -intr.v_0 / intr.k_j;
  m(2, 2) = intr.k_u / intr.k_i;
  m(3, 3) = 1.0;
  return ProjTransform4(m);
}

Ray respace_ray(const Ray& r, double f_new) {
  check_spacing(f_new);
  return {r.s, r.t, r.x, r.y, f_new};
}

Ray offset_ray(const Ray& r, const RayOffset& m) {
  return {r.s + m.s0, r.t + m.t0, r.x + m.x0, r.y + m.y0, r.f};
}

Ray scale_ray(const Ray& r, const RayScale& k) {
  return {k.k_s * r.s, k.k_t * r.t, k.k_x * r.x, k.k_y * r.y, r.f};
}

}  // namespace lfcalib
