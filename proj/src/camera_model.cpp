#include "lfcalib/camera_model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "lfcalib/errors.hpp"

namespace lfcalib {

void Intrinsics::validate() const {
  for (double k : {k_i, k_j, k_u, k_v}) {
    if (k == 0.0 || !std::isfinite(k)) {
      throw Error(ErrorKind::InvalidIntrinsics, "scale factors must be finite and nonzero");
    }
  }
  if (!std::isfinite(u_0) || !std::isfinite(v_0)) {
    throw Error(ErrorKind::InvalidIntrinsics, "offsets must be finite");
  }
}

Eigen::Matrix<double, 5, 5> Intrinsics::decoding_matrix() const {
  Eigen::Matrix<double, 5, 5> d = Eigen::Matrix<double, 5, 5>::Zero();
  d(0, 0) = k_i;
  d(1, 1) = k_j;
  d(2, 2) = k_u;
  d(2, 4) = u_0;
  d(3, 3) = k_v;
  d(3, 4) = v_0;
  d(4, 4) = 1.0;
  return d;
}

Ray decode(const IndexedRay& px, const Intrinsics& intr) {
  return {intr.k_i * px.i, intr.k_j * px.j, intr.k_u * px.u + intr.u_0,
          intr.k_v * px.v + intr.v_0, 1.0};
}

Ray decode(const PixelIndex& px, const Intrinsics& intr) {
  return decode(IndexedRay{static_cast<double>(px.i), static_cast<double>(px.j), px.u, px.v}, intr);
}

IndexedRay encode(const Ray& ray, const Intrinsics& intr) {
  if (ray.f != 1.0) throw Error(ErrorKind::InvalidArgument, "encode expects a ray with f = 1");
  return {ray.s / intr.k_i, ray.t / intr.k_j, (ray.x - intr.u_0) / intr.k_u,
          (ray.y - intr.v_0) / intr.k_v};
}

Vec2 undistort(double x, double y, double s, double t, const Distortion& d) {
  const double r2 = x * x + y * y;
  const double radial = 1.0 + d.k_1 * r2 + d.k_2 * r2 * r2;
  return {radial * x + d.k_3 * s, radial * y + d.k_4 * t};
}

Vec2 distort(double xu, double yu, double s, double t, const Distortion& d,
             const DistortOptions& options) {
  if (d.is_zero()) return {xu, yu};
  const Vec2 target(xu, yu);
  // The view-dependent shift is exact; start from the radially undistorted guess.
  Vec2 p(xu - d.k_3 * s, yu - d.k_4 * t);
  Vec2 residual = undistort(p.x(), p.y(), s, t, d) - target;
  const double scale = std::max(1.0, target.norm());
  for (int iter = 0; iter < options.max_iter; ++iter) {
    if (residual.norm() <= options.tolerance * scale) return p;
    const double r2 = p.squaredNorm();
    const double radial = 1.0 + d.k_1 * r2 + d.k_2 * r2 * r2;
    const double g = 2.0 * (d.k_1 + 2.0 * d.k_2 * r2);  // d(radial)/d(r2) * 2
    Eigen::Matrix2d jac;
    jac << radial + g * p.x() * p.x(), g * p.x() * p.y(),
           g * p.x() * p.y(), radial + g * p.y() * p.y();
    const Vec2 step = jac.partialPivLu().solve(residual);
    if (!step.allFinite()) break;
    // Halve the step until the residual decreases.
    double alpha = 1.0;
    for (int k = 0; k < 30; ++k, alpha *= 0.5) {
      const Vec2 trial = p - alpha * step;
      const Vec2 r = undistort(trial.x(), trial.y(), s, t, d) - target;
      if (r.norm() < residual.norm()) {
        p = trial;
        residual = r;
        break;
      }
    }
    if (alpha < 1e-8) break;
  }
  if (residual.norm() <= options.tolerance * scale * 1e2) return p;
  std::ostringstream os;
  os << "inverse distortion did not converge at (" << xu << ", " << yu << ")";
  throw Error(ErrorKind::NoConvergence, os.str());
}

}  // namespace lfcalib
