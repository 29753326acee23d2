#include "lfcalib/mpc_core.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "lfcalib/errors.hpp"

namespace lfcalib {

bool Ray::valid() const {
  return std::isfinite(s) && std::isfinite(t) && std::isfinite(x) && std::isfinite(y) &&
         std::isfinite(f) && f > 0.0;
}

Vec2 project(const Point3& point, double s, double t, double f, double eps_z) {
  if (!(f > 0.0)) throw Error(ErrorKind::InvalidSpacing, "plane spacing must be positive");
  if (std::abs(point.z()) < eps_z) {
    std::ostringstream os;
    os << "point Z=" << point.z() << " lies on the view plane";
    throw Error(ErrorKind::DegenerateProjection, os.str());
  }
  return {f * (point.x() - s) / point.z(), f * (point.y() - t) / point.z()};
}

Ray ray_through(const Point3& point, double s, double t, double f, double eps_z) {
  const Vec2 xy = project(point, s, t, f, eps_z);
  return {s, t, xy.x(), xy.y(), f};
}

Eigen::Matrix<double, 2, 4> measurement_rows(const Ray& r) {
  Eigen::Matrix<double, 2, 4> m;
  m << r.f, 0.0, -r.x, -r.f * r.s,
       0.0, r.f, -r.y, -r.f * r.t;
  return m;
}

Eigen::Matrix<double, Eigen::Dynamic, 4> measurement_matrix(std::span<const Ray> rays) {
  Eigen::Matrix<double, Eigen::Dynamic, 4> m(2 * static_cast<Eigen::Index>(rays.size()), 4);
  for (std::size_t k = 0; k < rays.size(); ++k) {
    m.middleRows<2>(2 * static_cast<Eigen::Index>(k)) = measurement_rows(rays[k]);
  }
  return m;
}

Point3 intersect_two_rays(const Ray& ri, const Ray& rj, double eps_parallel) {
  if (!ri.valid() || !rj.valid()) throw Error(ErrorKind::InvalidArgument, "invalid ray");
  if (ri.f != rj.f) throw Error(ErrorKind::InvalidArgument, "rays must share the plane spacing");
  const double f = ri.f;
  const double dx = ri.x - rj.x;
  const double dy = ri.y - rj.y;
  if (std::abs(dx) < eps_parallel && std::abs(dy) < eps_parallel) {
    throw Error(ErrorKind::ParallelRays, "rays have identical directions");
  }
  if (std::abs(dx) >= std::abs(dy)) {
    return Point3(rj.s * ri.x - ri.s * rj.x,
                  ri.t * dx - ri.y * (ri.s - rj.s),
                  f * (rj.s - ri.s)) / dx;
  }
  return Point3(ri.s * dy - ri.x * (ri.t - rj.t),
                rj.t * ri.y - ri.t * rj.y,
                f * (rj.t - ri.t)) / dy;
}

Point3 triangulate(std::span<const Ray> rays, const CoreTolerances& tol) {
  if (rays.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two rays");
  const double f = rays.front().f;
  bool distinct_centers = false;
  for (const Ray& r : rays) {
    if (!r.valid()) throw Error(ErrorKind::InvalidArgument, "invalid ray");
    if (r.f != f) throw Error(ErrorKind::InvalidArgument, "rays must share the plane spacing");
    if (r.s != rays.front().s || r.t != rays.front().t) distinct_centers = true;
  }
  if (!distinct_centers) {
    throw Error(ErrorKind::RankDeficient, "all rays share one projection center; depth unobservable");
  }

  const Eigen::Matrix<double, Eigen::Dynamic, 4> m = measurement_matrix(rays);
  Eigen::JacobiSVD<Eigen::Matrix<double, Eigen::Dynamic, 4>> svd(m, Eigen::ComputeFullV);
  const Vec4 sv = svd.singularValues();
  if (sv(2) <= tol.tol_rank * sv(0)) {
    throw Error(ErrorKind::RankDeficient, "ray bundle does not determine a unique point");
  }
  const Vec4 h = svd.matrixV().col(3);
  if (std::abs(h(3)) <= tol.eps_parallel * h.head<3>().norm()) {
    throw Error(ErrorKind::ParallelRays, "rays meet at infinity");
  }
  return h.head<3>() / h(3);
}

}  // namespace lfcalib
