#pragma once

#include <span>

#include <Eigen/Core>

#include "lfcalib/types.hpp"

namespace lfcalib {

/// A ray in two-parallel-plane form: it passes through the projection
/// center (s, t, 0) on the view plane and (x, y, f) on the image plane.
struct Ray {
  double s = 0.0;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double f = 1.0;

  bool valid() const;
};

/// A raw measurement: integer view index (i, j) and continuous pixel (u, v).
struct PixelIndex {
  int i = 0;
  int j = 0;
  double u = 0.0;
  double v = 0.0;
};

struct CoreTolerances {
  double eps_z = 1e-12;         // |Z| below this cannot be projected
  double eps_parallel = 1e-10;  // two-ray image-coordinate separation
  double tol_rank = 1e-8;       // sigma_{n-1} / sigma_max for triangulation
};

/// Projects `point` into the view centered at (s, t) with plane spacing `f`.
/// Throws DegenerateProjection when the point lies on the view plane.
Vec2 project(const Point3& point, double s, double t, double f, double eps_z = 1e-12);

/// The ray from view (s, t) through `point`.
Ray ray_through(const Point3& point, double s, double t, double f, double eps_z = 1e-12);

/// The two rows this ray contributes to the measurement matrix M; M times
/// (X, Y, Z, 1) vanishes for every point on the ray.
Eigen::Matrix<double, 2, 4> measurement_rows(const Ray& ray);

/// Stacks measurement_rows for every ray into a 2n x 4 matrix.
Eigen::Matrix<double, Eigen::Dynamic, 4> measurement_matrix(std::span<const Ray> rays);

/// Closed-form intersection of two rays sharing the same f. Uses the
/// horizontal form when |x_i - x_j| >= |y_i - y_j|, the vertical one otherwise.
Point3 intersect_two_rays(const Ray& ri, const Ray& rj, double eps_parallel = 1e-10);

/// Point minimising |M (X,Y,Z,1)^T| over the homogeneous solution, i.e. the
/// right singular vector of M with the smallest singular value.
Point3 triangulate(std::span<const Ray> rays, const CoreTolerances& tol = {});

}  // namespace lfcalib
