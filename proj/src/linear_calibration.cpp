#include "lfcalib/linear_calibration.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "lfcalib/errors.hpp"
#include "lfcalib/rotation.hpp"
#include "lfcalib/transforms.hpp"

namespace lfcalib {

namespace {

struct NullVector {
  VecX vector;
  VecX singular_values;  // descending, padded with zeros to the column count
};

// Right singular vector of the smallest singular value. Tall systems are
// reduced by QR first; the singular values and right vectors are unchanged.
NullVector smallest_right_singular_vector(const MatX& a) {
  const Eigen::Index n = a.cols();
  MatX reduced;
  if (a.rows() > n) {
    Eigen::HouseholderQR<MatX> qr(a);
    reduced = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  } else {
    reduced = a;
  }
  Eigen::JacobiSVD<MatX> svd(reduced, Eigen::ComputeFullV);
  NullVector out;
  out.singular_values = VecX::Zero(n);
  out.singular_values.head(svd.singularValues().size()) = svd.singularValues();
  out.vector = svd.matrixV().col(n - 1);
  return out;
}

// Centering/scaling of pixel and board coordinates used to condition the
// homography systems.
struct Conditioning {
  double cu = 0.0, cv = 0.0, pixel_scale = 1.0;
  Mat3 board = Mat3::Identity();  // x~ = board * (X_w, Y_w, 1)
};

Conditioning make_conditioning(std::span<const BoardPointRays> points) {
  Conditioning c;
  double su = 0.0, sv = 0.0, n_rays = 0.0;
  double sx = 0.0, sy = 0.0;
  for (const auto& p : points) {
    sx += p.board.x();
    sy += p.board.y();
    for (const Ray& r : p.rays) {
      su += r.x;
      sv += r.y;
      n_rays += 1.0;
    }
  }
  c.cu = su / n_rays;
  c.cv = sv / n_rays;
  const double cx = sx / static_cast<double>(points.size());
  const double cy = sy / static_cast<double>(points.size());
  double spread_px = 0.0, spread_board = 0.0;
  for (const auto& p : points) {
    spread_board += (p.board - Vec2(cx, cy)).squaredNorm();
    for (const Ray& r : p.rays) spread_px += (r.x - c.cu) * (r.x - c.cu) + (r.y - c.cv) * (r.y - c.cv);
  }
  c.pixel_scale = std::sqrt(spread_px / (2.0 * n_rays));
  const double board_scale = std::sqrt(spread_board / (2.0 * static_cast<double>(points.size())));
  if (!(c.pixel_scale > 0.0)) c.pixel_scale = 1.0;
  c.board << 1.0 / board_scale, 0.0, -cx / board_scale,
             0.0, 1.0 / board_scale, -cy / board_scale,
             0.0, 0.0, 1.0;
  return c;
}

// Checks the preconditions shared by both homography systems.
void check_board_points(std::span<const BoardPointRays> points, const LinearTolerances& tol) {
  int usable = 0;
  for (const auto& p : points) {
    std::set<std::pair<double, double>> centers;
    for (const Ray& r : p.rays) {
      if (r.f != 1.0) throw Error(ErrorKind::InvalidArgument, "indexed rays must have f = 1");
      centers.insert({r.s, r.t});
    }
    if (centers.size() >= 2) ++usable;
  }
  if (usable < 3) {
    throw Error(ErrorKind::InsufficientRays,
                "need at least 3 board points each seen from 2 distinct views, got " +
                    std::to_string(usable));
  }
  Eigen::Matrix<double, Eigen::Dynamic, 3> pts(static_cast<Eigen::Index>(points.size()), 3);
  Vec2 mean = Vec2::Zero();
  for (const auto& p : points) mean += p.board;
  mean /= static_cast<double>(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    pts.row(static_cast<Eigen::Index>(k)) << points[k].board.x() - mean.x(),
        points[k].board.y() - mean.y(), 0.0;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, Eigen::Dynamic, 3>> svd(pts);
  const auto& sv = svd.singularValues();
  if (sv(0) == 0.0 || sv(1) <= tol.collinear_ratio * sv(0)) {
    throw Error(ErrorKind::DegenerateBoard, "board points are collinear");
  }
}

std::size_t ray_count(std::span<const BoardPointRays> points) {
  std::size_t n = 0;
  for (const auto& p : points) n += p.rays.size();
  return n;
}

template <int Rows>
Eigen::Matrix<double, Rows, 3> denormalize(const VecX& h, const Eigen::Matrix<double, Rows, Rows>& n_inv,
                                           const Mat3& board) {
  Eigen::Matrix<double, Rows, 3> hm;
  for (int r = 0; r < Rows; ++r) hm.row(r) = h.segment<3>(3 * r).transpose();
  return n_inv * hm * board;
}

}  // namespace

double Homography43::bottom_row_deviation() const {
  return std::max({std::abs(h(3, 0)), std::abs(h(3, 1)), std::abs(h(3, 2) - 1.0)});
}

double estimate_view_aspect(std::span<const BoardPointRays> points, const LinearTolerances& tol) {
  check_board_points(points, tol);
  const Conditioning c = make_conditioning(points);
  // Rows: u-equation [1, 0, -u, 0, -i], v-equation [0, 1, 0, -v, -j], each
  // kron'd with the conditioned board point.
  MatX a(2 * static_cast<Eigen::Index>(ray_count(points)), 15);
  Eigen::Index row = 0;
  for (const auto& p : points) {
    const Vec3 xw = c.board * p.board.homogeneous();
    for (const Ray& r : p.rays) {
      const double un = (r.x - c.cu) / c.pixel_scale;
      const double vn = (r.y - c.cv) / c.pixel_scale;
      Eigen::Matrix<double, 1, 5> mu, mv;
      mu << 1.0, 0.0, -un, 0.0, -r.s;
      mv << 0.0, 1.0, 0.0, -vn, -r.t;
      for (int k = 0; k < 5; ++k) {
        a.block<1, 3>(row, 3 * k) = mu(k) * xw.transpose();
        a.block<1, 3>(row + 1, 3 * k) = mv(k) * xw.transpose();
      }
      row += 2;
    }
  }
  const NullVector nv = smallest_right_singular_vector(a);
  if (nv.singular_values(13) <= tol.nullspace_ratio * nv.singular_values(0)) {
    throw Error(ErrorKind::NullspaceAmbiguous, "decoupled homography system has no unique solution");
  }
  Eigen::Matrix<double, 5, 5> n = Eigen::Matrix<double, 5, 5>::Identity();
  n(0, 2) = -c.cu;
  n(2, 2) = c.pixel_scale;
  n(1, 3) = -c.cv;
  n(3, 3) = c.pixel_scale;
  const Eigen::Matrix<double, 5, 3> h5 = denormalize<5>(nv.vector, n.inverse(), c.board);
  const Vec3 h3u = h5.row(2).transpose();
  const Vec3 h3v = h5.row(3).transpose();
  const double denom = h3u.squaredNorm();
  if (!(denom > 0.0)) throw Error(ErrorKind::ZeroScale, "vanishing depth row in homography");
  return h3u.dot(h3v) / denom;
}

Homography43 estimate_homography(std::span<const BoardPointRays> points, double aspect,
                                 const LinearTolerances& tol) {
  if (!(aspect > 0.0) || !std::isfinite(aspect)) {
    throw Error(ErrorKind::InvalidArgument, "aspect factor must be positive");
  }
  check_board_points(points, tol);
  const Conditioning c = make_conditioning(points);
  MatX a(2 * static_cast<Eigen::Index>(ray_count(points)), 12);
  Eigen::Index row = 0;
  for (const auto& p : points) {
    const Vec3 xw = c.board * p.board.homogeneous();
    for (const Ray& r : p.rays) {
      const double un = (r.x - c.cu) / c.pixel_scale;
      const double vn = (r.y - c.cv) / c.pixel_scale;
      Eigen::Matrix<double, 1, 4> mu, mv;
      mu << 1.0, 0.0, -un, -r.s;
      mv << 0.0, 1.0, -vn, -r.t / aspect;
      for (int k = 0; k < 4; ++k) {
        a.block<1, 3>(row, 3 * k) = mu(k) * xw.transpose();
        a.block<1, 3>(row + 1, 3 * k) = mv(k) * xw.transpose();
      }
      row += 2;
    }
  }
  const NullVector nv = smallest_right_singular_vector(a);
  if (nv.singular_values(10) <= tol.nullspace_ratio * nv.singular_values(0)) {
    throw Error(ErrorKind::NullspaceAmbiguous, "homography system has no unique solution");
  }
  // Row vector m of the raw system equals m~ N with the conditioned m~.
  Mat4 n = Mat4::Identity();
  n(0, 2) = -c.cu;
  n(1, 2) = -c.cv;
  n(2, 2) = c.pixel_scale;
  Eigen::Matrix<double, 4, 3> h = denormalize<4>(nv.vector, n.inverse(), c.board);
  const double h43 = h(3, 2);
  if (std::abs(h43) <= 1e-14 * h.norm()) {
    throw Error(ErrorKind::ZeroScale, "homography has a vanishing h43");
  }
  h /= h43;
  h.row(1) *= aspect;
  Homography43 out;
  out.h = h;
  return out;
}

Mat3 BMatrix::matrix() const {
  Mat3 m;
  m << b11, 0.0, b13,
       0.0, b22, b23,
       b13, b23, b33;
  return m;
}

Eigen::Matrix<double, 5, 1> BMatrix::vector() const {
  return (Eigen::Matrix<double, 5, 1>() << b11, b13, b22, b23, b33).finished();
}

BMatrix BMatrix::from_vector(const Eigen::Matrix<double, 5, 1>& b) {
  return {b(0), b(1), b(2), b(3), b(4)};
}

Eigen::Matrix<double, 2, 5> b_constraint_rows(const Homography43& hom) {
  const Eigen::Matrix<double, 3, 2> g = hom.g();
  const double g11 = g(0, 0), g21 = g(1, 0), g31 = g(2, 0);
  const double g12 = g(0, 1), g22 = g(1, 1), g32 = g(2, 1);
  Eigen::Matrix<double, 2, 5> v;
  // g1^T B g2 = 0
  v.row(0) << g11 * g12, g11 * g32 + g12 * g31, g21 * g22, g21 * g32 + g31 * g22, g31 * g32;
  // g1^T B g1 - g2^T B g2 = 0
  v.row(1) << g11 * g11 - g12 * g12, 2.0 * (g11 * g31 - g12 * g32), g21 * g21 - g22 * g22,
      2.0 * (g21 * g31 - g22 * g32), g31 * g31 - g32 * g32;
  return v;
}

BMatrix solve_b(std::span<const Homography43> homographies, const LinearTolerances& tol) {
  if (homographies.empty()) throw Error(ErrorKind::RankDeficient, "no homographies");
  MatX v(2 * static_cast<Eigen::Index>(homographies.size()), 5);
  for (std::size_t p = 0; p < homographies.size(); ++p) {
    v.middleRows<2>(2 * static_cast<Eigen::Index>(p)) = b_constraint_rows(homographies[p]);
  }
  const NullVector nv = smallest_right_singular_vector(v);
  if (!(nv.singular_values(0) > 0.0) || nv.singular_values(3) <= tol.rank_ratio * nv.singular_values(0)) {
    throw Error(ErrorKind::RankDeficient,
                "B system has rank < 4; add poses with distinct rotations");
  }
  Eigen::Matrix<double, 5, 1> b = nv.vector;
  if (b(0) < 0.0) b = -b;
  return BMatrix::from_vector(b);
}

BMatrix analytic_b(const Intrinsics& intr) {
  const Mat3 a = p_from_intrinsics(intr).matrix().topLeftCorner<3, 3>();
  const Mat3 a_inv = a.inverse();
  const Mat3 b = a_inv.transpose() * a_inv;
  return {b(0, 0), b(0, 2), b(1, 1), b(1, 2), b(2, 2)};
}

BMatrix closed_form_b(const Intrinsics& in) {
  const double ki2 = in.k_i * in.k_i;
  const double kj2 = in.k_j * in.k_j;
  return {ki2, ki2 * in.u_0 / in.k_u, kj2, kj2 * in.v_0 / in.k_v,
          ki2 / (in.k_u * in.k_u) * (1.0 + in.u_0 * in.u_0 + in.v_0 * in.v_0)};
}

PartialIntrinsics intrinsics_from_b(const BMatrix& b_in, double aspect) {
  BMatrix b = b_in;
  if (b.b11 < 0.0) b = BMatrix::from_vector(-b.vector());
  Eigen::LLT<Mat3> llt(b.matrix());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "B is not positive definite; add poses or reduce noise");
  }
  PartialIntrinsics out;
  out.a_inv = llt.matrixL().transpose();
  const Mat3& a = out.a_inv;
  out.k_u = a(0, 0) / a(2, 2);
  out.k_v = aspect * a(1, 1) / a(2, 2);
  out.u_0 = a(0, 2) / a(2, 2);
  out.v_0 = a(1, 2) / a(2, 2);
  return out;
}

ExtrinsicEstimate extrinsics_from_h(const Homography43& hom, const Mat3& a_inv, CameraKind kind) {
  if (!a_inv.allFinite() || std::abs(a_inv.determinant()) == 0.0) {
    throw Error(ErrorKind::InvalidArgument, "A^-1 must be invertible");
  }
  const Vec3 g1 = hom.h.block<3, 1>(0, 0);
  const Vec3 g2 = hom.h.block<3, 1>(0, 1);
  const Vec3 h3 = hom.h.block<3, 1>(0, 2);
  const Vec3 ag1 = a_inv * g1;
  const Vec3 ag2 = a_inv * g2;
  double lambda = 0.5 * (ag1.norm() + ag2.norm());
  if (!(lambda > 1e-14 * a_inv.norm() * hom.g().norm()) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::ZeroScale, "homography scale vanishes");
  }
  Vec3 t = a_inv * h3 / lambda;
  if (t.z() * depth_sign(kind) < 0.0) {
    lambda = -lambda;
    t = -t;
  }
  const Vec3 r1 = ag1 / lambda;
  const Vec3 r2 = ag2 / lambda;
  Mat3 r;
  r.col(0) = r1;
  r.col(1) = r2;
  r.col(2) = r1.cross(r2);
  return {Pose::from_matrix(nearest_rotation(r), t), lambda};
}

std::pair<double, double> solve_ki_kj(std::span<const Pose> poses,
                                      std::span<const Observation> observations,
                                      const PartialIntrinsics& partial) {
  std::vector<Mat3> rotations;
  rotations.reserve(poses.size());
  for (const Pose& p : poses) rotations.push_back(p.rotation_matrix());
  double sii = 0.0, sib = 0.0, sjj = 0.0, sjb = 0.0;
  for (const Observation& o : observations) {
    if (o.pose < 0 || static_cast<std::size_t>(o.pose) >= poses.size()) {
      throw Error(ErrorKind::InvalidArgument, "observation refers to an unknown pose");
    }
    const Vec3 xc = rotations[static_cast<std::size_t>(o.pose)] * o.board_point +
                    poses[static_cast<std::size_t>(o.pose)].translation;
    if (o.i != 0) {
      const double x = partial.k_u * o.u + partial.u_0;
      sii += static_cast<double>(o.i) * o.i;
      sib += o.i * (xc.x() - x * xc.z());
    }
    if (o.j != 0) {
      const double y = partial.k_v * o.v + partial.v_0;
      sjj += static_cast<double>(o.j) * o.j;
      sjb += o.j * (xc.y() - y * xc.z());
    }
  }
  if (sii == 0.0) throw Error(ErrorKind::NoParallax, "no observation with i != 0");
  if (sjj == 0.0) throw Error(ErrorKind::NoParallax, "no observation with j != 0");
  return {sib / sii, sjb / sjj};
}

std::vector<BoardPointRays> board_point_rays(const PoseObservations& pose, const BoardSpec& board) {
  std::map<std::pair<int, int>, BoardPointRays> by_corner;
  for (const ViewObservations& v : pose.views) {
    for (const CornerObservation& c : v.corners) {
      auto& entry = by_corner[{c.row, c.col}];
      entry.board = board.corner(c.row, c.col).head<2>();
      entry.rays.push_back({static_cast<double>(v.i), static_cast<double>(v.j), c.u, c.v, 1.0});
    }
  }
  std::vector<BoardPointRays> out;
  out.reserve(by_corner.size());
  for (auto& [key, value] : by_corner) out.push_back(std::move(value));
  return out;
}

LinearResult linear_calibrate(const CalibrationDataset& dataset, CameraKind kind,
                              const LinearOptions& options) {
  dataset.validate();
  const std::size_t n_poses = dataset.poses.size();
  if (n_poses < 2) {
    throw Error(ErrorKind::InsufficientPoses,
                "insufficient poses: need at least 2, got " + std::to_string(n_poses));
  }
  LinearResult result;
  if (n_poses == 2) {
    result.warnings.push_back("only 2 poses; the closed-form estimate will be poorly conditioned");
  }

  std::vector<std::vector<BoardPointRays>> rays(n_poses);
  for (std::size_t p = 0; p < n_poses; ++p) rays[p] = board_point_rays(dataset.poses[p], dataset.board);

  auto pose_context = [&](std::size_t p) {
    return "pose " + std::to_string(dataset.poses[p].pose_id);
  };

  result.aspect = 1.0;
  if (options.estimate_aspect) {
    double sum = 0.0;
    for (std::size_t p = 0; p < n_poses; ++p) {
      try {
        sum += estimate_view_aspect(rays[p], options.tol);
      } catch (const Error& e) {
        rethrow_with_context(e, pose_context(p));
      }
    }
    result.aspect = sum / static_cast<double>(n_poses);
  }

  result.homographies.reserve(n_poses);
  for (std::size_t p = 0; p < n_poses; ++p) {
    try {
      result.homographies.push_back(estimate_homography(rays[p], result.aspect, options.tol));
    } catch (const Error& e) {
      rethrow_with_context(e, pose_context(p));
    }
  }

  result.b = solve_b(result.homographies, options.tol);
  const PartialIntrinsics partial = intrinsics_from_b(result.b, result.aspect);

  result.poses.reserve(n_poses);
  for (std::size_t p = 0; p < n_poses; ++p) {
    try {
      result.poses.push_back(extrinsics_from_h(result.homographies[p], partial.a_inv, kind).pose);
    } catch (const Error& e) {
      rethrow_with_context(e, pose_context(p));
    }
  }

  const std::vector<Observation> observations = flatten(dataset);
  const auto [k_i, k_j] = solve_ki_kj(result.poses, observations, partial);
  result.intrinsics = {k_i, k_j, partial.k_u, partial.k_v, partial.u_0, partial.v_0};
  return result;
}

}  // namespace lfcalib
