#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lfcalib/camera_model.hpp"
#include "lfcalib/dataset.hpp"
#include "lfcalib/mpc_core.hpp"
#include "lfcalib/types.hpp"

namespace lfcalib {

/// The 4x3 map from board coordinates (X_w, Y_w, 1) to the homogeneous point
/// reconstructed from indexed pixels, H = P [r1 r2 t; 0 0 1]. Normalized so
/// that h(3, 2) == 1.
struct Homography43 {
  Eigen::Matrix<double, 4, 3> h = Eigen::Matrix<double, 4, 3>::Zero();

  /// Top-left 3x2 block (the images of the first two rotation columns).
  Eigen::Matrix<double, 3, 2> g() const { return h.topLeftCorner<3, 2>(); }
  /// Max deviation of the bottom row from (0, 0, 1).
  double bottom_row_deviation() const;
};

/// One board corner and every indexed ray (s=i, t=j, x=u, y=v, f=1) observing it.
struct BoardPointRays {
  Vec2 board = Vec2::Zero();
  std::vector<Ray> rays;
};

struct LinearTolerances {
  double nullspace_ratio = 1e-6;  // second-smallest / largest singular value, homography
  double rank_ratio = 1e-12;      // fourth singular value / largest, B system
  double collinear_ratio = 1e-9;  // smallest / largest singular value of board points
};

/// Per-pose estimate of rho = (k_i k_v) / (k_j k_u) from a homography whose
/// u- and v-rows carry separate depth rows. rho == 1 exactly when the
/// decoding satisfies k_i/k_j == k_u/k_v.
double estimate_view_aspect(std::span<const BoardPointRays> points, const LinearTolerances& tol = {});

/// Solves (M kron [X_w Y_w 1]) vec(H) = 0 for a row-major H by its smallest
/// right singular vector. With `aspect` != 1 the j indices are divided by it
/// before solving and the second row of H is rescaled afterwards, so that
/// H = P [r1 r2 t; 0 0 1] holds exactly for decodings violating the aspect
/// condition. Inputs are conditioned (centered and scaled) before the solve.
Homography43 estimate_homography(std::span<const BoardPointRays> points, double aspect = 1.0,
                                 const LinearTolerances& tol = {});

/// The five distinct nonzero entries of the symmetric matrix B = A^-T A^-1.
struct BMatrix {
  double b11 = 0.0;
  double b13 = 0.0;
  double b22 = 0.0;
  double b23 = 0.0;
  double b33 = 0.0;

  Mat3 matrix() const;
  Eigen::Matrix<double, 5, 1> vector() const;
  static BMatrix from_vector(const Eigen::Matrix<double, 5, 1>& b);
};

/// The two rows each pose contributes to the homogeneous system in b.
Eigen::Matrix<double, 2, 5> b_constraint_rows(const Homography43& h);

/// Stacks b_constraint_rows over poses and returns the null vector with b11 > 0.
BMatrix solve_b(std::span<const Homography43> homographies, const LinearTolerances& tol = {});

/// B assembled from the upper-triangular inverse of the 3x3 block of
/// p_from_intrinsics(intr). Test and diagnostic helper.
BMatrix analytic_b(const Intrinsics& intr);

/// B with the entries as written in closed form under the aspect condition
/// k_i/k_j == k_u/k_v (b23 = k_j^2 v_0 / k_v).
BMatrix closed_form_b(const Intrinsics& intr);

struct PartialIntrinsics {
  double k_u = 0.0;
  double k_v = 0.0;
  double u_0 = 0.0;
  double v_0 = 0.0;
  Mat3 a_inv = Mat3::Identity();  // upper triangular, arbitrary positive scale
};

/// Cholesky factorization B = L L^T, A^-1 := L^T, and the element ratios
/// k_u = a11/a33, k_v = aspect * a22/a33, u_0 = a13/a33, v_0 = a23/a33.
PartialIntrinsics intrinsics_from_b(const BMatrix& b, double aspect = 1.0);

struct ExtrinsicEstimate {
  Pose pose;
  double scale = 0.0;  // lambda, signed
};

/// Rotation and translation of one board placement from its homography.
/// The sign of lambda is chosen so t_z > 0 (Conventional, FocusedShortPath)
/// or t_z < 0 (FocusedLongPath); R is projected onto SO(3).
ExtrinsicEstimate extrinsics_from_h(const Homography43& h, const Mat3& a_inv, CameraKind kind);

/// Solves i k_i = X_c - x Z_c and j k_j = Y_c - y Z_c in the least-squares
/// sense over all observations of all poses, with x, y decoded by `partial`.
std::pair<double, double> solve_ki_kj(std::span<const Pose> poses,
                                      std::span<const Observation> observations,
                                      const PartialIntrinsics& partial);

struct LinearResult {
  Intrinsics intrinsics;
  std::vector<Pose> poses;
  std::vector<Homography43> homographies;
  BMatrix b;
  double aspect = 1.0;
  std::vector<std::string> warnings;
};

struct LinearOptions {
  LinearTolerances tol;
  /// Estimate rho from the data; when false rho = 1 is assumed.
  bool estimate_aspect = true;
};

/// Groups one pose's observations into per-corner indexed ray bundles.
std::vector<BoardPointRays> board_point_rays(const PoseObservations& pose, const BoardSpec& board);

/// Closed-form initialization: per-pose homographies, B, Cholesky,
/// extrinsics, then k_i and k_j.
LinearResult linear_calibrate(const CalibrationDataset& dataset, CameraKind kind,
                              const LinearOptions& options = {});

}  // namespace lfcalib
