#pragma once

#include <span>
#include <string>
#include <string_view>

#include "lfcalib/dataset.hpp"
#include "lfcalib/types.hpp"

namespace lfcalib {

/// Packing of CalibrationParameters into one vector:
///   [k_i, k_j, k_u, k_v, u_0, v_0, k_1, k_2, k_3, k_4,
///    omega_1, t_1, ..., omega_P, t_P]
/// for a total of 10 + 6P entries.
inline constexpr int kIntrinsicParams = 6;
inline constexpr int kDistortionParams = 4;
inline constexpr int kCameraParams = kIntrinsicParams + kDistortionParams;
inline constexpr int kPoseParams = 6;

VecX pack(const CalibrationParameters& params);
CalibrationParameters unpack(const VecX& theta, std::size_t n_poses);

/// Units of the residual vector. Normalized: image-plane units at spacing 1.
/// Pixel: the two components divided by k_u and k_v of theta, which is what
/// the optimizer minimizes (the normalized cost decays toward 0 as k_u, k_v
/// shrink and the board recedes).
enum class ResidualScale { Normalized, Pixel };

/// Rectified observed projection minus predicted projection, two entries per
/// observation in dataset order (pose, view, corner).
VecX residuals(const VecX& theta, std::span<const Observation> observations, std::size_t n_poses,
               ResidualScale scale = ResidualScale::Normalized);

/// Dense Jacobian of residuals(); intended for checks and small problems.
MatX jacobian(const VecX& theta, std::span<const Observation> observations, std::size_t n_poses,
              ResidualScale scale = ResidualScale::Normalized);

/// Gauss-Newton normal equations J^T J and J^T r, assembled from the
/// per-pose block structure without materializing J.
struct NormalEquations {
  MatX jtj;
  VecX jtr;
  double cost = 0.0;  // sum of squared residuals
};
NormalEquations normal_equations(const VecX& theta, std::span<const Observation> observations,
                                 std::size_t n_poses, ResidualScale scale = ResidualScale::Pixel);

enum class Termination { CostConverged, GradientConverged, StepConverged, MaxIterations };
std::string_view to_string(Termination t);

struct OptimizeOptions {
  int max_iter = 200;
  double cost_tolerance = 1e-12;      // relative cost decrease
  double gradient_tolerance = 1e-10;  // infinity norm of the scaled gradient
  double step_tolerance = 1e-14;      // relative scaled step length
  double initial_damping = 1e-3;      // times max diag(J^T J)
  bool refine_distortion = true;      // false keeps k_1..k_4 fixed at their start values
};

struct OptimizeReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  Termination termination = Termination::MaxIterations;
};

struct OptimizeResult {
  CalibrationParameters params;
  OptimizeReport report;
};

/// Levenberg-Marquardt over all 10 + 6P parameters, minimizing the sum of
/// squared pixel-scaled residuals. Damping follows Nielsen's update in a parameter space
/// scaled by the column norms of the initial Jacobian.
OptimizeResult optimize(const CalibrationParameters& initial, const CalibrationDataset& dataset,
                        const OptimizeOptions& options = {});

}  // namespace lfcalib
