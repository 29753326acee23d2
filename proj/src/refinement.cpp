#include "lfcalib/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "lfcalib/errors.hpp"
#include "lfcalib/rotation.hpp"

namespace lfcalib {

namespace {

constexpr int kLocal = kCameraParams + kPoseParams;
using LocalJacobian = Eigen::Matrix<double, 2, kLocal>;

struct PoseCache {
  Mat3 rotation;
  Vec3 translation;
  Mat3 left_jacobian;
};

std::vector<PoseCache> pose_caches(const VecX& theta, std::size_t n_poses) {
  std::vector<PoseCache> out(n_poses);
  for (std::size_t p = 0; p < n_poses; ++p) {
    const Eigen::Index base = kCameraParams + kPoseParams * static_cast<Eigen::Index>(p);
    const Vec3 omega = theta.segment<3>(base);
    out[p] = {rodrigues(omega), theta.segment<3>(base + 3), so3_left_jacobian(omega)};
  }
  return out;
}

std::string describe(const Observation& o) {
  std::ostringstream os;
  os << "pose #" << o.pose << ", view (" << o.i << ", " << o.j << "), corner (" << o.row << ", "
     << o.col << ")";
  return os.str();
}

// Residual of one observation and, optionally, its 2 x 16 Jacobian with
// respect to [camera params | omega, t of the observation's pose].
Vec2 evaluate(const double* cam, const PoseCache& pc, const Observation& o, LocalJacobian* jac) {
  const double k_i = cam[0], k_j = cam[1], k_u = cam[2], k_v = cam[3], u_0 = cam[4], v_0 = cam[5];
  const double k1 = cam[6], k2 = cam[7], k3 = cam[8], k4 = cam[9];
  const double s = k_i * o.i;
  const double t = k_j * o.j;
  const double x = k_u * o.u + u_0;
  const double y = k_v * o.v + v_0;
  const double r2 = x * x + y * y;
  const double radial = 1.0 + k1 * r2 + k2 * r2 * r2;
  const Vec3 rx = pc.rotation * o.board_point;
  const Vec3 xc = rx + pc.translation;
  if (std::abs(xc.z()) < 1e-12) {
    throw Error(ErrorKind::DegenerateProjection, "board point on the view plane at " + describe(o));
  }
  const double inv_z = 1.0 / xc.z();
  const double x_hat = (xc.x() - s) * inv_z;
  const double y_hat = (xc.y() - t) * inv_z;
  const Vec2 r(radial * x + k3 * s - x_hat, radial * y + k4 * t - y_hat);

  if (jac != nullptr) {
    LocalJacobian& j = *jac;
    const double g2 = 2.0 * (k1 + 2.0 * k2 * r2);  // d(radial)/dx = g2 * x
    const double dxu_dx = radial + g2 * x * x;
    const double dxu_dy = g2 * x * y;
    const double dyu_dy = radial + g2 * y * y;
    j.setZero();
    j(0, 0) = (k3 + inv_z) * o.i;
    j(1, 1) = (k4 + inv_z) * o.j;
    j(0, 2) = dxu_dx * o.u;
    j(1, 2) = dxu_dy * o.u;
    j(0, 3) = dxu_dy * o.v;
    j(1, 3) = dyu_dy * o.v;
    j(0, 4) = dxu_dx;
    j(1, 4) = dxu_dy;
    j(0, 5) = dxu_dy;
    j(1, 5) = dyu_dy;
    j(0, 6) = r2 * x;
    j(1, 6) = r2 * y;
    j(0, 7) = r2 * r2 * x;
    j(1, 7) = r2 * r2 * y;
    j(0, 8) = s;
    j(1, 9) = t;
    // d(x_hat, y_hat)/dX_c
    Eigen::Matrix<double, 2, 3> dproj;
    dproj << inv_z, 0.0, -x_hat * inv_z,
             0.0, inv_z, -y_hat * inv_z;
    const Mat3 dxc_domega = -skew(rx) * pc.left_jacobian;
    j.block<2, 3>(0, kCameraParams) = -dproj * dxc_domega;
    j.block<2, 3>(0, kCameraParams + 3) = -dproj;
  }
  return r;
}

/// Applies the pixel scaling to a residual and its Jacobian in place.
void to_pixels(const double* cam, Vec2& r, LocalJacobian* jac) {
  const double inv_ku = 1.0 / cam[2];
  const double inv_kv = 1.0 / cam[3];
  if (jac != nullptr) {
    jac->row(0) *= inv_ku;
    jac->row(1) *= inv_kv;
    (*jac)(0, 2) -= r.x() * inv_ku * inv_ku;
    (*jac)(1, 3) -= r.y() * inv_kv * inv_kv;
  }
  r.x() *= inv_ku;
  r.y() *= inv_kv;
}

Vec2 evaluate_scaled(const double* cam, const PoseCache& pc, const Observation& o, LocalJacobian* jac,
                     ResidualScale scale) {
  Vec2 r = evaluate(cam, pc, o, jac);
  if (scale == ResidualScale::Pixel) to_pixels(cam, r, jac);
  return r;
}

void check_dimensions(const VecX& theta, std::size_t n_poses) {
  if (theta.size() != kCameraParams + kPoseParams * static_cast<Eigen::Index>(n_poses)) {
    throw Error(ErrorKind::InvalidArgument, "parameter vector does not match the pose count");
  }
}

}  // namespace

VecX pack(const CalibrationParameters& params) {
  VecX theta(kCameraParams + kPoseParams * static_cast<Eigen::Index>(params.poses.size()));
  const Intrinsics& in = params.intrinsics;
  const Distortion& d = params.distortion;
  theta.head<kCameraParams>() << in.k_i, in.k_j, in.k_u, in.k_v, in.u_0, in.v_0, d.k_1, d.k_2, d.k_3,
      d.k_4;
  for (std::size_t p = 0; p < params.poses.size(); ++p) {
    const Eigen::Index base = kCameraParams + kPoseParams * static_cast<Eigen::Index>(p);
    theta.segment<3>(base) = params.poses[p].rotation;
    theta.segment<3>(base + 3) = params.poses[p].translation;
  }
  return theta;
}

CalibrationParameters unpack(const VecX& theta, std::size_t n_poses) {
  check_dimensions(theta, n_poses);
  CalibrationParameters out;
  out.intrinsics = {theta(0), theta(1), theta(2), theta(3), theta(4), theta(5)};
  out.distortion = {theta(6), theta(7), theta(8), theta(9)};
  out.poses.resize(n_poses);
  for (std::size_t p = 0; p < n_poses; ++p) {
    const Eigen::Index base = kCameraParams + kPoseParams * static_cast<Eigen::Index>(p);
    out.poses[p] = {theta.segment<3>(base), theta.segment<3>(base + 3)};
  }
  return out;
}

VecX residuals(const VecX& theta, std::span<const Observation> observations, std::size_t n_poses,
               ResidualScale scale) {
  check_dimensions(theta, n_poses);
  const std::vector<PoseCache> caches = pose_caches(theta, n_poses);
  VecX r(2 * static_cast<Eigen::Index>(observations.size()));
  for (std::size_t k = 0; k < observations.size(); ++k) {
    const Observation& o = observations[k];
    r.segment<2>(2 * static_cast<Eigen::Index>(k)) =
        evaluate_scaled(theta.data(), caches[static_cast<std::size_t>(o.pose)], o, nullptr, scale);
  }
  return r;
}

MatX jacobian(const VecX& theta, std::span<const Observation> observations, std::size_t n_poses,
              ResidualScale scale) {
  check_dimensions(theta, n_poses);
  const std::vector<PoseCache> caches = pose_caches(theta, n_poses);
  MatX jac = MatX::Zero(2 * static_cast<Eigen::Index>(observations.size()), theta.size());
  LocalJacobian local;
  for (std::size_t k = 0; k < observations.size(); ++k) {
    const Observation& o = observations[k];
    evaluate_scaled(theta.data(), caches[static_cast<std::size_t>(o.pose)], o, &local, scale);
    const Eigen::Index row = 2 * static_cast<Eigen::Index>(k);
    jac.block<2, kCameraParams>(row, 0) = local.leftCols<kCameraParams>();
    jac.block<2, kPoseParams>(row, kCameraParams + kPoseParams * o.pose) =
        local.rightCols<kPoseParams>();
  }
  return jac;
}

NormalEquations normal_equations(const VecX& theta, std::span<const Observation> observations,
                                 std::size_t n_poses, ResidualScale scale) {
  check_dimensions(theta, n_poses);
  const std::vector<PoseCache> caches = pose_caches(theta, n_poses);
  const Eigen::Index n = theta.size();
  NormalEquations ne{MatX::Zero(n, n), VecX::Zero(n), 0.0};

  // Per-pose accumulation of the local 16 x 16 block, scattered afterwards.
  std::vector<Eigen::Matrix<double, kLocal, kLocal>> blocks(n_poses,
                                                           Eigen::Matrix<double, kLocal, kLocal>::Zero());
  std::vector<Eigen::Matrix<double, kLocal, 1>> grads(n_poses, Eigen::Matrix<double, kLocal, 1>::Zero());
  LocalJacobian local;
  for (const Observation& o : observations) {
    const auto p = static_cast<std::size_t>(o.pose);
    const Vec2 r = evaluate_scaled(theta.data(), caches[p], o, &local, scale);
    if (!r.allFinite() || !local.allFinite()) {
      throw Error(ErrorKind::NonFinite, "non-finite residual or Jacobian at " + describe(o));
    }
    blocks[p].noalias() += local.transpose() * local;
    grads[p].noalias() += local.transpose() * r;
    ne.cost += r.squaredNorm();
  }
  for (std::size_t p = 0; p < n_poses; ++p) {
    const Eigen::Index base = kCameraParams + kPoseParams * static_cast<Eigen::Index>(p);
    const auto& b = blocks[p];
    ne.jtj.topLeftCorner<kCameraParams, kCameraParams>() += b.topLeftCorner<kCameraParams, kCameraParams>();
    ne.jtj.block<kCameraParams, kPoseParams>(0, base) = b.topRightCorner<kCameraParams, kPoseParams>();
    ne.jtj.block<kPoseParams, kCameraParams>(base, 0) = b.bottomLeftCorner<kPoseParams, kCameraParams>();
    ne.jtj.block<kPoseParams, kPoseParams>(base, base) = b.bottomRightCorner<kPoseParams, kPoseParams>();
    ne.jtr.head<kCameraParams>() += grads[p].head<kCameraParams>();
    ne.jtr.segment<kPoseParams>(base) = grads[p].tail<kPoseParams>();
  }
  return ne;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::CostConverged: return "cost_converged";
    case Termination::GradientConverged: return "gradient_converged";
    case Termination::StepConverged: return "step_converged";
    case Termination::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

OptimizeResult optimize(const CalibrationParameters& initial, const CalibrationDataset& dataset,
                        const OptimizeOptions& options) {
  if (initial.poses.size() != dataset.poses.size()) {
    throw Error(ErrorKind::InvalidArgument, "initial parameters and dataset disagree on pose count");
  }
  const std::size_t n_poses = dataset.poses.size();
  const std::vector<Observation> obs = flatten(dataset);
  VecX theta = pack(initial);
  const Eigen::Index n = theta.size();

  // Parameters held fixed get an identity row/column and zero gradient.
  std::vector<bool> frozen(static_cast<std::size_t>(n), false);
  if (!options.refine_distortion) {
    for (int k = kIntrinsicParams; k < kCameraParams; ++k) frozen[static_cast<std::size_t>(k)] = true;
  }
  auto apply_mask = [&](NormalEquations& ne) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!frozen[static_cast<std::size_t>(k)]) continue;
      ne.jtj.row(k).setZero();
      ne.jtj.col(k).setZero();
      ne.jtj(k, k) = 1.0;
      ne.jtr(k) = 0.0;
    }
  };

  NormalEquations ne = normal_equations(theta, obs, n_poses);
  apply_mask(ne);
  OptimizeResult result;
  result.report.initial_cost = ne.cost;

  // Column scaling from the initial Jacobian.
  VecX scale = ne.jtj.diagonal().cwiseSqrt();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(scale(k) > 0.0) || !std::isfinite(scale(k))) scale(k) = 1.0;
  }
  const VecX inv_scale = scale.cwiseInverse();

  auto scaled_system = [&](const NormalEquations& e, MatX& a, VecX& g) {
    a = inv_scale.asDiagonal() * e.jtj * inv_scale.asDiagonal();
    g = inv_scale.cwiseProduct(e.jtr);
  };

  MatX a;
  VecX g;
  scaled_system(ne, a, g);
  double mu = options.initial_damping * a.diagonal().maxCoeff();
  double nu = 2.0;
  double cost = ne.cost;
  result.report.termination = Termination::MaxIterations;

  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (cost == 0.0) {
      result.report.termination = Termination::CostConverged;
      break;
    }
    if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      result.report.termination = Termination::GradientConverged;
      break;
    }
    MatX damped = a;
    damped.diagonal().array() += mu;
    const VecX step_scaled = damped.ldlt().solve(-g);
    const VecX scaled_theta = scale.cwiseProduct(theta);
    if (step_scaled.norm() <= options.step_tolerance * (scaled_theta.norm() + options.step_tolerance)) {
      result.report.termination = Termination::StepConverged;
      break;
    }
    const VecX candidate = theta + inv_scale.cwiseProduct(step_scaled);
    const double predicted = step_scaled.dot(mu * step_scaled - g);

    bool accepted = false;
    NormalEquations trial;
    try {
      trial = normal_equations(candidate, obs, n_poses);
      accepted = std::isfinite(trial.cost) && trial.cost < cost;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateProjection && e.kind() != ErrorKind::NonFinite) throw;
    }
    if (accepted) {
      const double gain = predicted > 0.0 ? (cost - trial.cost) / predicted : 1.0;
      const double relative_decrease = (cost - trial.cost) / cost;
      theta = candidate;
      cost = trial.cost;
      ne = std::move(trial);
      apply_mask(ne);
      scaled_system(ne, a, g);
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * gain - 1.0, 3));
      nu = 2.0;
      if (relative_decrease < options.cost_tolerance) {
        ++iter;
        result.report.termination = Termination::CostConverged;
        break;
      }
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu)) {
        ++iter;
        result.report.termination = Termination::StepConverged;
        break;
      }
    }
  }
  result.report.iterations = iter;
  result.report.final_cost = cost;
  result.params = unpack(theta, n_poses);
  return result;
}

}  // namespace lfcalib
