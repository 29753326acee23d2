#pragma once

#include <Eigen/Dense>

namespace lfcalib {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Camera-frame 3D point; homogeneous w = 1 is implicit.
using Point3 = Vec3;

}  // namespace lfcalib
