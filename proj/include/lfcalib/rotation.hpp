#pragma once

#include "lfcalib/types.hpp"

namespace lfcalib {

/// Axis-angle exponential map: rotation by |omega| radians about omega/|omega|.
Mat3 rodrigues(const Vec3& omega);

/// Inverse of rodrigues; the returned angle lies in [0, pi].
Vec3 rodrigues_inv(const Mat3& rotation);

/// Left Jacobian of the exponential map: d(rodrigues(w) X)/dw = -[R X]_x J_l(w).
Mat3 so3_left_jacobian(const Vec3& omega);

Mat3 skew(const Vec3& v);

/// Nearest rotation in Frobenius norm (polar factor with det = +1).
Mat3 nearest_rotation(const Mat3& m);

/// Intrinsic X-Y-Z Euler angles (radians): R = Rx(a) Ry(b) Rz(c).
Mat3 euler_xyz(const Vec3& angles);

/// Angle (radians) of the relative rotation a^T b.
double rotation_angle_between(const Mat3& a, const Mat3& b);

}  // namespace lfcalib
