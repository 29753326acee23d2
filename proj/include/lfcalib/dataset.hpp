#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lfcalib/camera_model.hpp"
#include "lfcalib/types.hpp"

namespace lfcalib {

/// Extrinsic rigid motion X_c = R X_w + t, with R stored as a Rodrigues vector.
struct Pose {
  Vec3 rotation = Vec3::Zero();
  Vec3 translation = Vec3::Zero();

  Mat3 rotation_matrix() const;
  static Pose from_matrix(const Mat3& r, const Vec3& t);
  Point3 to_camera(const Vec3& world) const { return rotation_matrix() * world + translation; }
};

/// Image formation types; they decide the sign of t_z in extrinsic recovery.
enum class CameraKind { Conventional, FocusedLongPath, FocusedShortPath };

std::string_view to_string(CameraKind kind);
CameraKind camera_kind_from_string(std::string_view name);

/// +1 when the board lies in front of the view plane (t_z > 0), -1 otherwise.
inline double depth_sign(CameraKind kind) {
  return kind == CameraKind::FocusedLongPath ? -1.0 : 1.0;
}

/// Planar checkerboard: corner (row, col) sits at (col * cell, row * cell, 0).
struct BoardSpec {
  int rows = 12;
  int cols = 12;
  double cell_mm = 3.51;

  void validate() const;
  Vec3 corner(int row, int col) const { return {col * cell_mm, row * cell_mm, 0.0}; }
  int corner_count() const { return rows * cols; }
  bool operator==(const BoardSpec&) const = default;
};

/// Inclusive ranges of the view indices.
struct ViewGrid {
  int i_min = -3;
  int i_max = 3;
  int j_min = -3;
  int j_max = 3;

  /// Grid of `rows` x `cols` views centered on 0. Even counts run from -n/2
  /// to n/2 - 1 since view indices are integers.
  static ViewGrid centered(int rows, int cols);
  int i_count() const { return i_max - i_min + 1; }
  int j_count() const { return j_max - j_min + 1; }
  int view_count() const { return i_count() * j_count(); }
  bool contains(int i, int j) const { return i >= i_min && i <= i_max && j >= j_min && j <= j_max; }
  bool operator==(const ViewGrid&) const = default;
};

struct CornerObservation {
  int row = 0;
  int col = 0;
  double u = 0.0;
  double v = 0.0;
  bool operator==(const CornerObservation&) const = default;
};

struct ViewObservations {
  int i = 0;
  int j = 0;
  std::vector<CornerObservation> corners;
  bool operator==(const ViewObservations&) const = default;
};

struct PoseObservations {
  int pose_id = 0;
  std::vector<ViewObservations> views;
  bool operator==(const PoseObservations&) const = default;
};

/// Board geometry plus per-pose, per-view corner observations in indexed
/// pixel coordinates. Occluded corners are simply absent.
struct CalibrationDataset {
  BoardSpec board;
  CameraKind camera_kind = CameraKind::Conventional;
  ViewGrid view_grid;
  std::vector<PoseObservations> poses;
  bool rectified = false;

  /// Checks key uniqueness and index bounds; throws Inconsistent.
  void validate() const;
  std::size_t observation_count() const;
  bool operator==(const CalibrationDataset&) const = default;
};

/// One corner seen in one view of one pose, flattened for the solvers.
struct Observation {
  int pose = 0;  // index into CalibrationDataset::poses
  int i = 0;
  int j = 0;
  int row = 0;
  int col = 0;
  Vec3 board_point = Vec3::Zero();
  double u = 0.0;
  double v = 0.0;
};

std::vector<Observation> flatten(const CalibrationDataset& dataset);

/// Full model state: intrinsics, distortion and one pose per board placement.
struct CalibrationParameters {
  Intrinsics intrinsics;
  Distortion distortion;
  std::vector<Pose> poses;
};

}  // namespace lfcalib
