#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "lfcalib/dataset.hpp"
#include "lfcalib/mpc_core.hpp"

namespace lfcalib {

struct ViewError {
  int i = 0;
  int j = 0;
  double rms_px = 0.0;
  std::size_t count = 0;
};

struct PoseError {
  int pose_id = 0;
  double rms_px = 0.0;
  double rms_mm = 0.0;
  std::size_t count = 0;
};

/// RMS values are per coordinate: sqrt(sum(ex^2 + ey^2) / (2 N)), so i.i.d.
/// pixel noise of sigma gives an RMS of sigma. `mean_reproj_px` averages the
/// Euclidean norms.
struct MetricReport {
  std::size_t count = 0;
  double rms_reproj_px = 0.0;
  double mean_reproj_px = 0.0;
  double max_reproj_px = 0.0;
  double rms_ray_reproj_mm = 0.0;
  std::vector<ViewError> per_view;  // sorted by (i, j)
  std::vector<PoseError> per_pose;  // dataset order
};

/// Pixel re-projection errors: model residuals divided by (k_u, k_v).
MetricReport reprojection_error_px(const CalibrationParameters& params, const CalibrationDataset& dataset);

/// Perpendicular distance (mm) from each board corner, in camera frame, to
/// the decoded and rectified measurement ray. Fills rms_ray_reproj_mm and
/// per_pose[].rms_mm.
MetricReport ray_reprojection_error_mm(const CalibrationParameters& params,
                                       const CalibrationDataset& dataset);

/// Both of the above merged into one report.
MetricReport evaluate_metrics(const CalibrationParameters& params, const CalibrationDataset& dataset);

/// Distance from `point` to the line through (s, t, 0) with direction (x, y, f).
double point_ray_distance(const Point3& point, const Ray& ray);

/// CSV rows "metric,scope,value" for the report (header included).
void write_metric_csv(std::ostream& os, const MetricReport& report);

struct ExportedCorner {
  int pose_id = 0;
  int row = 0;
  int col = 0;
  Vec3 position = Vec3::Zero();
};

struct PoseExport {
  std::vector<ExportedCorner> corners;
  std::vector<Vec3> frustum;  // 4 view-plane corners then 4 far-plane corners
};

/// Board corners of every pose in camera frame plus the camera frustum.
PoseExport build_pose_export(const CalibrationParameters& params, const CalibrationDataset& dataset);

/// Plain text, one record per line:
///   corner <pose_id> <row> <col> <X> <Y> <Z>
///   frustum <index> <X> <Y> <Z>
/// Lines starting with '#' are comments. Numbers use 17 significant digits.
void write_pose_export(std::ostream& os, const PoseExport& data);
PoseExport read_pose_export(std::istream& is);

/// Writes the export to `path`; throws Io naming the path on failure.
void export_poses(const CalibrationParameters& params, const CalibrationDataset& dataset,
                  const std::string& path);

}  // namespace lfcalib
