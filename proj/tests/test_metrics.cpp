#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "lfcalib/errors.hpp"
#include "lfcalib/metrics.hpp"
#include "lfcalib/pipeline.hpp"
#include "lfcalib/simulator.hpp"

using namespace lfcalib;

namespace {

SimulatedData small(double sigma) {
  SimConfig c = SimConfig::close_range();
  c.noise_sigma = sigma;
  c.view_rows = 3;
  c.view_cols = 4;
  c.board.rows = 5;
  c.board.cols = 6;
  return generate(c);
}

}  // namespace

TEST(PointRayDistance, TiltedRay) {
  // |(1,0,0) x (0.01,0,1)| / |(0.01,0,1)| = 1 / sqrt(1.0001)
  EXPECT_NEAR(point_ray_distance({1, 0, 0}, Ray{0, 0, 0.01, 0, 1}), 0.99995000374968770, 1e-15);
  EXPECT_NEAR(point_ray_distance({2, 3, 5}, Ray{2, 3, 0, 0, 1}), 0.0, 1e-15);
  EXPECT_NEAR(point_ray_distance({1, 1, 7}, Ray{0, 0, 0, 0, 1}), std::sqrt(2.0), 1e-15);
}

TEST(Metrics, ZeroAtTruthWithoutNoise) {
  const SimulatedData s = small(0.0);
  const MetricReport r = evaluate_metrics(s.truth, s.dataset);
  EXPECT_EQ(r.count, s.dataset.observation_count());
  EXPECT_LT(r.rms_reproj_px, 1e-8);
  EXPECT_LT(r.max_reproj_px, 1e-8);
  EXPECT_LT(r.rms_ray_reproj_mm, 1e-8);
}

TEST(Metrics, RmsMatchesNoiseLevel) {
  SimConfig c = SimConfig::close_range();
  c.noise_sigma = 0.5;
  const SimulatedData s = generate(c);
  const MetricReport r = reprojection_error_px(s.truth, s.dataset);
  EXPECT_NEAR(r.rms_reproj_px, 0.5, 0.01);
  // Mean of a 2D Rayleigh norm is sigma sqrt(pi/2).
  EXPECT_NEAR(r.mean_reproj_px, 0.5 * std::sqrt(std::numbers::pi / 2), 0.01);
  EXPECT_GE(r.max_reproj_px, r.mean_reproj_px);
}

TEST(Metrics, AggregationLaw) {
  const SimulatedData s = small(0.7);
  const MetricReport r = evaluate_metrics(s.truth, s.dataset);
  ASSERT_EQ(r.per_view.size(), 12u);
  double sq = 0.0, sq_mm = 0.0;
  std::size_t n = 0, n_pose = 0;
  for (const ViewError& v : r.per_view) {
    sq += v.rms_px * v.rms_px * v.count;
    n += v.count;
  }
  for (const PoseError& p : r.per_pose) {
    sq_mm += p.rms_mm * p.rms_mm * p.count;
    n_pose += p.count;
  }
  EXPECT_EQ(n, r.count);
  EXPECT_EQ(n_pose, r.count);
  EXPECT_NEAR(std::sqrt(sq / n), r.rms_reproj_px, 1e-12);
  EXPECT_NEAR(std::sqrt(sq_mm / n_pose), r.rms_ray_reproj_mm, 1e-12);
  for (std::size_t k = 1; k < r.per_view.size(); ++k) {
    const auto& a = r.per_view[k - 1];
    const auto& b = r.per_view[k];
    EXPECT_TRUE(a.i < b.i || (a.i == b.i && a.j < b.j));
  }
}

TEST(Metrics, ShapeMismatch) {
  const SimulatedData s = small(0.0);
  CalibrationParameters p = s.truth;
  p.poses.pop_back();
  try {
    evaluate_metrics(p, s.dataset);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Inconsistent);
  }
}

TEST(Metrics, CsvRows) {
  const SimulatedData s = small(0.5);
  const MetricReport r = evaluate_metrics(s.truth, s.dataset);
  std::ostringstream os;
  write_metric_csv(os, r);
  const std::string csv = os.str();
  EXPECT_EQ(csv.rfind("metric,scope,value\n", 0), 0u);
  EXPECT_NE(csv.find("rms_reproj_px,pose:0,"), std::string::npos);
  EXPECT_NE(csv.find("rms_reproj_px,view:-1:-2,"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 5 + 2 * 3 + 12);
}

TEST(PoseExport, RoundTrip) {
  const SimulatedData s = small(0.0);
  const PoseExport e = build_pose_export(s.truth, s.dataset);
  EXPECT_EQ(e.corners.size(), 3u * 30u);
  ASSERT_EQ(e.frustum.size(), 8u);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(e.frustum[k].z(), 0.0);
  for (int k = 4; k < 8; ++k) EXPECT_GT(e.frustum[k].z(), 0.0);
  for (const ExportedCorner& c : e.corners) {
    const Vec3 expect = s.truth.poses[c.pose_id].to_camera(s.dataset.board.corner(c.row, c.col));
    EXPECT_LT((c.position - expect).norm(), 1e-12);
  }

  std::stringstream ss;
  write_pose_export(ss, e);
  const PoseExport back = read_pose_export(ss);
  ASSERT_EQ(back.corners.size(), e.corners.size());
  for (std::size_t k = 0; k < e.corners.size(); ++k) {
    EXPECT_EQ(back.corners[k].position, e.corners[k].position);
    EXPECT_EQ(back.corners[k].row, e.corners[k].row);
  }
  ASSERT_EQ(back.frustum.size(), 8u);
  EXPECT_EQ(back.frustum[7], e.frustum[7]);
}

TEST(PoseExport, MalformedLine) {
  std::istringstream in("# comment\ncorner 0 1 2 3.0 4.0\n");
  try {
    read_pose_export(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(PoseExport, UnwritablePath) {
  const SimulatedData s = small(0.0);
  EXPECT_THROW(export_poses(s.truth, s.dataset, "/nonexistent-dir/x/poses.txt"), Error);
}

TEST(PointRayDistance, ExampleAtHundredMillimetres) {
  EXPECT_NEAR(point_ray_distance({0, 0, 100}, Ray{0, 0, 0, 0, 1}), 0.0, 1e-15);
  EXPECT_NEAR(point_ray_distance({0, 0, 100}, Ray{0, 0, 0.01, 0, 1}), 100 * std::sin(std::atan(0.01)), 1e-12);
  // Scaling the direction leaves the distance unchanged.
  EXPECT_NEAR(point_ray_distance({0, 0, 100}, Ray{0, 0, 0.03, 0, 3}), 100 * std::sin(std::atan(0.01)), 1e-12);
}

TEST(PoseExport, IdentityPose) {
  CalibrationDataset d;
  d.board = {2, 3, 4.0};
  d.view_grid = {-1, 1, -1, 1};
  d.poses = {PoseObservations{7, {}}};
  CalibrationParameters p;
  p.intrinsics = {0.24, 0.25, 2e-3, 1.9e-3, -0.32, -0.33};
  p.poses = {Pose{Vec3::Zero(), Vec3(0, 0, 200)}};
  const PoseExport e = build_pose_export(p, d);
  ASSERT_EQ(e.corners.size(), 6u);
  EXPECT_EQ(e.corners[0].pose_id, 7);
  EXPECT_EQ(e.corners[0].position, Vec3(0, 0, 200));
  EXPECT_EQ(e.corners[5].position, Vec3(8, 4, 200));
}

TEST(Metrics, OptimizedNoiseConsistencyAndHomogeneousViews) {
  SimConfig c = SimConfig::close_range();
  c.noise_sigma = 0.5;
  const SimulatedData s = generate(c, 11);
  PipelineOptions o;
  o.optimize.refine_distortion = false;
  const MetricReport r = reprojection_error_px(calibrate(s.dataset, o).final, s.dataset);
  EXPECT_GE(r.rms_reproj_px, 0.42);
  EXPECT_LE(r.rms_reproj_px, 0.58);
  double lo = 1e9, hi = 0.0;
  for (const ViewError& v : r.per_view) {
    lo = std::min(lo, v.rms_px);
    hi = std::max(hi, v.rms_px);
  }
  EXPECT_LT(hi / lo, 2.0);
  EXPECT_LE(lo, r.rms_reproj_px);
  EXPECT_GE(hi, r.rms_reproj_px);
}
