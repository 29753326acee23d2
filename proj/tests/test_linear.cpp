#include <gtest/gtest.h>

#include "lfcalib/errors.hpp"
#include "lfcalib/linear_calibration.hpp"
#include "lfcalib/simulator.hpp"
#include "lfcalib/transforms.hpp"
#include "test_util.hpp"

using namespace lfcalib;
using lfcalib::testing::Gen;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an lfcalib::Error";
  return ErrorKind::InvalidArgument;
}

// Indexed ray bundles of a planar board seen by a noiseless camera.
std::vector<BoardPointRays> bundles(const Intrinsics& in, const Pose& pose, const std::vector<Vec2>& board,
                                    int half_views = 2) {
  std::vector<BoardPointRays> out;
  const Mat3 r = pose.rotation_matrix();
  for (const Vec2& b : board) {
    BoardPointRays p;
    p.board = b;
    const Vec3 xc = r * Vec3(b.x(), b.y(), 0) + pose.translation;
    for (int i = -half_views; i <= half_views; ++i) {
      for (int j = -half_views; j <= half_views; ++j) {
        const IndexedRay px = encode(ray_through(xc, in.k_i * i, in.k_j * j, 1.0), in);
        p.rays.push_back({px.i, px.j, px.u, px.v, 1.0});
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Vec2> grid(int n, double cell) {
  std::vector<Vec2> pts;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) pts.push_back({c * cell, r * cell});
  return pts;
}

// H = P [r1 r2 t; 0 0 1], normalized so h43 = 1.
Homography43 oracle_h(const Intrinsics& in, const Pose& pose) {
  const Mat3 r = pose.rotation_matrix();
  Eigen::Matrix<double, 4, 3> rt = Eigen::Matrix<double, 4, 3>::Zero();
  rt.block<3, 1>(0, 0) = r.col(0);
  rt.block<3, 1>(0, 1) = r.col(1);
  rt.block<3, 1>(0, 2) = pose.translation;
  rt(3, 2) = 1.0;
  Homography43 h;
  h.h = p_from_intrinsics(in).matrix() * rt;
  h.h /= h.h(3, 2);
  return h;
}

double rel_frobenius(const Eigen::Matrix<double, 4, 3>& a, const Eigen::Matrix<double, 4, 3>& b) {
  return (a - b).norm() / b.norm();
}

Pose random_pose(Gen& g) {
  return {g.rotation_vector(0.6), Vec3(g.uniform(-30, -10), g.uniform(-30, -10), g.uniform(60, 150))};
}

Intrinsics consistent() { return {0.24, 0.25, 2.0e-3, 2.0e-3 * 0.25 / 0.24, -0.32, -0.33}; }

SimConfig noiseless(int poses) {
  SimConfig c = SimConfig::close_range();
  c.noise_sigma = 0.0;
  c.n_poses = poses;
  c.fixed_rotations_deg = SimConfig::fixed_three_poses();
  c.fixed_rotations_deg.resize(static_cast<std::size_t>(poses), Vec3(20, -15, 10));
  return c;
}

}  // namespace

TEST(Homography, IdentityCamera) {
  const Intrinsics id{1, 1, 1, 1, 0, 0};
  const auto pts = bundles(id, Pose{Vec3::Zero(), Vec3(0, 0, 1)}, grid(4, 0.1), 1);
  const Homography43 h = estimate_homography(pts);
  Eigen::Matrix<double, 4, 3> expect;
  expect << 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1;
  EXPECT_LT((h.h - expect).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Homography, SatisfiesStackedSystem) {
  Gen g(30);
  const Intrinsics in = consistent();
  for (int k = 0; k < 20; ++k) {
    const auto pts = bundles(in, random_pose(g), grid(6, 3.51));
    const Homography43 h = estimate_homography(pts);
    double res = 0.0;
    for (const auto& p : pts)
      for (const Ray& r : p.rays) res += (measurement_rows(r) * h.h * Vec3(p.board.x(), p.board.y(), 1)).squaredNorm();
    EXPECT_LT(std::sqrt(res) / h.h.norm(), 1e-10);
  }
}

TEST(Homography, MatchesIntrinsicTransformWithAspectCorrection) {
  Gen g(31);
  const Intrinsics in = lfcalib::testing::reference_camera();
  for (int k = 0; k < 20; ++k) {
    const Pose pose = random_pose(g);
    const auto pts = bundles(in, pose, grid(6, 3.51));
    const double rho = estimate_view_aspect(pts);
    EXPECT_NEAR(rho, in.k_i * in.k_v / (in.k_j * in.k_u), 1e-9);
    const Homography43 h = estimate_homography(pts, rho);
    EXPECT_LT(rel_frobenius(h.h, oracle_h(in, pose).h), 1e-9);
    EXPECT_LT(h.bottom_row_deviation(), 1e-9);
  }
}

TEST(Homography, UnitAspectIsBiasedOnMismatchedCamera) {
  Gen g(32);
  const Intrinsics in = lfcalib::testing::reference_camera();
  const Pose pose = random_pose(g);
  const auto pts = bundles(in, pose, grid(6, 3.51));
  EXPECT_GT(rel_frobenius(estimate_homography(pts, 1.0).h, oracle_h(in, pose).h), 1e-6);
}

TEST(Homography, CollinearBoard) {
  const auto pts = bundles(lfcalib::testing::reference_camera(), Pose{Vec3::Zero(), Vec3(0, 0, 100)},
                           {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  EXPECT_EQ(kind_of([&] { estimate_homography(pts); }), ErrorKind::DegenerateBoard);
}

TEST(Homography, NeedsTwoViewsPerPoint) {
  auto pts = bundles(lfcalib::testing::reference_camera(), Pose{Vec3::Zero(), Vec3(0, 0, 100)}, grid(3, 3.51), 0);
  EXPECT_EQ(kind_of([&] { estimate_homography(pts); }), ErrorKind::InsufficientRays);
}

TEST(SolveB, AnalyticBSatisfiesConstraints) {
  Gen g(33);
  const Intrinsics in = lfcalib::testing::reference_camera();
  const BMatrix b = analytic_b(in);
  for (int k = 0; k < 50; ++k) {
    const auto rows = b_constraint_rows(oracle_h(in, random_pose(g)));
    EXPECT_LT((rows * b.vector()).norm() / (rows.norm() * b.vector().norm()), 1e-10);
  }
}

TEST(SolveB, AnalyticBFrozenValues) {
  // Normalized so b11 = 1; computed with numpy from inv(P[:3,:3]).
  const BMatrix b = analytic_b(lfcalib::testing::reference_camera_unscaled());
  const auto v = b.vector() / b.b11;
  EXPECT_NEAR(v(1), -159.99999999999994, 1e-9);
  EXPECT_NEAR(v(2), 1.0850694444444444, 1e-12);
  EXPECT_NEAR(v(3), -171.87500000000006, 1e-9);
  EXPECT_NEAR(v(4), 302825.0, 1e-6);
}

TEST(SolveB, ClosedFormAgreesUnderAspectCondition) {
  const BMatrix a = analytic_b(consistent());
  const BMatrix c = closed_form_b(consistent());
  EXPECT_LT((a.vector() / a.b11 - c.vector() / c.b11).norm() / (a.vector() / a.b11).norm(), 1e-12);
}

TEST(SolveB, SinglePoseIsRankDeficient) {
  Gen g(34);
  const std::vector<Homography43> hs{oracle_h(lfcalib::testing::reference_camera(), random_pose(g))};
  EXPECT_EQ(kind_of([&] { solve_b(hs); }), ErrorKind::RankDeficient);
}

TEST(SolveB, IdenticalPosesAreRankDeficient) {
  Gen g(35);
  const Homography43 h = oracle_h(lfcalib::testing::reference_camera(), random_pose(g));
  const std::vector<Homography43> hs{h, h, h};
  EXPECT_EQ(kind_of([&] { solve_b(hs); }), ErrorKind::RankDeficient);
}

TEST(SolveB, RecoversAnalyticDirection) {
  Gen g(36);
  const Intrinsics in = lfcalib::testing::reference_camera();
  std::vector<Homography43> hs;
  for (int k = 0; k < 3; ++k) hs.push_back(oracle_h(in, random_pose(g)));
  const auto b = solve_b(hs).vector();
  const auto truth = analytic_b(in).vector();
  EXPECT_GT(std::abs(b.dot(truth)) / (b.norm() * truth.norm()), 1.0 - 1e-9);
  EXPECT_GT(solve_b(hs).b11, 0.0);
}

TEST(IntrinsicsFromB, AnalyticReferenceCamera) {
  const Intrinsics in = lfcalib::testing::reference_camera();
  const double rho = in.k_i * in.k_v / (in.k_j * in.k_u);
  const PartialIntrinsics p = intrinsics_from_b(analytic_b(in), rho);
  EXPECT_NEAR(p.k_u, in.k_u, 1e-9 * in.k_u);
  EXPECT_NEAR(p.k_v, in.k_v, 1e-9 * in.k_v);
  EXPECT_NEAR(p.u_0, in.u_0, 1e-9);
  EXPECT_NEAR(p.v_0, in.v_0, 1e-9);
}

TEST(IntrinsicsFromB, IdentityGram) {
  const PartialIntrinsics p = intrinsics_from_b(BMatrix{1, 0, 1, 0, 1});
  EXPECT_NEAR(p.k_u, 1, 1e-15);
  EXPECT_NEAR(p.k_v, 1, 1e-15);
  EXPECT_NEAR(p.u_0, 0, 1e-15);
  EXPECT_NEAR(p.v_0, 0, 1e-15);
}

TEST(IntrinsicsFromB, SignInvariant) {
  const BMatrix b = analytic_b(lfcalib::testing::reference_camera());
  const BMatrix neg = BMatrix::from_vector(-b.vector());
  const PartialIntrinsics a = intrinsics_from_b(b), c = intrinsics_from_b(neg);
  EXPECT_DOUBLE_EQ(a.k_u, c.k_u);
  EXPECT_DOUBLE_EQ(a.v_0, c.v_0);
}

TEST(IntrinsicsFromB, NotPositiveDefinite) {
  EXPECT_EQ(kind_of([] { intrinsics_from_b(BMatrix{1, 2, 1, 0, 1}); }), ErrorKind::NotPositiveDefinite);
}

TEST(Extrinsics, NoiselessRoundTrip) {
  Gen g(37);
  const Intrinsics in = lfcalib::testing::reference_camera();
  const double rho = in.k_i * in.k_v / (in.k_j * in.k_u);
  const Mat3 a_inv = intrinsics_from_b(analytic_b(in), rho).a_inv;
  for (int k = 0; k < 50; ++k) {
    const Pose truth = random_pose(g);
    const Homography43 h = oracle_h(in, truth);
    const Pose est = extrinsics_from_h(h, a_inv, CameraKind::Conventional).pose;
    EXPECT_LT(rotation_angle_between(est.rotation_matrix(), truth.rotation_matrix()), 1e-6);
    EXPECT_LT((est.translation - truth.translation).norm(), 1e-6 * truth.translation.norm());
    Homography43 mirrored = h;
    mirrored.h.leftCols<2>() *= -1.0;
    mirrored.h.col(2) *= -1.0;
    const Pose m = extrinsics_from_h(mirrored, a_inv, CameraKind::Conventional).pose;
    EXPECT_LT((m.rotation - est.rotation).norm(), 1e-12);
    EXPECT_LT((m.translation - est.translation).norm(), 1e-9);
    const Mat3 r = est.rotation_matrix();
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-8);
  }
}

TEST(Extrinsics, LongPathFlipsDepth) {
  Gen g(38);
  const Intrinsics in = lfcalib::testing::reference_camera();
  const Mat3 a_inv = intrinsics_from_b(analytic_b(in), in.k_i * in.k_v / (in.k_j * in.k_u)).a_inv;
  const Pose est = extrinsics_from_h(oracle_h(in, random_pose(g)), a_inv, CameraKind::FocusedLongPath).pose;
  EXPECT_LT(est.translation.z(), 0.0);
}

TEST(SolveKiKj, SingleMeasurement) {
  const std::vector<Pose> poses{Pose{Vec3::Zero(), Vec3(0, 0, 1)}};
  Observation o;
  o.i = 1;
  o.j = 1;
  o.board_point = Vec3(2.4e-4, 5e-4, 0);
  o.u = 0;
  o.v = 0;
  const std::vector<Observation> obs{o};
  PartialIntrinsics p;
  p.k_u = 1;
  p.k_v = 1;
  const auto [ki, kj] = solve_ki_kj(poses, obs, p);
  EXPECT_NEAR(ki, 2.4e-4, 1e-18);
  EXPECT_NEAR(kj, 5e-4, 1e-18);
}

TEST(SolveKiKj, CenterViewOnly) {
  const std::vector<Pose> poses{Pose{Vec3::Zero(), Vec3(0, 0, 1)}};
  Observation o;
  o.board_point = Vec3(1, 1, 0);
  const std::vector<Observation> obs{o};
  EXPECT_EQ(kind_of([&] { solve_ki_kj(poses, obs, PartialIntrinsics{}); }), ErrorKind::NoParallax);
}

TEST(LinearCalibrate, NoiselessRecovery) {
  const SimulatedData sim = generate(noiseless(3));
  const LinearResult r = linear_calibrate(sim.dataset, CameraKind::Conventional);
  const auto err = relative_errors(r.intrinsics, sim.truth.intrinsics);
  for (double e : err) EXPECT_LT(e, 1e-6);
  for (std::size_t p = 0; p < r.poses.size(); ++p) {
    EXPECT_LT(rotation_angle_between(r.poses[p].rotation_matrix(), sim.truth.poses[p].rotation_matrix()), 1e-6);
    EXPECT_LT((r.poses[p].translation - sim.truth.poses[p].translation).norm(),
              1e-6 * sim.truth.poses[p].translation.norm());
    EXPECT_LT(rel_frobenius(r.homographies[p].h, oracle_h(r.intrinsics, r.poses[p]).h), 1e-6);
  }
}

TEST(LinearCalibrate, UnscaledViewSpacing) {
  // k_i, k_j tiny next to millimetre board coordinates; the
  // closed form is scale-free and still exact on noiseless data.
  SimConfig c = noiseless(3);
  c.intrinsics = lfcalib::testing::reference_camera_unscaled();
  const SimulatedData sim = generate(c);
  const LinearResult r = linear_calibrate(sim.dataset, CameraKind::Conventional);
  for (double e : relative_errors(r.intrinsics, sim.truth.intrinsics)) EXPECT_LT(e, 1e-6);
}

TEST(LinearCalibrate, TooFewPoses) {
  const SimulatedData sim = generate(noiseless(1));
  try {
    linear_calibrate(sim.dataset, CameraKind::Conventional);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientPoses);
    EXPECT_NE(std::string(e.what()).find("insufficient poses"), std::string::npos);
  }
}

TEST(LinearCalibrate, TwoPosesWarn) {
  const SimulatedData sim = generate(noiseless(2));
  const LinearResult r = linear_calibrate(sim.dataset, CameraKind::Conventional);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(LinearCalibrate, FocusedLongPath) {
  SimConfig c = noiseless(3);
  c.camera_kind = CameraKind::FocusedLongPath;
  const SimulatedData sim = generate(c);
  const LinearResult r = linear_calibrate(sim.dataset, CameraKind::FocusedLongPath);
  for (double e : relative_errors(r.intrinsics, sim.truth.intrinsics)) EXPECT_LT(e, 1e-6);
  for (const Pose& p : r.poses) EXPECT_LT(p.translation.z(), 0.0);
}

TEST(LinearCalibrate, ScalingTheBoardScalesViewSpacing) {
  // Same pixels, board measured in different units: t and (k_i, k_j) follow
  // the unit, the image-side parameters do not change.
  const SimulatedData sim = generate(noiseless(3));
  CalibrationDataset scaled = sim.dataset;
  const double c = 25.4;
  scaled.board.cell_mm *= c;
  const LinearResult a = linear_calibrate(sim.dataset, CameraKind::Conventional);
  const LinearResult b = linear_calibrate(scaled, CameraKind::Conventional);
  EXPECT_NEAR(b.intrinsics.k_i / a.intrinsics.k_i, c, 1e-9 * c);
  EXPECT_NEAR(b.intrinsics.k_j / a.intrinsics.k_j, c, 1e-9 * c);
  EXPECT_NEAR(b.intrinsics.k_u, a.intrinsics.k_u, 1e-9 * a.intrinsics.k_u);
  EXPECT_NEAR(b.intrinsics.k_v, a.intrinsics.k_v, 1e-9 * a.intrinsics.k_v);
  EXPECT_NEAR(b.intrinsics.u_0, a.intrinsics.u_0, 1e-9);
  EXPECT_NEAR(b.intrinsics.v_0, a.intrinsics.v_0, 1e-9);
  for (std::size_t p = 0; p < a.poses.size(); ++p) {
    EXPECT_LT((b.poses[p].translation - c * a.poses[p].translation).norm(), 1e-8 * c * a.poses[p].translation.norm());
  }
}

TEST(LinearCalibrate, PoseContextInErrors) {
  SimulatedData sim = generate(noiseless(3));
  // Make pose 1 degenerate: keep only its first row of corners.
  for (auto& v : sim.dataset.poses[1].views) {
    std::erase_if(v.corners, [](const CornerObservation& c) { return c.row != 0; });
  }
  try {
    linear_calibrate(sim.dataset, CameraKind::Conventional);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateBoard);
    EXPECT_NE(std::string(e.what()).find("pose 1"), std::string::npos);
  }
}

TEST(LinearCalibrate, ScaledSceneKeepsIntrinsics) {
  // Board and translations scaled together, pixels regenerated.
  const SimConfig base = noiseless(3);
  SimConfig big = base;
  const double c = 3.0;
  big.board.cell_mm *= c;
  big.translation_min *= c;
  big.translation_max *= c;
  const SimulatedData a = generate(base), b = generate(big);
  const LinearResult ra = linear_calibrate(a.dataset, CameraKind::Conventional);
  const LinearResult rb = linear_calibrate(b.dataset, CameraKind::Conventional);
  for (double e : relative_errors(rb.intrinsics, ra.intrinsics)) EXPECT_LT(e, 1e-9);
  for (std::size_t p = 0; p < ra.poses.size(); ++p) {
    EXPECT_LT((rb.poses[p].translation - c * ra.poses[p].translation).norm(), 1e-9 * c * ra.poses[p].translation.norm());
  }
}
