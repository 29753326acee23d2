#include <gtest/gtest.h>

#include <numbers>

#include "lfcalib/camera_model.hpp"
#include "lfcalib/errors.hpp"
#include "test_util.hpp"

using namespace lfcalib;
using lfcalib::testing::Gen;

TEST(Decode, UnitViewZeroPixel) {
  const Ray r = decode(PixelIndex{1, 1, 0, 0}, lfcalib::testing::reference_camera_unscaled());
  EXPECT_DOUBLE_EQ(r.s, 2.4e-4);
  EXPECT_DOUBLE_EQ(r.t, 2.5e-4);
  EXPECT_DOUBLE_EQ(r.x, -0.32);
  EXPECT_DOUBLE_EQ(r.y, -0.33);
  EXPECT_EQ(r.f, 1.0);
}

TEST(Decode, MatchesDecodingMatrix) {
  const Intrinsics in = lfcalib::testing::reference_camera_unscaled();
  const Ray r = decode(PixelIndex{2, 3, 100, 50}, in);
  EXPECT_NEAR(r.s, 4.8e-4, 1e-18);
  EXPECT_NEAR(r.t, 7.5e-4, 1e-18);
  EXPECT_NEAR(r.x, -0.12, 1e-15);
  EXPECT_NEAR(r.y, -0.235, 1e-15);
  const Eigen::Matrix<double, 5, 1> h = in.decoding_matrix() * Eigen::Matrix<double, 5, 1>(2, 3, 100, 50, 1);
  EXPECT_NEAR(h(0), r.s, 1e-18);
  EXPECT_NEAR(h(3), r.y, 1e-15);
}

TEST(Decode, IdentityIntrinsics) {
  const Ray r = decode(PixelIndex{3, -2, 7.5, -1.25}, {1, 1, 1, 1, 0, 0});
  EXPECT_EQ(r.s, 3);
  EXPECT_EQ(r.t, -2);
  EXPECT_EQ(r.x, 7.5);
  EXPECT_EQ(r.y, -1.25);
}

TEST(Decode, OriginMapsToOffsets) {
  const Ray r = decode(PixelIndex{0, 0, 0, 0}, lfcalib::testing::reference_camera());
  EXPECT_EQ(r.s, 0.0);
  EXPECT_EQ(r.x, -0.32);
  EXPECT_EQ(r.y, -0.33);
}

TEST(Encode, InverseOfDecode) {
  Gen g(20);
  const Intrinsics in = lfcalib::testing::reference_camera_unscaled();
  for (int k = 0; k < 1000; ++k) {
    const IndexedRay px{double(g.integer(-7, 7)), double(g.integer(-7, 7)), g.uniform(0, 400), g.uniform(0, 400)};
    const IndexedRay back = encode(decode(px, in), in);
    EXPECT_NEAR(back.i, px.i, 1e-12);
    EXPECT_NEAR(back.j, px.j, 1e-12);
    EXPECT_NEAR(back.u, px.u, 1e-12 * 400);
    EXPECT_NEAR(back.v, px.v, 1e-12 * 400);
  }
}

TEST(Encode, PrincipalRay) {
  const IndexedRay px = encode({0, 0, -0.32, -0.33, 1}, lfcalib::testing::reference_camera_unscaled());
  EXPECT_NEAR(px.u, 0.0, 1e-12);
  EXPECT_NEAR(px.v, 0.0, 1e-12);
  EXPECT_EQ(encode({0, 0, 0.7, 0, 1}, {1, 1, 3.5, 1, 0.7, 0}).u, 0.0);
}

TEST(Intrinsics, PrincipalPoint) {
  const Vec2 pp = lfcalib::testing::reference_camera().principal_point();
  EXPECT_NEAR(pp.x(), 160.0, 1e-12);
  EXPECT_NEAR(pp.y(), 0.33 / 1.9e-3, 1e-9);
  EXPECT_THROW((Intrinsics{1, 1, 0, 1, 0, 0}.validate()), Error);
}

TEST(Undistort, Examples) {
  const Vec2 a = undistort(0.3, -0.2, 1, 2, {});
  EXPECT_EQ(a, Vec2(0.3, -0.2));
  const Vec2 b = undistort(0.5, 0, 5, 7, {0.1, 0, 0, 0});
  EXPECT_NEAR(b.x(), 0.5125, 1e-15);
  EXPECT_EQ(b.y(), 0.0);
  const Vec2 c = undistort(0, 0, 0.3, 0.7, {0, 0, 2, 0});
  EXPECT_NEAR(c.x(), 0.6, 1e-15);
  EXPECT_EQ(c.y(), 0.0);
}

TEST(Undistort, RadialPartIsRotationSymmetric) {
  Gen g(21);
  const Distortion d{0.2, -0.05, 0, 0};
  for (int k = 0; k < 200; ++k) {
    const Vec2 p(g.uniform(-0.5, 0.5), g.uniform(-0.5, 0.5));
    const Eigen::Rotation2Dd rot(g.uniform(-std::numbers::pi, std::numbers::pi));
    const Vec2 lhs = undistort((rot * p).x(), (rot * p).y(), 0, 0, d);
    const Vec2 rhs = rot * undistort(p.x(), p.y(), 0, 0, d);
    EXPECT_LT((lhs - rhs).norm(), 1e-14);
  }
}

TEST(Distort, Examples) {
  EXPECT_EQ(distort(0.3, 0.1, 1, 1, {}), Vec2(0.3, 0.1));
  const Vec2 x = distort(0.5125, 0, 0, 0, {0.1, 0, 0, 0});
  EXPECT_NEAR(x.x(), 0.5, 1e-12);
  EXPECT_NEAR(x.y(), 0.0, 1e-15);
}

TEST(Distort, RoundTripInsideBasin) {
  Gen g(22);
  for (int k = 0; k < 2000; ++k) {
    const Distortion d{g.uniform(-0.3, 0.3), g.uniform(-0.05, 0.05), g.uniform(-0.01, 0.01), g.uniform(-0.01, 0.01)};
    const double r = g.uniform(0, 1), a = g.uniform(-std::numbers::pi, std::numbers::pi);
    const double x = r * std::cos(a), y = r * std::sin(a);
    if (std::abs(d.k_1) * r * r + std::abs(d.k_2) * r * r * r * r >= 0.5) continue;
    const double s = g.uniform(-1, 1), t = g.uniform(-1, 1);
    const Vec2 xu = undistort(x, y, s, t, d);
    const Vec2 back = distort(xu.x(), xu.y(), s, t, d);
    EXPECT_LT((back - Vec2(x, y)).norm(), 1e-10);
    const Vec2 again = undistort(back.x(), back.y(), s, t, d);
    EXPECT_LT((again - xu).norm(), 1e-10);
  }
}

TEST(Distort, ReportsNoConvergence) {
  try {
    distort(0.9, 0.4, 0, 0, {-0.8, 0.3, 0, 0}, DistortOptions{1, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
  }
}
