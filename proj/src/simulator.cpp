#include "lfcalib/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <thread>

#include "lfcalib/errors.hpp"
#include "lfcalib/metrics.hpp"
#include "lfcalib/rotation.hpp"

namespace lfcalib {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kMaxPoseAttempts = 100;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, msg); };
  try {
    intrinsics.validate();
  } catch (const Error& e) {
    fail(std::string("intrinsics: ") + e.what());
  }
  board.validate();
  if (n_poses < 1) fail("n_poses must be at least 1");
  if (view_rows < 2 || view_cols < 2) fail("view grid dimensions must be at least 2");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail("noise_sigma must be >= 0");
  if (!(rotation_range_deg > 0.0 && rotation_range_deg < 90.0)) {
    fail("rotation_range_deg must lie in (0, 90)");
  }
  if (!fixed_rotations_deg.empty() && static_cast<int>(fixed_rotations_deg.size()) != n_poses) {
    fail("fixed_rotations_deg must hold n_poses entries");
  }
  for (int k = 0; k < 3; ++k) {
    if (!std::isfinite(translation_min(k)) || !std::isfinite(translation_max(k)) ||
        translation_min(k) > translation_max(k)) {
      fail("translation box must satisfy min <= max");
    }
  }
  if (translation_min.z() <= 0.0) fail("translation_min z must be positive (the sign follows camera_kind)");
}

SimConfig SimConfig::reference_camera() {
  SimConfig c;
  c.intrinsics = {0.24, 0.25, 2.0e-3, 1.9e-3, -0.32, -0.33};
  c.board = {12, 12, 3.51};
  return c;
}

SimConfig SimConfig::close_range() {
  SimConfig c = reference_camera();
  const double half = 0.5 * (c.board.cols - 1) * c.board.cell_mm;
  c.translation_min = {-half - 5.0, -half - 5.0, 60.0};
  c.translation_max = {-half + 5.0, -half + 5.0, 100.0};
  return c;
}

std::vector<Vec3> SimConfig::fixed_three_poses() {
  return {{6.0, 28.0, -8.0}, {12.0, -10.0, 15.0}, {-5.0, 5.0, -27.0}};
}

SimulatedData generate(const SimConfig& config, std::uint64_t trial) {
  config.validate();
  std::mt19937_64 rng = make_rng(config.seed, trial);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sign = depth_sign(config.camera_kind);
  const Intrinsics& in = config.intrinsics;

  SimulatedData out;
  CalibrationDataset& ds = out.dataset;
  ds.board = config.board;
  ds.camera_kind = config.camera_kind;
  ds.view_grid = config.view_grid();
  out.truth.intrinsics = in;
  out.truth.distortion = config.distortion;

  for (int p = 0; p < config.n_poses; ++p) {
    PoseObservations po;
    po.pose_id = p;
    Pose pose;
    bool found = false;
    for (int attempt = 0; attempt < kMaxPoseAttempts && !found; ++attempt) {
      Vec3 euler;
      if (config.fixed_rotations_deg.empty()) {
        for (int k = 0; k < 3; ++k) euler(k) = (2.0 * unit(rng) - 1.0) * config.rotation_range_deg;
      } else {
        euler = config.fixed_rotations_deg[static_cast<std::size_t>(p)];
      }
      Vec3 t;
      for (int k = 0; k < 3; ++k) {
        t(k) = config.translation_min(k) + unit(rng) * (config.translation_max(k) - config.translation_min(k));
      }
      t.z() *= sign;
      pose = Pose::from_matrix(euler_xyz(euler * kDeg), t);
      const Mat3 rot = pose.rotation_matrix();
      for (int row = 0; row < config.board.rows && !found; ++row)
        for (int col = 0; col < config.board.cols && !found; ++col)
          found = sign * (rot * config.board.corner(row, col) + t).z() > 0.0;
    }
    if (!found) {
      throw Error(ErrorKind::AllPointsBehindCamera,
                  "pose " + std::to_string(p) + ": no sampled pose put the board in front of the camera");
    }
    out.truth.poses.push_back(pose);

    const Mat3 rot = pose.rotation_matrix();
    std::vector<Point3> cam(static_cast<std::size_t>(config.board.corner_count()));
    for (int row = 0; row < config.board.rows; ++row)
      for (int col = 0; col < config.board.cols; ++col)
        cam[static_cast<std::size_t>(row * config.board.cols + col)] =
            rot * config.board.corner(row, col) + pose.translation;

    for (int i = ds.view_grid.i_min; i <= ds.view_grid.i_max; ++i) {
      for (int j = ds.view_grid.j_min; j <= ds.view_grid.j_max; ++j) {
        ViewObservations view;
        view.i = i;
        view.j = j;
        const double s = in.k_i * i;
        const double tt = in.k_j * j;
        for (int row = 0; row < config.board.rows; ++row) {
          for (int col = 0; col < config.board.cols; ++col) {
            const Point3& x = cam[static_cast<std::size_t>(row * config.board.cols + col)];
            if (!(sign * x.z() > 0.0)) continue;
            Vec2 xy = project(x, s, tt, 1.0);
            if (!config.distortion.is_zero()) xy = distort(xy.x(), xy.y(), s, tt, config.distortion);
            const IndexedRay px = encode(Ray{s, tt, xy.x(), xy.y(), 1.0}, in);
            CornerObservation c{row, col, px.u, px.v};
            if (config.noise_sigma > 0.0) {
              c.u += config.noise_sigma * noise(rng);
              c.v += config.noise_sigma * noise(rng);
            }
            view.corners.push_back(c);
          }
        }
        if (!view.corners.empty()) po.views.push_back(std::move(view));
      }
    }
    ds.poses.push_back(std::move(po));
  }
  return out;
}

std::array<double, 6> relative_errors(const Intrinsics& e, const Intrinsics& t) {
  const double est[6] = {e.k_i, e.k_j, e.k_u, e.k_v, e.u_0, e.v_0};
  const double tru[6] = {t.k_i, t.k_j, t.k_u, t.k_v, t.u_0, t.v_0};
  std::array<double, 6> out{};
  for (int k = 0; k < 6; ++k) out[static_cast<std::size_t>(k)] = std::abs(est[k] - tru[k]) / std::abs(tru[k]);
  return out;
}

double principal_point_error_px(const Intrinsics& estimate, const Intrinsics& truth) {
  return (estimate.principal_point() - truth.principal_point()).norm();
}

namespace {

TrialOutcome run_one(const SimConfig& config, std::uint64_t trial, const TrialOptions& options) {
  TrialOutcome out;
  try {
    const SimulatedData sim = generate(config, trial);
    const PipelineResult res = calibrate(sim.dataset, options.pipeline);
    out.linear_rel_err = relative_errors(res.initial.intrinsics, sim.truth.intrinsics);
    out.rel_err = relative_errors(res.final.intrinsics, sim.truth.intrinsics);
    out.principal_point_err_px = principal_point_error_px(res.final.intrinsics, sim.truth.intrinsics);
    out.estimate = res.final.intrinsics;
    if (options.compute_metrics) {
      out.initial_rms_px = reprojection_error_px(res.initial, sim.dataset).rms_reproj_px;
      out.final_rms_px = reprojection_error_px(res.final, sim.dataset).rms_reproj_px;
    }
    bool finite = std::isfinite(out.principal_point_err_px);
    for (double r : out.rel_err) finite = finite && std::isfinite(r);
    if (!finite) throw Error(ErrorKind::NonFinite, "non-finite estimate");
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

}  // namespace

TrialSummary run_trials(const SimConfig& config, int n_trials, const TrialOptions& options) {
  if (n_trials < 1) throw Error(ErrorKind::InvalidArgument, "n_trials must be at least 1");
  config.validate();
  TrialSummary summary;
  summary.config = config;
  summary.trials.resize(static_cast<std::size_t>(n_trials));

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n_trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < n_trials; k = next++) {
      summary.trials[static_cast<std::size_t>(k)] = run_one(config, static_cast<std::uint64_t>(k), options);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  int ok = 0;
  std::array<double, 6> sum{}, sum_sq{};
  double pp_sum = 0.0;
  for (const TrialOutcome& t : summary.trials) {
    if (!t.ok) continue;
    ++ok;
    for (std::size_t k = 0; k < 6; ++k) {
      sum[k] += t.rel_err[k];
      sum_sq[k] += t.rel_err[k] * t.rel_err[k];
    }
    pp_sum += t.principal_point_err_px;
  }
  summary.fail_rate = 1.0 - static_cast<double>(ok) / n_trials;
  if (ok > 0) {
    for (std::size_t k = 0; k < 6; ++k) {
      const double mean = sum[k] / ok;
      const double var = ok > 1 ? std::max(0.0, (sum_sq[k] - ok * mean * mean) / (ok - 1)) : 0.0;
      summary.stats[k] = {mean, std::sqrt(var)};
    }
    summary.mean_principal_point_err_px = pp_sum / ok;
  } else {
    for (auto& s : summary.stats) s = {std::nan(""), std::nan("")};
    summary.mean_principal_point_err_px = std::nan("");
  }
  return summary;
}

void write_trial_csv(std::ostream& os, std::span<const TrialSummary> summaries) {
  os << "sigma,n_poses,n_views,param,mean_rel_err,std_rel_err,fail_rate\n";
  for (const TrialSummary& s : summaries) {
    const int n_views = s.config.view_rows * s.config.view_cols;
    for (std::size_t k = 0; k < 6; ++k) {
      os << fmt17(s.config.noise_sigma) << ',' << s.config.n_poses << ',' << n_views << ',' << kIntrinsicNames[k]
         << ',' << fmt17(s.stats[k].mean_rel_err) << ',' << fmt17(s.stats[k].std_rel_err) << ','
         << fmt17(s.fail_rate) << '\n';
    }
  }
}

}  // namespace lfcalib
