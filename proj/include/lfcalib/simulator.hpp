#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lfcalib/dataset.hpp"
#include "lfcalib/pipeline.hpp"

namespace lfcalib {

/// Synthetic checkerboard capture. Lengths in mm, noise in pixels.
struct SimConfig {
  Intrinsics intrinsics;
  Distortion distortion;
  BoardSpec board;
  CameraKind camera_kind = CameraKind::Conventional;
  int n_poses = 3;
  int view_rows = 7;
  int view_cols = 7;
  double noise_sigma = 0.5;
  double rotation_range_deg = 30.0;
  /// Optional per-pose Euler angles (degrees, intrinsic XYZ). When non-empty
  /// it replaces random rotations and must hold n_poses entries.
  std::vector<Vec3> fixed_rotations_deg;
  Vec3 translation_min{-40.0, -40.0, 120.0};
  Vec3 translation_max{40.0, 40.0, 280.0};
  std::uint64_t seed = 1;

  /// Throws ConfigInvalid.
  void validate() const;
  ViewGrid view_grid() const { return ViewGrid::centered(view_rows, view_cols); }

  /// Reference plenoptic camera: k_i = 0.24 mm, k_j = 0.25 mm,
  /// k_u = 2e-3, k_v = 1.9e-3, u_0 = -0.32, v_0 = -0.33, 12x12 board of 3.51 mm.
  static SimConfig reference_camera();
  /// reference_camera() with the board centered on the optical axis (within 5 mm) at
  /// 60..100 mm, where it roughly fills a 320 x 348 pixel sub-aperture image.
  static SimConfig close_range();
  /// The three fixed rotations (6,28,-8), (12,-10,15), (-5,5,-27) degrees.
  static std::vector<Vec3> fixed_three_poses();
};

struct SimulatedData {
  CalibrationDataset dataset;
  CalibrationParameters truth;
};

/// Deterministic in (config.seed, trial).
SimulatedData generate(const SimConfig& config, std::uint64_t trial = 0);

inline constexpr std::array<const char*, 6> kIntrinsicNames = {"k_i", "k_j", "k_u", "k_v", "u_0", "v_0"};

/// |est - true| / |true| for the six intrinsics, in kIntrinsicNames order.
std::array<double, 6> relative_errors(const Intrinsics& estimate, const Intrinsics& truth);

/// Distance in pixels between estimated and true principal points.
double principal_point_error_px(const Intrinsics& estimate, const Intrinsics& truth);

struct TrialOutcome {
  bool ok = false;
  std::string error;
  std::array<double, 6> linear_rel_err{};
  std::array<double, 6> rel_err{};  // after refinement (or linear when skipped)
  double principal_point_err_px = 0.0;
  double initial_rms_px = 0.0;
  double final_rms_px = 0.0;
  Intrinsics estimate;
};

struct ParamStats {
  double mean_rel_err = 0.0;
  double std_rel_err = 0.0;
};

struct TrialSummary {
  SimConfig config;
  std::vector<TrialOutcome> trials;
  std::array<ParamStats, 6> stats{};
  double mean_principal_point_err_px = 0.0;
  double fail_rate = 0.0;
};

struct TrialOptions {
  PipelineOptions pipeline;
  /// Evaluate initial/final RMS re-projection errors per trial.
  bool compute_metrics = false;
  /// 0 picks the hardware concurrency.
  unsigned threads = 0;
};

/// Runs `n_trials` independent simulate-and-calibrate rounds. Failures are
/// recorded per trial and excluded from the statistics.
TrialSummary run_trials(const SimConfig& config, int n_trials, const TrialOptions& options = {});

/// CSV with columns sigma,n_poses,n_views,param,mean_rel_err,std_rel_err,fail_rate.
void write_trial_csv(std::ostream& os, std::span<const TrialSummary> summaries);

}  // namespace lfcalib
