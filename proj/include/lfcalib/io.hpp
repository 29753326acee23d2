#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lfcalib/dataset.hpp"
#include "lfcalib/refinement.hpp"
#include "lfcalib/simulator.hpp"

namespace lfcalib {

/// Whole-file read/write; both throw Io naming the path.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// 64-bit FNV-1a hash, rendered as "fnv1a64:<16 hex digits>" by digest_string.
std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_string(std::string_view bytes);

/// Simulation config. Required: intrinsics, board (rows, cols, cell_mm),
/// n_poses, view_grid (rows, cols). Everything else has defaults. Errors are
/// ConfigInvalid with the JSON line or the offending field path.
SimConfig parse_sim_config(std::string_view text);
std::string sim_config_to_json(const SimConfig& config);

/// Dataset schema:
///   {"format": "lfcalib-dataset", "version": 1,
///    "board": {"rows", "cols", "cell_mm"}, "camera_kind": "conventional",
///    "view_grid": {"i_range": [min, max], "j_range": [min, max]},
///    "rectified": false,
///    "poses": [{"pose_id", "observations": [{"i", "j",
///               "corners": [{"row", "col", "u", "v"}]}]}]}
/// Malformed input throws Io; key collisions throw Inconsistent.
CalibrationDataset parse_dataset(std::string_view text);
std::string dataset_to_json(const CalibrationDataset& dataset);

struct MetricSummary {
  double rms_px = 0.0;
  double mean_px = 0.0;
  double rms_mm = 0.0;
  bool operator==(const MetricSummary&) const = default;
};

/// Calibration result, also used for ground-truth sidecars.
struct ResultFile {
  std::string tool_version;
  std::string input_digest;
  CameraKind camera_kind = CameraKind::Conventional;
  Intrinsics intrinsics;
  Distortion distortion;
  /// False when refinement was skipped: the distortion is then a placeholder.
  bool distortion_estimated = false;
  std::vector<int> pose_ids;
  std::vector<Pose> poses;
  std::optional<MetricSummary> initial;
  std::optional<MetricSummary> optimized;
  std::optional<OptimizeReport> optimizer;
  std::vector<std::string> warnings;

  CalibrationParameters parameters() const { return {intrinsics, distortion, poses}; }
};

ResultFile parse_result(std::string_view text);
std::string result_to_json(const ResultFile& result);

}  // namespace lfcalib
