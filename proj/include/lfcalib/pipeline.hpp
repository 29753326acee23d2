#pragma once

#include <optional>

#include "lfcalib/dataset.hpp"
#include "lfcalib/linear_calibration.hpp"
#include "lfcalib/refinement.hpp"

namespace lfcalib {

struct PipelineOptions {
  LinearOptions linear;
  OptimizeOptions optimize;
  bool refine = true;
};

struct PipelineResult {
  LinearResult linear;
  CalibrationParameters initial;  // linear estimate, zero distortion
  CalibrationParameters final;    // equals `initial` when refinement is skipped
  std::optional<OptimizeReport> report;
};

/// Closed-form initialization followed by joint nonlinear refinement of the
/// intrinsics, distortion and poses. The camera kind comes from the dataset.
PipelineResult calibrate(const CalibrationDataset& dataset, const PipelineOptions& options = {});

}  // namespace lfcalib
