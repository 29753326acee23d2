#include "lfcalib/pipeline.hpp"

namespace lfcalib {

PipelineResult calibrate(const CalibrationDataset& dataset, const PipelineOptions& options) {
  PipelineResult out;
  out.linear = linear_calibrate(dataset, dataset.camera_kind, options.linear);
  out.initial.intrinsics = out.linear.intrinsics;
  out.initial.distortion = {};
  out.initial.poses = out.linear.poses;
  if (!options.refine) {
    out.final = out.initial;
    return out;
  }
  OptimizeResult opt = optimize(out.initial, dataset, options.optimize);
  out.final = std::move(opt.params);
  out.report = opt.report;
  return out;
}

}  // namespace lfcalib
