// Command-line front end: simulate | calibrate | evaluate | rectify | trials.
//
// Exit codes: 0 ok, 2 config, 3 I/O, 4 calibration, 5 consistency.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lfcalib/errors.hpp"
#include "lfcalib/io.hpp"
#include "lfcalib/metrics.hpp"
#include "lfcalib/pipeline.hpp"
#include "lfcalib/simulator.hpp"

using namespace lfcalib;

namespace {

enum Exit { kOk = 0, kConfig = 2, kIo = 3, kCalibration = 4, kConsistency = 5 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigInvalid: return kConfig;
    case ErrorKind::Io: return kIo;
    case ErrorKind::Inconsistent: return kConsistency;
    default: return kCalibration;
  }
}

struct Globals {
  bool verbose = false;
};

void log(const Globals& g, const std::string& msg) {
  if (g.verbose) std::cerr << msg << '\n';
}

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

MetricSummary summarize(const CalibrationParameters& params, const CalibrationDataset& ds) {
  const MetricReport m = evaluate_metrics(params, ds);
  return {m.rms_reproj_px, m.mean_reproj_px, m.rms_ray_reproj_mm};
}

std::vector<int> pose_ids(const CalibrationDataset& ds) {
  std::vector<int> ids;
  for (const auto& p : ds.poses) ids.push_back(p.pose_id);
  return ids;
}

void check_pose_ids(const ResultFile& res, const CalibrationDataset& ds, const std::string& what) {
  if (res.pose_ids != pose_ids(ds)) {
    throw Error(ErrorKind::Inconsistent, what + " pose ids do not match the dataset");
  }
}

// ---- simulate ----

struct SimulateArgs {
  std::string config;
  std::string out;
  std::string truth;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const Globals& g, const SimulateArgs& a) {
  const std::string text = read_file(a.config);
  SimConfig cfg = parse_sim_config(text);
  if (a.seed) cfg.seed = *a.seed;
  const SimulatedData sim = generate(cfg);
  const std::string dataset_text = dataset_to_json(sim.dataset);

  ResultFile truth;
  truth.tool_version = LFCALIB_VERSION;
  truth.input_digest = digest_string(text);
  truth.camera_kind = cfg.camera_kind;
  truth.intrinsics = sim.truth.intrinsics;
  truth.distortion = sim.truth.distortion;
  truth.distortion_estimated = true;
  truth.pose_ids = pose_ids(sim.dataset);
  truth.poses = sim.truth.poses;
  truth.initial = summarize(sim.truth, sim.dataset);

  const std::string truth_path = a.truth.empty() ? a.out + ".truth.json" : a.truth;
  write_file(a.out, dataset_text);
  write_file(truth_path, result_to_json(truth));
  log(g, "wrote " + std::to_string(sim.dataset.observation_count()) + " observations to " + a.out);
  std::cout << "dataset: " << a.out << "\nground truth: " << truth_path << '\n';
  return kOk;
}

// ---- calibrate ----

struct CalibrateArgs {
  std::string dataset;
  std::string out;
  std::string kind;
  bool skip_refine = false;
  bool no_distortion = false;
  int max_iter = 200;
  double tol = 1e-12;
  std::string export_poses;
};

void print_summary(const ResultFile& res) {
  const Intrinsics& in = res.intrinsics;
  const Distortion& d = res.distortion;
  std::cout << "parameter    value\n";
  const std::pair<const char*, double> rows[] = {{"k_i", in.k_i}, {"k_j", in.k_j}, {"k_u", in.k_u},
                                                 {"k_v", in.k_v}, {"u_0", in.u_0}, {"v_0", in.v_0},
                                                 {"k_1", d.k_1},  {"k_2", d.k_2},  {"k_3", d.k_3},
                                                 {"k_4", d.k_4}};
  for (const auto& [name, value] : rows) std::cout << "  " << name << "        " << fmt("% .10e", value) << '\n';
  const Vec2 pp = in.principal_point();
  std::cout << "principal point (px): " << fmt("%.4f", pp.x()) << ", " << fmt("%.4f", pp.y()) << '\n';
  std::cout << "stage        rms_px        mean_px       rms_ray_mm\n";
  auto row = [](const char* name, const MetricSummary& m) {
    std::cout << "  " << name << fmt("%14.6e", m.rms_px) << fmt("%14.6e", m.mean_px) << fmt("%14.6e", m.rms_mm)
              << '\n';
  };
  if (res.initial) row("initial  ", *res.initial);
  if (res.optimized) row("optimized", *res.optimized);
  if (res.optimizer) {
    std::cout << "optimizer: " << res.optimizer->iterations << " iterations, "
              << to_string(res.optimizer->termination) << '\n';
  }
}

int run_calibrate(const Globals& g, const CalibrateArgs& a) {
  const std::string text = read_file(a.dataset);
  CalibrationDataset ds = parse_dataset(text);
  if (!a.kind.empty()) {
    try {
      ds.camera_kind = camera_kind_from_string(a.kind);
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigInvalid, std::string("--kind: ") + e.what());
    }
  }
  PipelineOptions opts;
  opts.refine = !a.skip_refine;
  opts.optimize.refine_distortion = !a.no_distortion;
  opts.optimize.max_iter = a.max_iter;
  opts.optimize.cost_tolerance = a.tol;
  const PipelineResult pr = calibrate(ds, opts);
  for (const std::string& w : pr.linear.warnings) std::cerr << "warning: " << w << '\n';

  ResultFile res;
  res.tool_version = LFCALIB_VERSION;
  res.input_digest = digest_string(text);
  res.camera_kind = ds.camera_kind;
  res.intrinsics = pr.final.intrinsics;
  res.distortion = pr.final.distortion;
  res.distortion_estimated = opts.refine && opts.optimize.refine_distortion;
  res.pose_ids = pose_ids(ds);
  res.poses = pr.final.poses;
  res.initial = summarize(pr.initial, ds);
  if (opts.refine) {
    res.optimized = summarize(pr.final, ds);
    res.optimizer = pr.report;
  }
  res.warnings = pr.linear.warnings;
  write_file(a.out, result_to_json(res));
  if (!a.export_poses.empty()) export_poses(pr.final, ds, a.export_poses);
  log(g, "wrote " + a.out);
  print_summary(res);
  return kOk;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string result;
  std::string dataset;
  std::string truth;
  std::string out;
};

int run_evaluate(const Globals& g, const EvaluateArgs& a) {
  const ResultFile res = parse_result(read_file(a.result));
  const CalibrationDataset ds = parse_dataset(read_file(a.dataset));
  check_pose_ids(res, ds, "result");
  std::ostringstream csv;
  write_metric_csv(csv, evaluate_metrics(res.parameters(), ds));
  if (!a.truth.empty()) {
    const ResultFile truth = parse_result(read_file(a.truth));
    check_pose_ids(truth, ds, "ground truth");
    const auto rel = relative_errors(res.intrinsics, truth.intrinsics);
    for (std::size_t k = 0; k < rel.size(); ++k) csv << "rel_err," << kIntrinsicNames[k] << ',' << fmt("%.17g", rel[k]) << '\n';
    csv << "principal_point_err_px,all," << fmt("%.17g", principal_point_error_px(res.intrinsics, truth.intrinsics))
        << '\n';
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(a.out, csv.str());
    log(g, "wrote " + a.out);
  }
  return kOk;
}

// ---- rectify ----

struct RectifyArgs {
  std::string result;
  std::string dataset;
  std::string out;
};

int run_rectify(const Globals& g, const RectifyArgs& a) {
  const ResultFile res = parse_result(read_file(a.result));
  if (!res.distortion_estimated) {
    throw Error(ErrorKind::InvalidArgument, "result carries no estimated distortion (calibrated with --skip-refine)");
  }
  CalibrationDataset ds = parse_dataset(read_file(a.dataset));
  check_pose_ids(res, ds, "result");
  for (auto& p : ds.poses) {
    for (auto& v : p.views) {
      for (auto& c : v.corners) {
        Ray ray = decode(PixelIndex{v.i, v.j, c.u, c.v}, res.intrinsics);
        const Vec2 xu = undistort(ray.x, ray.y, ray.s, ray.t, res.distortion);
        ray.x = xu.x();
        ray.y = xu.y();
        const IndexedRay px = encode(ray, res.intrinsics);
        c.u = px.u;
        c.v = px.v;
      }
    }
  }
  ds.rectified = true;
  write_file(a.out, dataset_to_json(ds));
  log(g, "wrote " + a.out);
  return kOk;
}

// ---- trials ----

struct TrialsArgs {
  std::string config;
  int trials = 50;
  std::vector<double> sigmas;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool skip_refine = false;
  bool no_distortion = false;
};

int run_trials_cmd(const Globals& g, const TrialsArgs& a) {
  SimConfig cfg = parse_sim_config(read_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  const std::vector<double> sigmas = a.sigmas.empty() ? std::vector<double>{cfg.noise_sigma} : a.sigmas;
  TrialOptions opts;
  opts.threads = a.threads;
  opts.pipeline.refine = !a.skip_refine;
  opts.pipeline.optimize.refine_distortion = !a.no_distortion;
  std::vector<TrialSummary> summaries;
  for (double s : sigmas) {
    cfg.noise_sigma = s;
    summaries.push_back(run_trials(cfg, a.trials, opts));
    log(g, "sigma " + fmt("%g", s) + ": fail rate " + fmt("%g", summaries.back().fail_rate));
  }
  std::ostringstream csv;
  write_trial_csv(csv, summaries);
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(a.out, csv.str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Light-field camera calibration with the multi-projection-center model"};
  app.set_version_flag("--version", std::string(LFCALIB_VERSION));
  app.require_subcommand(1);
  Globals g;
  app.add_flag("-v,--verbose", g.verbose, "Progress messages on stderr");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Generate a synthetic dataset and its ground truth");
  c_sim->add_option("config", sim.config, "Simulation config (JSON)")->required();
  c_sim->add_option("-o,--out", sim.out, "Dataset output path")->required();
  c_sim->add_option("--truth", sim.truth, "Ground-truth output path (default: <out>.truth.json)");
  c_sim->add_option("--seed", sim.seed, "Override the config seed");

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "Linear initialization plus nonlinear refinement");
  c_cal->add_option("dataset", cal.dataset, "Dataset (JSON)")->required();
  c_cal->add_option("-o,--out", cal.out, "Result output path")->required();
  c_cal->add_option("--kind", cal.kind, "conventional | focused_long_path | focused_short_path");
  c_cal->add_flag("--skip-refine", cal.skip_refine, "Stop after the linear stage");
  c_cal->add_flag("--no-distortion", cal.no_distortion, "Refine intrinsics and poses only; distortion stays 0");
  c_cal->add_option("--max-iter", cal.max_iter, "Refinement iteration cap")->check(CLI::PositiveNumber);
  c_cal->add_option("--tol", cal.tol, "Relative cost-decrease tolerance")->check(CLI::PositiveNumber);
  c_cal->add_option("--export-poses", cal.export_poses, "Write board corners and frustum for plotting");

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Re-projection metrics as CSV");
  c_ev->add_option("result", ev.result, "Calibration result (JSON)")->required();
  c_ev->add_option("dataset", ev.dataset, "Dataset (JSON)")->required();
  c_ev->add_option("--truth", ev.truth, "Ground truth for relative errors");
  c_ev->add_option("-o,--out", ev.out, "CSV output path (default: stdout)");

  RectifyArgs rec;
  auto* c_rec = app.add_subcommand("rectify", "Remove estimated distortion from observations");
  c_rec->add_option("result", rec.result, "Calibration result (JSON)")->required();
  c_rec->add_option("dataset", rec.dataset, "Dataset (JSON)")->required();
  c_rec->add_option("-o,--out", rec.out, "Rectified dataset output path")->required();

  TrialsArgs tr;
  auto* c_tr = app.add_subcommand("trials", "Monte Carlo accuracy statistics as CSV");
  c_tr->add_option("config", tr.config, "Simulation config (JSON)")->required();
  c_tr->add_option("-n,--trials", tr.trials, "Trials per noise level")->check(CLI::PositiveNumber);
  c_tr->add_option("--sigma", tr.sigmas, "Noise levels (px); default: the config value")->delimiter(',');
  c_tr->add_option("-o,--out", tr.out, "CSV output path (default: stdout)");
  c_tr->add_option("--seed", tr.seed, "Override the config seed");
  c_tr->add_option("--threads", tr.threads, "Worker threads (0: all cores)");
  c_tr->add_flag("--skip-refine", tr.skip_refine, "Linear stage only");
  c_tr->add_flag("--no-distortion", tr.no_distortion, "Refine intrinsics and poses only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*c_sim) return run_simulate(g, sim);
    if (*c_cal) return run_calibrate(g, cal);
    if (*c_ev) return run_evaluate(g, ev);
    if (*c_rec) return run_rectify(g, rec);
    if (*c_tr) return run_trials_cmd(g, tr);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
