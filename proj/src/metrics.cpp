#include "lfcalib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "lfcalib/camera_model.hpp"
#include "lfcalib/errors.hpp"
#include "lfcalib/refinement.hpp"

namespace lfcalib {

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_shape(const CalibrationParameters& params, const CalibrationDataset& dataset) {
  if (params.poses.size() != dataset.poses.size()) {
    throw Error(ErrorKind::Inconsistent, "result and dataset disagree on the number of poses");
  }
}

struct Accum {
  double sq = 0.0;
  std::size_t n = 0;
  double rms(int dims) const { return n == 0 ? 0.0 : std::sqrt(sq / (dims * static_cast<double>(n))); }
};

}  // namespace

double point_ray_distance(const Point3& point, const Ray& ray) {
  const Vec3 origin(ray.s, ray.t, 0.0);
  const Vec3 dir(ray.x, ray.y, ray.f);
  return (point - origin).cross(dir).norm() / dir.norm();
}

MetricReport reprojection_error_px(const CalibrationParameters& params, const CalibrationDataset& dataset) {
  check_shape(params, dataset);
  const std::vector<Observation> obs = flatten(dataset);
  const VecX r = residuals(pack(params), obs, params.poses.size());
  const double k_u = params.intrinsics.k_u;
  const double k_v = params.intrinsics.k_v;

  MetricReport rep;
  rep.count = obs.size();
  Accum total;
  std::map<std::pair<int, int>, Accum> views;
  std::vector<Accum> poses(dataset.poses.size());
  double norm_sum = 0.0;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const double ex = r(2 * static_cast<Eigen::Index>(k)) / k_u;
    const double ey = r(2 * static_cast<Eigen::Index>(k) + 1) / k_v;
    const double sq = ex * ex + ey * ey;
    const double norm = std::sqrt(sq);
    norm_sum += norm;
    rep.max_reproj_px = std::max(rep.max_reproj_px, norm);
    for (Accum* a : {&total, &views[{obs[k].i, obs[k].j}], &poses[static_cast<std::size_t>(obs[k].pose)]}) {
      a->sq += sq;
      ++a->n;
    }
  }
  rep.rms_reproj_px = total.rms(2);
  rep.mean_reproj_px = obs.empty() ? 0.0 : norm_sum / static_cast<double>(obs.size());
  for (const auto& [key, a] : views) rep.per_view.push_back({key.first, key.second, a.rms(2), a.n});
  for (std::size_t p = 0; p < poses.size(); ++p) {
    rep.per_pose.push_back({dataset.poses[p].pose_id, poses[p].rms(2), 0.0, poses[p].n});
  }
  return rep;
}

MetricReport ray_reprojection_error_mm(const CalibrationParameters& params,
                                       const CalibrationDataset& dataset) {
  check_shape(params, dataset);
  MetricReport rep;
  Accum total;
  for (std::size_t p = 0; p < dataset.poses.size(); ++p) {
    const Mat3 rot = params.poses[p].rotation_matrix();
    const Vec3& trans = params.poses[p].translation;
    Accum pose_acc;
    for (const ViewObservations& v : dataset.poses[p].views) {
      for (const CornerObservation& c : v.corners) {
        Ray ray = decode(PixelIndex{v.i, v.j, c.u, c.v}, params.intrinsics);
        const Vec2 xu = undistort(ray.x, ray.y, ray.s, ray.t, params.distortion);
        ray.x = xu.x();
        ray.y = xu.y();
        const double d = point_ray_distance(rot * dataset.board.corner(c.row, c.col) + trans, ray);
        pose_acc.sq += d * d;
        ++pose_acc.n;
      }
    }
    total.sq += pose_acc.sq;
    total.n += pose_acc.n;
    rep.per_pose.push_back({dataset.poses[p].pose_id, 0.0, pose_acc.rms(1), pose_acc.n});
  }
  rep.count = total.n;
  rep.rms_ray_reproj_mm = total.rms(1);
  return rep;
}

MetricReport evaluate_metrics(const CalibrationParameters& params, const CalibrationDataset& dataset) {
  MetricReport rep = reprojection_error_px(params, dataset);
  const MetricReport ray = ray_reprojection_error_mm(params, dataset);
  rep.rms_ray_reproj_mm = ray.rms_ray_reproj_mm;
  for (std::size_t p = 0; p < rep.per_pose.size(); ++p) rep.per_pose[p].rms_mm = ray.per_pose[p].rms_mm;
  return rep;
}

void write_metric_csv(std::ostream& os, const MetricReport& report) {
  os << "metric,scope,value\n";
  os << "observations,all," << report.count << '\n';
  os << "rms_reproj_px,all," << fmt17(report.rms_reproj_px) << '\n';
  os << "mean_reproj_px,all," << fmt17(report.mean_reproj_px) << '\n';
  os << "max_reproj_px,all," << fmt17(report.max_reproj_px) << '\n';
  os << "rms_ray_reproj_mm,all," << fmt17(report.rms_ray_reproj_mm) << '\n';
  for (const PoseError& p : report.per_pose) {
    os << "rms_reproj_px,pose:" << p.pose_id << ',' << fmt17(p.rms_px) << '\n';
    os << "rms_ray_reproj_mm,pose:" << p.pose_id << ',' << fmt17(p.rms_mm) << '\n';
  }
  for (const ViewError& v : report.per_view) {
    os << "rms_reproj_px,view:" << v.i << ':' << v.j << ',' << fmt17(v.rms_px) << '\n';
  }
}

PoseExport build_pose_export(const CalibrationParameters& params, const CalibrationDataset& dataset) {
  check_shape(params, dataset);
  PoseExport out;
  double z_far = 0.0;
  for (std::size_t p = 0; p < dataset.poses.size(); ++p) {
    const Mat3 rot = params.poses[p].rotation_matrix();
    for (int row = 0; row < dataset.board.rows; ++row) {
      for (int col = 0; col < dataset.board.cols; ++col) {
        const Vec3 x = rot * dataset.board.corner(row, col) + params.poses[p].translation;
        out.corners.push_back({dataset.poses[p].pose_id, row, col, x});
        if (std::abs(x.z()) > std::abs(z_far)) z_far = x.z();
      }
    }
  }
  const Intrinsics& in = params.intrinsics;
  const ViewGrid& g = dataset.view_grid;
  const double s0 = in.k_i * g.i_min, s1 = in.k_i * g.i_max;
  const double t0 = in.k_j * g.j_min, t1 = in.k_j * g.j_max;
  out.frustum = {{s0, t0, 0.0}, {s1, t0, 0.0}, {s1, t1, 0.0}, {s0, t1, 0.0}};

  // Far plane: the observed pixel extent seen from the view-plane corners.
  double u_lo = std::numeric_limits<double>::infinity(), u_hi = -u_lo, v_lo = u_lo, v_hi = -u_lo;
  for (const auto& p : dataset.poses)
    for (const auto& v : p.views)
      for (const auto& c : v.corners) {
        u_lo = std::min(u_lo, c.u);
        u_hi = std::max(u_hi, c.u);
        v_lo = std::min(v_lo, c.v);
        v_hi = std::max(v_hi, c.v);
      }
  if (!std::isfinite(u_lo)) u_lo = u_hi = v_lo = v_hi = 0.0;
  const double x_lo = in.k_u * u_lo + in.u_0, x_hi = in.k_u * u_hi + in.u_0;
  const double y_lo = in.k_v * v_lo + in.v_0, y_hi = in.k_v * v_hi + in.v_0;
  const double xs[4] = {x_lo, x_hi, x_hi, x_lo};
  const double ys[4] = {y_lo, y_lo, y_hi, y_hi};
  for (int k = 0; k < 4; ++k) {
    const Vec3& o = out.frustum[static_cast<std::size_t>(k)];
    out.frustum.push_back({o.x() + xs[k] * z_far, o.y() + ys[k] * z_far, z_far});
  }
  return out;
}

void write_pose_export(std::ostream& os, const PoseExport& data) {
  os << "# lfcalib pose export v1\n";
  os << "# corner <pose_id> <row> <col> <X> <Y> <Z> (camera frame, mm)\n";
  os << "# frustum <index> <X> <Y> <Z>\n";
  for (const ExportedCorner& c : data.corners) {
    os << "corner " << c.pose_id << ' ' << c.row << ' ' << c.col << ' ' << fmt17(c.position.x()) << ' '
       << fmt17(c.position.y()) << ' ' << fmt17(c.position.z()) << '\n';
  }
  for (std::size_t k = 0; k < data.frustum.size(); ++k) {
    const Vec3& f = data.frustum[k];
    os << "frustum " << k << ' ' << fmt17(f.x()) << ' ' << fmt17(f.y()) << ' ' << fmt17(f.z()) << '\n';
  }
}

PoseExport read_pose_export(std::istream& is) {
  PoseExport out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    std::string tag;
    ls >> tag;
    bool ok = false;
    if (tag == "corner") {
      ExportedCorner c;
      ok = static_cast<bool>(ls >> c.pose_id >> c.row >> c.col >> c.position.x() >> c.position.y() >>
                             c.position.z());
      if (ok) out.corners.push_back(c);
    } else if (tag == "frustum") {
      std::size_t k = 0;
      Vec3 f;
      ok = static_cast<bool>(ls >> k >> f.x() >> f.y() >> f.z()) && k == out.frustum.size();
      if (ok) out.frustum.push_back(f);
    }
    if (!ok) throw Error(ErrorKind::Io, "pose export line " + std::to_string(line_no) + " is malformed");
  }
  return out;
}

void export_poses(const CalibrationParameters& params, const CalibrationDataset& dataset,
                  const std::string& path) {
  const PoseExport data = build_pose_export(params, dataset);
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_pose_export(os, data);
  if (!os) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

}  // namespace lfcalib
