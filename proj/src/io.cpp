#include "lfcalib/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lfcalib/errors.hpp"

namespace lfcalib {

using nlohmann::json;

namespace {

/// Field access with path-qualified diagnostics.
class Reader {
 public:
  explicit Reader(ErrorKind kind) : kind_(kind) {}

  [[noreturn]] void fail(const std::string& msg) const { throw Error(kind_, msg); }

  const json& at(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object()) fail("field '" + path + "' must be an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail("missing field '" + join(path, key) + "'");
    return *it;
  }

  template <class T>
  T get(const json& obj, const std::string& key, const std::string& path) const {
    return as<T>(at(obj, key, path), join(path, key));
  }

  template <class T>
  T get_or(const json& obj, const std::string& key, const std::string& path, T fallback) const {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return get<T>(obj, key, path);
  }

  template <class T>
  T as(const json& v, const std::string& path) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail("field '" + path + "' must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail("field '" + path + "' must be an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail("field '" + path + "' must be a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail("field '" + path + "' must be a string");
    }
    return v.get<T>();
  }

  Vec3 vec3(const json& v, const std::string& path) const {
    if (!v.is_array() || v.size() != 3) fail("field '" + path + "' must be an array of 3 numbers");
    return {as<double>(v[0], path + "[0]"), as<double>(v[1], path + "[1]"), as<double>(v[2], path + "[2]")};
  }

  const json& array(const json& obj, const std::string& key, const std::string& path) const {
    const json& v = at(obj, key, path);
    if (!v.is_array()) fail("field '" + join(path, key) + "' must be an array");
    return v;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  ErrorKind kind_;
};

json parse_json(std::string_view text, ErrorKind kind, const char* what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t k = 0; k + 1 < end; ++k)
      if (text[k] == '\n') ++line;
    throw Error(kind, std::string(what) + ": line " + std::to_string(line) + ": invalid JSON");
  }
}

void check_format(const Reader& r, const json& doc, const std::string& expected) {
  const std::string fmt = r.get<std::string>(doc, "format", "");
  if (fmt != expected) r.fail("expected format '" + expected + "', found '" + fmt + "'");
  const int version = r.get<int>(doc, "version", "");
  if (version != 1) r.fail("unsupported " + expected + " version " + std::to_string(version));
}

json intrinsics_json(const Intrinsics& in) {
  return {{"k_i", in.k_i}, {"k_j", in.k_j}, {"k_u", in.k_u},
          {"k_v", in.k_v}, {"u_0", in.u_0}, {"v_0", in.v_0}};
}

Intrinsics read_intrinsics(const Reader& r, const json& v, const std::string& path) {
  return {r.get<double>(v, "k_i", path), r.get<double>(v, "k_j", path), r.get<double>(v, "k_u", path),
          r.get<double>(v, "k_v", path), r.get<double>(v, "u_0", path), r.get<double>(v, "v_0", path)};
}

json distortion_json(const Distortion& d) {
  return {{"k_1", d.k_1}, {"k_2", d.k_2}, {"k_3", d.k_3}, {"k_4", d.k_4}};
}

Distortion read_distortion(const Reader& r, const json& v, const std::string& path) {
  return {r.get<double>(v, "k_1", path), r.get<double>(v, "k_2", path), r.get<double>(v, "k_3", path),
          r.get<double>(v, "k_4", path)};
}

json board_json(const BoardSpec& b) { return {{"rows", b.rows}, {"cols", b.cols}, {"cell_mm", b.cell_mm}}; }

BoardSpec read_board(const Reader& r, const json& v, const std::string& path) {
  return {r.get<int>(v, "rows", path), r.get<int>(v, "cols", path), r.get<double>(v, "cell_mm", path)};
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

CameraKind read_kind(const Reader& r, const json& doc) {
  const std::string name = r.get_or<std::string>(doc, "camera_kind", "", "conventional");
  try {
    return camera_kind_from_string(name);
  } catch (const Error& e) {
    r.fail(e.what());
  }
}

Termination termination_from_string(const Reader& r, const std::string& name) {
  for (Termination t : {Termination::CostConverged, Termination::GradientConverged, Termination::StepConverged,
                        Termination::MaxIterations}) {
    if (to_string(t) == name) return t;
  }
  r.fail("unknown termination '" + name + "'");
}

json metric_json(const MetricSummary& m) {
  return {{"rms_px", m.rms_px}, {"mean_px", m.mean_px}, {"rms_mm", m.rms_mm}};
}

MetricSummary read_metric(const Reader& r, const json& v, const std::string& path) {
  return {r.get<double>(v, "rms_px", path), r.get<double>(v, "mean_px", path), r.get<double>(v, "rms_mm", path)};
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << is.rdbuf();
  if (is.bad()) throw Error(ErrorKind::Io, "failed reading '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_string(std::string_view bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

SimConfig parse_sim_config(std::string_view text) {
  const Reader r(ErrorKind::ConfigInvalid);
  const json doc = parse_json(text, ErrorKind::ConfigInvalid, "config");
  if (!doc.is_object()) r.fail("config must be a JSON object");
  SimConfig c;
  c.intrinsics = read_intrinsics(r, r.at(doc, "intrinsics", ""), "intrinsics");
  if (doc.contains("distortion")) c.distortion = read_distortion(r, doc["distortion"], "distortion");
  c.board = read_board(r, r.at(doc, "board", ""), "board");
  c.camera_kind = read_kind(r, doc);
  c.n_poses = r.get<int>(doc, "n_poses", "");
  const json& grid = r.at(doc, "view_grid", "");
  c.view_rows = r.get<int>(grid, "rows", "view_grid");
  c.view_cols = r.get<int>(grid, "cols", "view_grid");
  c.noise_sigma = r.get_or<double>(doc, "noise_sigma", "", c.noise_sigma);
  c.rotation_range_deg = r.get_or<double>(doc, "rotation_range_deg", "", c.rotation_range_deg);
  if (doc.contains("fixed_rotations_deg")) {
    const json& rots = r.array(doc, "fixed_rotations_deg", "");
    for (std::size_t k = 0; k < rots.size(); ++k) {
      c.fixed_rotations_deg.push_back(r.vec3(rots[k], "fixed_rotations_deg[" + std::to_string(k) + "]"));
    }
  }
  if (doc.contains("translation_min")) c.translation_min = r.vec3(doc["translation_min"], "translation_min");
  if (doc.contains("translation_max")) c.translation_max = r.vec3(doc["translation_max"], "translation_max");
  c.seed = r.get_or<std::uint64_t>(doc, "seed", "", c.seed);
  c.validate();
  return c;
}

std::string sim_config_to_json(const SimConfig& c) {
  json doc = {{"intrinsics", intrinsics_json(c.intrinsics)},
              {"distortion", distortion_json(c.distortion)},
              {"board", board_json(c.board)},
              {"camera_kind", std::string(to_string(c.camera_kind))},
              {"n_poses", c.n_poses},
              {"view_grid", {{"rows", c.view_rows}, {"cols", c.view_cols}}},
              {"noise_sigma", c.noise_sigma},
              {"rotation_range_deg", c.rotation_range_deg},
              {"translation_min", vec3_json(c.translation_min)},
              {"translation_max", vec3_json(c.translation_max)},
              {"seed", c.seed}};
  if (!c.fixed_rotations_deg.empty()) {
    json rots = json::array();
    for (const Vec3& v : c.fixed_rotations_deg) rots.push_back(vec3_json(v));
    doc["fixed_rotations_deg"] = rots;
  }
  return doc.dump(2) + "\n";
}

CalibrationDataset parse_dataset(std::string_view text) {
  const Reader r(ErrorKind::Io);
  const json doc = parse_json(text, ErrorKind::Io, "dataset");
  check_format(r, doc, "lfcalib-dataset");
  CalibrationDataset ds;
  ds.board = read_board(r, r.at(doc, "board", ""), "board");
  ds.camera_kind = read_kind(r, doc);
  const json& grid = r.at(doc, "view_grid", "");
  const json& ir = r.array(grid, "i_range", "view_grid");
  const json& jr = r.array(grid, "j_range", "view_grid");
  if (ir.size() != 2 || jr.size() != 2) r.fail("view_grid ranges must be [min, max]");
  ds.view_grid = {r.as<int>(ir[0], "view_grid.i_range[0]"), r.as<int>(ir[1], "view_grid.i_range[1]"),
                  r.as<int>(jr[0], "view_grid.j_range[0]"), r.as<int>(jr[1], "view_grid.j_range[1]")};
  ds.rectified = r.get_or<bool>(doc, "rectified", "", false);
  const json& poses = r.array(doc, "poses", "");
  for (std::size_t p = 0; p < poses.size(); ++p) {
    const std::string pp = "poses[" + std::to_string(p) + "]";
    PoseObservations po;
    po.pose_id = r.get<int>(poses[p], "pose_id", pp);
    const json& views = r.array(poses[p], "observations", pp);
    for (std::size_t v = 0; v < views.size(); ++v) {
      const std::string vp = pp + ".observations[" + std::to_string(v) + "]";
      ViewObservations vo;
      vo.i = r.get<int>(views[v], "i", vp);
      vo.j = r.get<int>(views[v], "j", vp);
      const json& corners = r.array(views[v], "corners", vp);
      vo.corners.reserve(corners.size());
      for (std::size_t c = 0; c < corners.size(); ++c) {
        const std::string cp = vp + ".corners[" + std::to_string(c) + "]";
        vo.corners.push_back({r.get<int>(corners[c], "row", cp), r.get<int>(corners[c], "col", cp),
                              r.get<double>(corners[c], "u", cp), r.get<double>(corners[c], "v", cp)});
      }
      po.views.push_back(std::move(vo));
    }
    ds.poses.push_back(std::move(po));
  }
  ds.validate();
  return ds;
}

std::string dataset_to_json(const CalibrationDataset& ds) {
  json poses = json::array();
  for (const PoseObservations& p : ds.poses) {
    json views = json::array();
    for (const ViewObservations& v : p.views) {
      json corners = json::array();
      for (const CornerObservation& c : v.corners) {
        corners.push_back({{"row", c.row}, {"col", c.col}, {"u", c.u}, {"v", c.v}});
      }
      views.push_back({{"i", v.i}, {"j", v.j}, {"corners", std::move(corners)}});
    }
    poses.push_back({{"pose_id", p.pose_id}, {"observations", std::move(views)}});
  }
  const json doc = {{"format", "lfcalib-dataset"},
                    {"version", 1},
                    {"board", board_json(ds.board)},
                    {"camera_kind", std::string(to_string(ds.camera_kind))},
                    {"view_grid",
                     {{"i_range", {ds.view_grid.i_min, ds.view_grid.i_max}},
                      {"j_range", {ds.view_grid.j_min, ds.view_grid.j_max}}}},
                    {"rectified", ds.rectified},
                    {"poses", std::move(poses)}};
  return doc.dump(1) + "\n";
}

ResultFile parse_result(std::string_view text) {
  const Reader r(ErrorKind::Io);
  const json doc = parse_json(text, ErrorKind::Io, "result");
  check_format(r, doc, "lfcalib-result");
  ResultFile res;
  res.tool_version = r.get_or<std::string>(doc, "tool_version", "", "");
  res.input_digest = r.get_or<std::string>(doc, "input_digest", "", "");
  res.camera_kind = read_kind(r, doc);
  res.intrinsics = read_intrinsics(r, r.at(doc, "intrinsics", ""), "intrinsics");
  res.distortion = read_distortion(r, r.at(doc, "distortion", ""), "distortion");
  res.distortion_estimated = r.get<bool>(doc, "distortion_estimated", "");
  const json& poses = r.array(doc, "poses", "");
  for (std::size_t p = 0; p < poses.size(); ++p) {
    const std::string pp = "poses[" + std::to_string(p) + "]";
    res.pose_ids.push_back(r.get<int>(poses[p], "pose_id", pp));
    res.poses.push_back({r.vec3(r.at(poses[p], "rotation", pp), pp + ".rotation"),
                         r.vec3(r.at(poses[p], "translation", pp), pp + ".translation")});
  }
  if (doc.contains("metrics")) {
    const json& m = doc["metrics"];
    if (m.contains("initial")) res.initial = read_metric(r, m["initial"], "metrics.initial");
    if (m.contains("optimized")) res.optimized = read_metric(r, m["optimized"], "metrics.optimized");
  }
  if (doc.contains("optimizer")) {
    const json& o = doc["optimizer"];
    OptimizeReport rep;
    rep.initial_cost = r.get<double>(o, "initial_cost", "optimizer");
    rep.final_cost = r.get<double>(o, "final_cost", "optimizer");
    rep.iterations = r.get<int>(o, "iterations", "optimizer");
    rep.termination = termination_from_string(r, r.get<std::string>(o, "termination", "optimizer"));
    res.optimizer = rep;
  }
  if (doc.contains("warnings")) {
    const json& w = r.array(doc, "warnings", "");
    for (std::size_t k = 0; k < w.size(); ++k) res.warnings.push_back(r.as<std::string>(w[k], "warnings"));
  }
  return res;
}

std::string result_to_json(const ResultFile& res) {
  if (res.pose_ids.size() != res.poses.size()) {
    throw Error(ErrorKind::InvalidArgument, "result pose ids and poses differ in length");
  }
  json poses = json::array();
  for (std::size_t p = 0; p < res.poses.size(); ++p) {
    poses.push_back({{"pose_id", res.pose_ids[p]},
                     {"rotation", vec3_json(res.poses[p].rotation)},
                     {"translation", vec3_json(res.poses[p].translation)}});
  }
  json doc = {{"format", "lfcalib-result"},
              {"version", 1},
              {"tool_version", res.tool_version},
              {"input_digest", res.input_digest},
              {"camera_kind", std::string(to_string(res.camera_kind))},
              {"intrinsics", intrinsics_json(res.intrinsics)},
              {"distortion", distortion_json(res.distortion)},
              {"distortion_estimated", res.distortion_estimated},
              {"poses", std::move(poses)}};
  json metrics = json::object();
  if (res.initial) metrics["initial"] = metric_json(*res.initial);
  if (res.optimized) metrics["optimized"] = metric_json(*res.optimized);
  doc["metrics"] = metrics;
  if (res.optimizer) {
    doc["optimizer"] = {{"initial_cost", res.optimizer->initial_cost},
                        {"final_cost", res.optimizer->final_cost},
                        {"iterations", res.optimizer->iterations},
                        {"termination", std::string(to_string(res.optimizer->termination))}};
  }
  doc["warnings"] = res.warnings;
  return doc.dump(2) + "\n";
}

}  // namespace lfcalib
