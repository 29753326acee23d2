#include "lfcalib/dataset.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "lfcalib/errors.hpp"
#include "lfcalib/rotation.hpp"

namespace lfcalib {

Mat3 Pose::rotation_matrix() const { return rodrigues(rotation); }

Pose Pose::from_matrix(const Mat3& r, const Vec3& t) { return {rodrigues_inv(r), t}; }

std::string_view to_string(CameraKind kind) {
  switch (kind) {
    case CameraKind::Conventional: return "conventional";
    case CameraKind::FocusedLongPath: return "focused_long_path";
    case CameraKind::FocusedShortPath: return "focused_short_path";
  }
  return "conventional";
}

CameraKind camera_kind_from_string(std::string_view name) {
  if (name == "conventional") return CameraKind::Conventional;
  if (name == "focused_long_path") return CameraKind::FocusedLongPath;
  if (name == "focused_short_path") return CameraKind::FocusedShortPath;
  throw Error(ErrorKind::ConfigInvalid, "unknown camera kind '" + std::string(name) + "'");
}

void BoardSpec::validate() const {
  if (rows < 2 || cols < 2) throw Error(ErrorKind::ConfigInvalid, "board needs at least 2x2 corners");
  if (!(cell_mm > 0.0) || !std::isfinite(cell_mm)) {
    throw Error(ErrorKind::ConfigInvalid, "board cell size must be positive");
  }
}

ViewGrid ViewGrid::centered(int rows, int cols) {
  if (rows < 1 || cols < 1) throw Error(ErrorKind::ConfigInvalid, "view grid must be non-empty");
  const int i_min = -(rows / 2);
  const int j_min = -(cols / 2);
  return {i_min, i_min + rows - 1, j_min, j_min + cols - 1};
}

void CalibrationDataset::validate() const {
  board.validate();
  std::set<int> pose_ids;
  for (const PoseObservations& p : poses) {
    if (!pose_ids.insert(p.pose_id).second) {
      throw Error(ErrorKind::Inconsistent, "duplicate pose id " + std::to_string(p.pose_id));
    }
    std::set<std::pair<int, int>> views;
    for (const ViewObservations& v : p.views) {
      if (!view_grid.contains(v.i, v.j)) {
        std::ostringstream os;
        os << "pose " << p.pose_id << ": view (" << v.i << ", " << v.j << ") outside view grid";
        throw Error(ErrorKind::Inconsistent, os.str());
      }
      if (!views.insert({v.i, v.j}).second) {
        std::ostringstream os;
        os << "pose " << p.pose_id << ": duplicate view (" << v.i << ", " << v.j << ")";
        throw Error(ErrorKind::Inconsistent, os.str());
      }
      std::set<std::pair<int, int>> corners;
      for (const CornerObservation& c : v.corners) {
        if (c.row < 0 || c.row >= board.rows || c.col < 0 || c.col >= board.cols) {
          std::ostringstream os;
          os << "pose " << p.pose_id << ": corner (" << c.row << ", " << c.col << ") outside board";
          throw Error(ErrorKind::Inconsistent, os.str());
        }
        if (!corners.insert({c.row, c.col}).second) {
          std::ostringstream os;
          os << "pose " << p.pose_id << ": duplicate corner (" << c.row << ", " << c.col << ")";
          throw Error(ErrorKind::Inconsistent, os.str());
        }
        if (!std::isfinite(c.u) || !std::isfinite(c.v)) {
          throw Error(ErrorKind::Inconsistent, "non-finite corner coordinate");
        }
      }
    }
  }
}

std::size_t CalibrationDataset::observation_count() const {
  std::size_t n = 0;
  for (const auto& p : poses)
    for (const auto& v : p.views) n += v.corners.size();
  return n;
}

std::vector<Observation> flatten(const CalibrationDataset& dataset) {
  std::vector<Observation> out;
  out.reserve(dataset.observation_count());
  for (std::size_t p = 0; p < dataset.poses.size(); ++p) {
    for (const ViewObservations& v : dataset.poses[p].views) {
      for (const CornerObservation& c : v.corners) {
        out.push_back({static_cast<int>(p), v.i, v.j, c.row, c.col,
                       dataset.board.corner(c.row, c.col), c.u, c.v});
      }
    }
  }
  return out;
}

}  // namespace lfcalib
