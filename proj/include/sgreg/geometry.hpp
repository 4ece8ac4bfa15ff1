#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sgreg/common.hpp"

namespace sgreg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Points = std::vector<Vec3>;

inline double rad2deg(double r) { return r * 180.0 / M_PI; }
inline double deg2rad(double d) { return d * M_PI / 180.0; }

/// Rigid motion p -> R p + t.
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }

  static Transform from_yaw(double yaw, const Vec3& t = Vec3::Zero()) {
    Transform out;
    out.rotation = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
    out.translation = t;
    return out;
  }

  static Transform from_matrix(const Mat4& m) {
    Transform out;
    out.rotation = m.topLeftCorner<3, 3>();
    out.translation = m.topRightCorner<3, 1>();
    return out;
  }

  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }

  /// Composition: (a * b)(p) = a(b(p)).
  Transform operator*(const Transform& other) const {
    Transform out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
  }

  Transform inverse() const {
    Transform out;
    out.rotation = rotation.transpose();
    out.translation = -(out.rotation * translation);
    return out;
  }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  bool is_valid(double tol = 1e-9) const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
  }
};

/// Closest rotation in Frobenius norm.
inline Mat3 project_to_so3(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

/// Geodesic angle of a rotation, radians in [0, pi].
inline double rotation_angle(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c);
}

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

inline Vec3 centroid(const Points& pts) {
  Vec3 c = Vec3::Zero();
  if (pts.empty()) return c;
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

inline Points transform_points(const Points& pts, const Transform& t) {
  Points out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(t * p);
  return out;
}

struct VoxelKey {
  std::int64_t x = 0, y = 0, z = 0;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = hash_combine(static_cast<std::uint64_t>(k.x), static_cast<std::uint64_t>(k.y));
    return static_cast<std::size_t>(hash_combine(h, static_cast<std::uint64_t>(k.z)));
  }
};

inline VoxelKey voxel_of(const Vec3& p, double voxel) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel))};
}

using VoxelSet = std::unordered_set<VoxelKey, VoxelKeyHash>;

inline VoxelSet voxelize(const Points& pts, double voxel) {
  VoxelSet out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.insert(voxel_of(p, voxel));
  return out;
}

/// One representative (the centroid) per occupied voxel, ordered by first
/// occurrence so the output is deterministic.
inline Points voxel_downsample(const Points& pts, double voxel) {
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot;
  std::vector<Vec3> sums;
  std::vector<int> counts;
  for (const auto& p : pts) {
    auto [it, inserted] = slot.try_emplace(voxel_of(p, voxel), sums.size());
    if (inserted) {
      sums.push_back(Vec3::Zero());
      counts.push_back(0);
    }
    sums[it->second] += p;
    ++counts[it->second];
  }
  Points out(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) out[i] = sums[i] / counts[i];
  return out;
}

/// Uniform hash grid over a fixed point set, for fixed-radius neighbor queries.
class PointGrid {
 public:
  PointGrid(const Points& pts, double cell) : points_(&pts), cell_(cell) {
    if (!(cell > 0)) throw InvalidArgument("PointGrid: cell size must be positive");
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[voxel_of(pts[i], cell_)].push_back(i);
  }

  /// Calls fn(index, squared_distance) for every point within `radius` of q.
  template <typename Fn>
  void for_each_within(const Vec3& q, double radius, Fn&& fn) const {
    const double r2 = radius * radius;
    const auto span = static_cast<std::int64_t>(std::ceil(radius / cell_));
    const VoxelKey c = voxel_of(q, cell_);
    for (std::int64_t dx = -span; dx <= span; ++dx)
      for (std::int64_t dy = -span; dy <= span; ++dy)
        for (std::int64_t dz = -span; dz <= span; ++dz) {
          auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (std::size_t idx : it->second) {
            const double d2 = ((*points_)[idx] - q).squaredNorm();
            if (d2 < r2) fn(idx, d2);
          }
        }
  }

  std::size_t count_within(const Vec3& q, double radius) const {
    std::size_t n = 0;
    for_each_within(q, radius, [&](std::size_t, double) { ++n; });
    return n;
  }

  /// Nearest point strictly within `radius`, or -1.
  long nearest_within(const Vec3& q, double radius) const {
    long best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for_each_within(q, radius, [&](std::size_t idx, double d2) {
      if (d2 < best_d2 || (d2 == best_d2 && static_cast<long>(idx) < best)) {
        best_d2 = d2;
        best = static_cast<long>(idx);
      }
    });
    return best;
  }

 private:
  const Points* points_;
  double cell_;
  std::unordered_map<VoxelKey, std::vector<std::size_t>, VoxelKeyHash> cells_;
};

}  // namespace sgreg
