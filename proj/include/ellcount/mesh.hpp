#pragma once

// Quasi-uniform triangulations of Euclidean disks B(r) in the plane.

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace ellcount::pde {

using Point2 = Eigen::Vector2d;
using Triangle = std::array<int, 3>;

struct DiskMesh {
  double radius = 0.0;
  std::vector<Point2> vertices;
  std::vector<Triangle> triangles;  // counterclockwise
  std::vector<int> boundary;        // ordered counterclockwise by angle
  std::vector<char> on_boundary;    // per vertex
  int rings = 0;
  double h = 0.0;                   // longest edge
  double min_angle_deg = 0.0;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  double area(std::size_t tri) const;
  Point2 centroid(std::size_t tri) const;
};

/// Concentric-ring triangulation of B(r) with longest edge <= target_h and
/// minimum angle >= 20 degrees. The origin is a vertex; ring k carries 6k
/// vertices at radius k r / K with a per-ring angular offset.
DiskMesh mesh_disk(double r, double target_h);

struct MeshQuality {
  double h;
  double min_angle_deg;
};
MeshQuality measure_quality(const DiskMesh& mesh);

struct Location {
  int triangle = -1;
  std::array<double, 3> bary{};
  bool inside = false;  // false when the point was snapped onto the nearest element
};

/// Bucket-grid point location in a DiskMesh.
class PointLocator {
public:
  explicit PointLocator(const DiskMesh& mesh);

  /// Locates p; points outside the polygon snap to the closest element
  /// (barycentric coordinates clamped) when within `snap` of it.
  std::optional<Location> locate(const Point2& p, double snap = 0.0) const;

private:
  const DiskMesh* mesh_;
  double origin_;
  double cell_;
  int side_;
  std::vector<std::vector<int>> buckets_;
};

/// Barycentric coordinates of p in triangle t.
std::array<double, 3> barycentric(const DiskMesh& mesh, int tri, const Point2& p);

}  // namespace ellcount::pde
