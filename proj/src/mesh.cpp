#include "ellcount/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ellcount::pde {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinAngleDeg = 20.0;

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const Point2& a, const Point2& b, const Point2& c) { return 0.5 * cross(b - a, c - a); }

// The whole hexagonal ring pattern is rotated by a fixed irrational-looking
// angle so that radial vertex lines avoid the coordinate axes.
constexpr double kRotation = 0.1234;

std::vector<double> ring_angles(int k) {
  const int count = 6 * k;
  std::vector<double> a(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) a[static_cast<std::size_t>(j)] = kRotation + kTwoPi * j / count;
  return a;
}

double wrap_diff(double a, double b) {
  double d = std::fmod(a - b, kTwoPi);
  if (d > std::numbers::pi) d -= kTwoPi;
  if (d < -std::numbers::pi) d += kTwoPi;
  return d;
}

DiskMesh build(double r, int rings) {
  DiskMesh mesh;
  mesh.radius = r;
  mesh.rings = rings;
  mesh.vertices.emplace_back(0.0, 0.0);
  std::vector<int> prev_ids{0};
  std::vector<double> prev_angles{0.0};
  for (int k = 1; k <= rings; ++k) {
    const double rk = (k == rings) ? r : r * k / rings;
    const auto angles = ring_angles(k);
    std::vector<int> ids(angles.size());
    for (std::size_t j = 0; j < angles.size(); ++j) {
      ids[j] = static_cast<int>(mesh.vertices.size());
      mesh.vertices.emplace_back(rk * std::cos(angles[j]), rk * std::sin(angles[j]));
    }
    if (k == 1) {
      for (std::size_t j = 0; j < ids.size(); ++j) {
        mesh.triangles.push_back({0, ids[j], ids[(j + 1) % ids.size()]});
      }
    } else {
      // zipper between consecutive rings
      const int ni = static_cast<int>(prev_ids.size());
      const int no = static_cast<int>(ids.size());
      int j0 = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < no; ++j) {
        const double d = std::abs(wrap_diff(angles[static_cast<std::size_t>(j)], prev_angles[0]));
        if (d < best) {
          best = d;
          j0 = j;
        }
      }
      std::vector<double> in_u(static_cast<std::size_t>(ni) + 1), out_u(static_cast<std::size_t>(no) + 1);
      for (int i = 0; i <= ni; ++i) {
        in_u[static_cast<std::size_t>(i)] = prev_angles[static_cast<std::size_t>(i % ni)] + (i == ni ? kTwoPi : 0.0);
      }
      const double out0 = prev_angles[0] + wrap_diff(angles[static_cast<std::size_t>(j0)], prev_angles[0]);
      for (int m = 0; m <= no; ++m) {
        const int j = (j0 + m) % no;
        out_u[static_cast<std::size_t>(m)] =
            out0 + wrap_diff(angles[static_cast<std::size_t>(j)], angles[static_cast<std::size_t>(j0)]);
      }
      // make outer angles monotone
      for (int m = 1; m <= no; ++m) {
        while (out_u[static_cast<std::size_t>(m)] <= out_u[static_cast<std::size_t>(m - 1)]) {
          out_u[static_cast<std::size_t>(m)] += kTwoPi;
        }
      }
      int i = 0, m = 0;
      while (i < ni || m < no) {
        const int a = prev_ids[static_cast<std::size_t>(i % ni)];
        const int b = ids[static_cast<std::size_t>((j0 + m) % no)];
        bool advance_inner;
        if (m == no) {
          advance_inner = true;
        } else if (i == ni) {
          advance_inner = false;
        } else {
          // shorter of the two candidate diagonals
          const auto& pv = mesh.vertices;
          const int in_next = prev_ids[static_cast<std::size_t>((i + 1) % ni)];
          const int out_next = ids[static_cast<std::size_t>((j0 + m + 1) % no)];
          const double d_inner = (pv[static_cast<std::size_t>(in_next)] - pv[static_cast<std::size_t>(b)]).norm();
          const double d_outer = (pv[static_cast<std::size_t>(out_next)] - pv[static_cast<std::size_t>(a)]).norm();
          advance_inner = d_inner < d_outer;
        }
        if (advance_inner) {
          const int c = prev_ids[static_cast<std::size_t>((i + 1) % ni)];
          mesh.triangles.push_back({a, b, c});
          ++i;
        } else {
          const int c = ids[static_cast<std::size_t>((j0 + m + 1) % no)];
          mesh.triangles.push_back({a, b, c});
          ++m;
        }
      }
    }
    prev_ids = std::move(ids);
    prev_angles = angles;
  }
  for (auto& t : mesh.triangles) {
    const auto& p = mesh.vertices;
    if (signed_area(p[static_cast<std::size_t>(t[0])], p[static_cast<std::size_t>(t[1])],
                    p[static_cast<std::size_t>(t[2])]) < 0) {
      std::swap(t[1], t[2]);
    }
  }
  mesh.boundary = prev_ids;
  mesh.on_boundary.assign(mesh.vertices.size(), 0);
  for (int v : mesh.boundary) mesh.on_boundary[static_cast<std::size_t>(v)] = 1;
  const auto q = measure_quality(mesh);
  mesh.h = q.h;
  mesh.min_angle_deg = q.min_angle_deg;
  return mesh;
}

}  // namespace

double DiskMesh::area(std::size_t tri) const {
  const auto& t = triangles[tri];
  return signed_area(vertices[static_cast<std::size_t>(t[0])], vertices[static_cast<std::size_t>(t[1])],
                     vertices[static_cast<std::size_t>(t[2])]);
}

Point2 DiskMesh::centroid(std::size_t tri) const {
  const auto& t = triangles[tri];
  return (vertices[static_cast<std::size_t>(t[0])] + vertices[static_cast<std::size_t>(t[1])] +
          vertices[static_cast<std::size_t>(t[2])]) /
         3.0;
}

MeshQuality measure_quality(const DiskMesh& mesh) {
  MeshQuality q{0.0, 180.0};
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const Point2& a = mesh.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>(e)])];
      const Point2& b = mesh.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>((e + 1) % 3)])];
      const Point2& c = mesh.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>((e + 2) % 3)])];
      q.h = std::max(q.h, (b - a).norm());
      const Point2 u = b - a, v = c - a;
      const double ang = std::atan2(std::abs(cross(u, v)), u.dot(v)) * 180.0 / std::numbers::pi;
      q.min_angle_deg = std::min(q.min_angle_deg, ang);
    }
  }
  return q;
}

DiskMesh mesh_disk(double r, double target_h) {
  if (!(r > 0)) throw std::invalid_argument("mesh radius must be positive");
  if (!(target_h > 0) || !(target_h <= r / 2.0)) throw std::invalid_argument("mesh size must satisfy 0 < h <= r/2");
  // longest edge is the diagonal of a radial/arc cell, about 1.45 r / K
  int rings = std::max(4, static_cast<int>(std::floor(1.4 * r / target_h)));
  for (int guard = 0; guard < 64; ++guard, ++rings) {
    DiskMesh mesh = build(r, rings);
    if (mesh.h <= target_h) {
      if (mesh.min_angle_deg < kMinAngleDeg) {
        throw std::runtime_error("disk mesh violates the 20 degree minimum-angle bound");
      }
      return mesh;
    }
  }
  throw std::runtime_error("could not reach the requested mesh size");
}

std::array<double, 3> barycentric(const DiskMesh& mesh, int tri, const Point2& p) {
  const auto& t = mesh.triangles[static_cast<std::size_t>(tri)];
  const Point2& a = mesh.vertices[static_cast<std::size_t>(t[0])];
  const Point2& b = mesh.vertices[static_cast<std::size_t>(t[1])];
  const Point2& c = mesh.vertices[static_cast<std::size_t>(t[2])];
  const double det = cross(b - a, c - a);
  const double l1 = cross(p - a, c - a) / det;
  const double l2 = cross(b - a, p - a) / det;
  return {1.0 - l1 - l2, l1, l2};
}

PointLocator::PointLocator(const DiskMesh& mesh) : mesh_(&mesh) {
  origin_ = -mesh.radius * (1.0 + 1e-9);
  cell_ = std::max(mesh.h, 1e-12);
  side_ = static_cast<int>(std::ceil(-2.0 * origin_ / cell_)) + 1;
  buckets_.resize(static_cast<std::size_t>(side_) * static_cast<std::size_t>(side_));
  for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
    double xmin = std::numeric_limits<double>::infinity(), ymin = xmin, xmax = -xmin, ymax = -xmin;
    for (int v : mesh.triangles[ti]) {
      const auto& p = mesh.vertices[static_cast<std::size_t>(v)];
      xmin = std::min(xmin, p.x());
      xmax = std::max(xmax, p.x());
      ymin = std::min(ymin, p.y());
      ymax = std::max(ymax, p.y());
    }
    const int i0 = std::clamp(static_cast<int>(std::floor((xmin - origin_) / cell_)), 0, side_ - 1);
    const int i1 = std::clamp(static_cast<int>(std::floor((xmax - origin_) / cell_)), 0, side_ - 1);
    const int j0 = std::clamp(static_cast<int>(std::floor((ymin - origin_) / cell_)), 0, side_ - 1);
    const int j1 = std::clamp(static_cast<int>(std::floor((ymax - origin_) / cell_)), 0, side_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        buckets_[static_cast<std::size_t>(j) * static_cast<std::size_t>(side_) + static_cast<std::size_t>(i)]
            .push_back(static_cast<int>(ti));
  }
}

std::optional<Location> PointLocator::locate(const Point2& p, double snap) const {
  const int ci = static_cast<int>(std::floor((p.x() - origin_) / cell_));
  const int cj = static_cast<int>(std::floor((p.y() - origin_) / cell_));
  const int reach = snap > 0 ? 1 + static_cast<int>(std::ceil(snap / cell_)) : 0;
  Location best;
  double best_score = -std::numeric_limits<double>::infinity();
  constexpr double kInsideTol = -1e-12;
  for (int dj = -reach; dj <= reach; ++dj) {
    for (int di = -reach; di <= reach; ++di) {
      const int i = ci + di, j = cj + dj;
      if (i < 0 || j < 0 || i >= side_ || j >= side_) continue;
      for (int t : buckets_[static_cast<std::size_t>(j) * static_cast<std::size_t>(side_) + static_cast<std::size_t>(i)]) {
        const auto bc = barycentric(*mesh_, t, p);
        const double score = std::min({bc[0], bc[1], bc[2]});
        if (score >= kInsideTol) {
          return Location{t, bc, true};
        }
        if (score > best_score) {
          best_score = score;
          best.triangle = t;
          best.bary = bc;
        }
      }
    }
  }
  if (snap <= 0 || best.triangle < 0) return std::nullopt;
  // snap: clamp barycentric coordinates and renormalize
  double sum = 0.0;
  for (auto& b : best.bary) {
    b = std::max(b, 0.0);
    sum += b;
  }
  for (auto& b : best.bary) b /= sum;
  Point2 q = Point2::Zero();
  const auto& tri = mesh_->triangles[static_cast<std::size_t>(best.triangle)];
  for (int k = 0; k < 3; ++k) q += best.bary[static_cast<std::size_t>(k)] * mesh_->vertices[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
  if ((q - p).norm() > snap) return std::nullopt;
  best.inside = false;
  return best;
}

}  // namespace ellcount::pde
