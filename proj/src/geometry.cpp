#include "ellcount/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ellcount::geometry {

using pde::Point2;

ConformalData conformal_data(const MatrixField& field, const Vec& x) {
  const int n = field.dim();
  if (x.size() != n) throw std::invalid_argument("conformal_data: point has wrong dimension");
  ConformalData cd;
  Vec dir(n);
  const double rho = x.norm();
  if (rho == 0.0) {
    dir.setZero();
    dir[0] = 1.0;
    cd.at_origin = true;
  } else {
    dir = x / rho;
  }
  const Mat a = field.eval(x);
  cd.w = dir.dot(a * dir);
  const double det_a = a.determinant();
  cd.phi = std::pow(cd.w, 0.5 * (n - 2)) * std::sqrt(det_a);
  cd.g_inv = cd.w * a;
  cd.g = cd.g_inv.inverse();
  cd.g = 0.5 * (cd.g + cd.g.transpose()).eval();
  cd.det_g = cd.g.determinant();
  return cd;
}

double radial_gradient_norm(const MatrixField& field, const Vec& x) {
  if (x.norm() == 0.0) throw std::invalid_argument("radial gradient is undefined at the origin");
  const auto cd = conformal_data(field, x);
  const Vec dir = x / x.norm();
  return std::sqrt(dir.dot(cd.g_inv * dir));
}

double tangent_length(const ConformalData& cd, const Vec& x) {
  if (x.size() != 2) throw std::invalid_argument("tangent_length is implemented for n = 2");
  const double rho = x.norm();
  Vec tau(2);
  if (rho == 0.0) {
    tau << 0.0, 1.0;
  } else {
    tau << -x[1] / rho, x[0] / rho;
  }
  return std::sqrt(tau.dot(cd.g * tau));
}

WeightIdentityResult boundary_weight_identity(const MatrixField& field, double t, int quadrature_size) {
  if (field.dim() != 2) throw std::invalid_argument("boundary_weight_identity is implemented for n = 2");
  if (!(t > 0)) throw std::invalid_argument("radius must be positive");
  if (quadrature_size < 8) throw std::invalid_argument("quadrature needs at least 8 nodes");
  constexpr int kTests = 6;
  auto test_fn = [](int k, double th) {
    switch (k) {
      case 0: return 1.0;
      case 1: return std::cos(th);
      case 2: return std::sin(th);
      case 3: return std::cos(2 * th);
      case 4: return std::sin(2 * th);
      default: return std::exp(std::cos(th));
    }
  };
  WeightIdentityResult res;
  res.euclidean.assign(kTests, 0.0);
  res.weighted.assign(kTests, 0.0);
  const double dth = 2.0 * std::numbers::pi / quadrature_size;
  for (int q = 0; q < quadrature_size; ++q) {
    const double th = q * dth;
    const Vec x = point2(t * std::cos(th), t * std::sin(th));
    const auto cd = conformal_data(field, x);
    const double dA_g = t * tangent_length(cd, x) * dth;
    const double dA_0 = t * dth;
    for (int k = 0; k < kTests; ++k) {
      const double f = test_fn(k, th);
      res.euclidean[static_cast<std::size_t>(k)] += f * dA_0;
      res.weighted[static_cast<std::size_t>(k)] += f * cd.phi * dA_g;
    }
  }
  for (int k = 0; k < kTests; ++k) {
    res.residual = std::max(res.residual, std::abs(res.euclidean[static_cast<std::size_t>(k)] -
                                                   res.weighted[static_cast<std::size_t>(k)]));
  }
  return res;
}

ElementRule element_rule(const MatrixField& field) {
  if (field.piecewise_constant()) return {{{1.0 / 3, 1.0 / 3, 1.0 / 3}}, {1.0}};
  return {{{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}},
          {1.0 / 3, 1.0 / 3, 1.0 / 3}};
}

namespace {

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Signed area of {|x| <= t} intersected with triangle (0, p, q).
double edge_disk_area(const Point2& p, const Point2& q, double t) {
  const Point2 d = q - p;
  const double A = d.squaredNorm();
  if (A == 0.0) return 0.0;
  const double B = p.dot(d);
  const double C = p.squaredNorm() - t * t;
  std::vector<double> cuts{0.0};
  const double disc = B * B - A * C;
  if (disc > 0) {
    const double sq = std::sqrt(disc);
    for (double s : {(-B - sq) / A, (-B + sq) / A}) {
      if (s > 0.0 && s < 1.0) cuts.push_back(s);
    }
  }
  cuts.push_back(1.0);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const Point2 a = p + cuts[k] * d;
    const Point2 b = p + cuts[k + 1] * d;
    const Point2 mid = 0.5 * (a + b);
    if (mid.squaredNorm() <= t * t) {
      total += 0.5 * cross(a, b);
    } else {
      total += 0.5 * t * t * std::atan2(cross(a, b), a.dot(b));
    }
  }
  return total;
}

}  // namespace

double triangle_disk_area(const Point2& a, const Point2& b, const Point2& c, double t) {
  const double r2 = t * t;
  if (a.squaredNorm() <= r2 && b.squaredNorm() <= r2 && c.squaredNorm() <= r2) {
    return std::abs(0.5 * cross(b - a, c - a));
  }
  return std::abs(edge_disk_area(a, b, t) + edge_disk_area(b, c, t) + edge_disk_area(c, a, t));
}

EnergyForm::EnergyForm(std::shared_ptr<const pde::DiskMesh> mesh, std::shared_ptr<const MatrixField> field,
                       std::optional<ElementRule> rule)
    : mesh_(std::move(mesh)), field_(std::move(field)) {
  if (!mesh_ || !field_) throw std::invalid_argument("EnergyForm needs a mesh and a field");
  if (field_->dim() != 2) throw std::invalid_argument("disk energies are implemented for n = 2");
  rule_ = rule ? *rule : element_rule(*field_);
  const auto nt = mesh_->num_triangles();
  coeff_.resize(nt);
  grads_.resize(nt);
  for (std::size_t e = 0; e < nt; ++e) {
    const auto& tri = mesh_->triangles[e];
    const Point2& p0 = mesh_->vertices[static_cast<std::size_t>(tri[0])];
    const Point2& p1 = mesh_->vertices[static_cast<std::size_t>(tri[1])];
    const Point2& p2 = mesh_->vertices[static_cast<std::size_t>(tri[2])];
    const double det = cross(p1 - p0, p2 - p0);
    Eigen::Matrix<double, 2, 3> g;
    g.col(0) << (p1.y() - p2.y()) / det, (p2.x() - p1.x()) / det;
    g.col(1) << (p2.y() - p0.y()) / det, (p0.x() - p2.x()) / det;
    g.col(2) << (p0.y() - p1.y()) / det, (p1.x() - p0.x()) / det;
    grads_[e] = g;
    Eigen::Matrix2d avg = Eigen::Matrix2d::Zero();
    for (std::size_t q = 0; q < rule_.weights.size(); ++q) {
      const auto& l = rule_.bary[q];
      const Point2 x = l[0] * p0 + l[1] * p1 + l[2] * p2;
      const Mat a = field_->eval(x.x(), x.y());
      avg += rule_.weights[q] * Eigen::Matrix2d(a);
    }
    coeff_[e] = avg;
  }
}

Eigen::Vector2d EnergyForm::gradient(std::size_t tri, const Eigen::Ref<const Eigen::VectorXd>& u) const {
  const auto& t = mesh_->triangles[tri];
  return grads_[tri] * Eigen::Vector3d(u[t[0]], u[t[1]], u[t[2]]);
}

std::vector<double> EnergyForm::clipped_areas(double t) const {
  if (t > mesh_->radius * (1.0 + 1e-12)) {
    throw std::invalid_argument("mesh of radius " + std::to_string(mesh_->radius) + " does not cover B(" +
                                std::to_string(t) + ")");
  }
  std::vector<double> areas(mesh_->num_triangles());
  const double far = t + mesh_->h;
  for (std::size_t e = 0; e < areas.size(); ++e) {
    const auto& tri = mesh_->triangles[e];
    double nearest = std::numeric_limits<double>::infinity();
    for (int v : tri) nearest = std::min(nearest, mesh_->vertices[static_cast<std::size_t>(v)].norm());
    if (nearest >= far) {
      areas[e] = 0.0;
      continue;
    }
    areas[e] = triangle_disk_area(mesh_->vertices[static_cast<std::size_t>(tri[0])],
                                  mesh_->vertices[static_cast<std::size_t>(tri[1])],
                                  mesh_->vertices[static_cast<std::size_t>(tri[2])], t);
  }
  return areas;
}

double EnergyForm::energy(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
                          double t) const {
  const auto areas = clipped_areas(t);
  double total = 0.0;
  for (std::size_t e = 0; e < areas.size(); ++e) {
    if (areas[e] == 0.0) continue;
    total += gradient(e, u).dot(coeff_[e] * gradient(e, v)) * areas[e];
  }
  return total;
}

double EnergyForm::energy(const Eigen::Ref<const Eigen::VectorXd>& u,
                          const Eigen::Ref<const Eigen::VectorXd>& v) const {
  double total = 0.0;
  for (std::size_t e = 0; e < mesh_->num_triangles(); ++e) {
    total += gradient(e, u).dot(coeff_[e] * gradient(e, v)) * mesh_->area(e);
  }
  return total;
}

double EnergyForm::riemannian_energy(const Eigen::Ref<const Eigen::VectorXd>& u,
                                     const Eigen::Ref<const Eigen::VectorXd>& v, double t) const {
  const auto areas = clipped_areas(t);
  double total = 0.0;
  for (std::size_t e = 0; e < areas.size(); ++e) {
    if (areas[e] == 0.0) continue;
    const auto& tri = mesh_->triangles[e];
    const Point2& p0 = mesh_->vertices[static_cast<std::size_t>(tri[0])];
    const Point2& p1 = mesh_->vertices[static_cast<std::size_t>(tri[1])];
    const Point2& p2 = mesh_->vertices[static_cast<std::size_t>(tri[2])];
    const Eigen::Vector2d gu = gradient(e, u), gv = gradient(e, v);
    double density = 0.0;
    for (std::size_t q = 0; q < rule_.weights.size(); ++q) {
      const auto& l = rule_.bary[q];
      const Point2 x = l[0] * p0 + l[1] * p1 + l[2] * p2;
      const auto cd = conformal_data(*field_, point2(x.x(), x.y()));
      // <grad_g u, grad_g v>_g = u_i g^{ij} v_j ; dV_g = sqrt(det g_ij) dx
      const Eigen::Matrix2d ginv(cd.g_inv);
      density += rule_.weights[q] * gu.dot(ginv * gv) * cd.phi * std::sqrt(cd.det_g);
    }
    total += density * areas[e];
  }
  return total;
}

Eigen::MatrixXd EnergyForm::gram(const Eigen::Ref<const Eigen::MatrixXd>& U, double t) const {
  const auto areas = clipped_areas(t);
  const auto k = U.cols();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd grads(2, k);
  for (std::size_t e = 0; e < areas.size(); ++e) {
    if (areas[e] == 0.0) continue;
    const auto& tri = mesh_->triangles[e];
    for (Eigen::Index c = 0; c < k; ++c) {
      grads.col(c) = grads_[e] * Eigen::Vector3d(U(tri[0], c), U(tri[1], c), U(tri[2], c));
    }
    G.noalias() += areas[e] * grads.transpose() * coeff_[e] * grads;
  }
  return 0.5 * (G + G.transpose());
}

EnergyValue weighted_energy(const EnergyForm& form, const Eigen::Ref<const Eigen::VectorXd>& u,
                            const Eigen::Ref<const Eigen::VectorXd>& v, double t, int i, int j) {
  EnergyValue ev;
  ev.t = t;
  ev.i = i;
  ev.j = j;
  ev.value = form.energy(u, v, t);
  ev.riemannian = form.riemannian_energy(u, v, t);
  // Cauchy-Schwarz scale, meaningful even when D_t(u, v) cancels to zero
  const double scale = std::max(std::sqrt(std::abs(form.energy(u, u, t) * form.energy(v, v, t))), 1e-300);
  if (std::abs(ev.value - ev.riemannian) > 1e-9 * scale) {
    throw std::logic_error("Euclidean and Riemannian Dirichlet forms disagree");
  }
  return ev;
}

}  // namespace ellcount::geometry
