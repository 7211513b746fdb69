#pragma once

// Translation between L-harmonic and phi-harmonic functions: the conformal
// metric g^{ij} = w a^{ij}, the weight phi, and Dirichlet energies on disks.

#include "ellcount/fields.hpp"
#include "ellcount/mesh.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace ellcount::geometry {

struct ConformalData {
  double w = 0.0;    // a^{ij} rho_i rho_j
  double phi = 0.0;  // w^{(n-2)/2} sqrt(det a)
  Mat g_inv;         // w a
  Mat g;             // (w a)^{-1}
  double det_g = 0.0;
  bool at_origin = false;  // direction e_1 used for rho_i
};

ConformalData conformal_data(const MatrixField& field, const Vec& x);

/// |grad_g rho| = sqrt(g^{ij} rho_i rho_j); equals w(x).
double radial_gradient_norm(const MatrixField& field, const Vec& x);

/// Length of the Euclidean unit tangent on the circle through x, measured in g.
double tangent_length(const ConformalData& cd, const Vec& x);

struct WeightIdentityResult {
  std::vector<double> euclidean;  // closed integral of f dA_0, per test function
  std::vector<double> weighted;   // closed integral of f phi dA_g
  double residual = 0.0;          // max |difference|
};

/// Compares the Euclidean length element on the circle |x| = t with phi times
/// the length element induced by g, integrated against 1, cos, sin, cos 2, sin 2
/// and a positive bump; trapezoidal rule with `quadrature_size` nodes.
WeightIdentityResult boundary_weight_identity(const MatrixField& field, double t, int quadrature_size);

/// Quadrature rule used for per-element coefficient averages:
/// centroid for piecewise-constant fields, 3-point (degree 2) otherwise.
struct ElementRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;
};
ElementRule element_rule(const MatrixField& field);

/// Area of the intersection of a triangle with the disk |x| <= t.
double triangle_disk_area(const pde::Point2& a, const pde::Point2& b, const pde::Point2& c, double t);

/// Dirichlet form D_t(u, v) of P1 functions on a disk mesh.
///
/// Computed in Euclidean form, sum_e (grad u)^T abar_e (grad v) |e cap B(t)|,
/// where abar_e is the element-averaged coefficient. The Riemannian form with
/// weight phi and volume dV_g is available for cross-checks.
class EnergyForm {
public:
  /// `rule` overrides the field's default element rule.
  EnergyForm(std::shared_ptr<const pde::DiskMesh> mesh, std::shared_ptr<const MatrixField> field,
             std::optional<ElementRule> rule = std::nullopt);

  const pde::DiskMesh& mesh() const { return *mesh_; }
  const MatrixField& field() const { return *field_; }
  std::shared_ptr<const pde::DiskMesh> mesh_ptr() const { return mesh_; }
  std::shared_ptr<const MatrixField> field_ptr() const { return field_; }

  /// Element-averaged coefficient matrix.
  const Eigen::Matrix2d& coefficient(std::size_t tri) const { return coeff_[tri]; }
  /// Gradients of the three hat functions of element `tri`, as columns.
  const Eigen::Matrix<double, 2, 3>& hat_gradients(std::size_t tri) const { return grads_[tri]; }
  /// Gradient of the P1 interpolant of `u` on element `tri`.
  Eigen::Vector2d gradient(std::size_t tri, const Eigen::Ref<const Eigen::VectorXd>& u) const;

  double energy(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
                double t) const;
  double energy(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v) const;

  /// Same integral evaluated pointwise as <grad_g u, grad_g v>_g phi dV_g.
  double riemannian_energy(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
                           double t) const;

  /// Gram matrix D_t(u_i, u_j) for the columns of U.
  Eigen::MatrixXd gram(const Eigen::Ref<const Eigen::MatrixXd>& U, double t) const;

  /// Area of each element inside B(t).
  std::vector<double> clipped_areas(double t) const;

private:
  std::shared_ptr<const pde::DiskMesh> mesh_;
  std::shared_ptr<const MatrixField> field_;
  ElementRule rule_;
  std::vector<Eigen::Matrix2d> coeff_;
  std::vector<Eigen::Matrix<double, 2, 3>> grads_;  // hat-function gradients per element
};

struct EnergyValue {
  double value = 0.0;
  double t = 0.0;
  int i = 0;
  int j = 0;
  double riemannian = 0.0;  // cross-check route
};

/// D_t(u, v) for P1 functions; throws when the mesh does not cover B(t).
EnergyValue weighted_energy(const EnergyForm& form, const Eigen::Ref<const Eigen::VectorXd>& u,
                            const Eigen::Ref<const Eigen::VectorXd>& v, double t, int i = 0, int j = 0);

}  // namespace ellcount::geometry
