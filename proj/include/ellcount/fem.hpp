#pragma once

// P1 Galerkin solver for div(a grad v) = 0 on a disk with Dirichlet data.

#include "ellcount/fields.hpp"
#include "ellcount/geometry.hpp"
#include "ellcount/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace ellcount::pde {

using BoundaryFunction = std::function<double(double x, double y)>;

struct FemSolution {
  std::shared_ptr<const DiskMesh> mesh;
  Eigen::VectorXd values;  // nodal values
  Eigen::VectorXd trace;   // prescribed values, in mesh.boundary order
  std::string field_id;
  double energy = 0.0;     // u^T K u
  double residual = 0.0;   // max interior |K u| relative to |K| |u|
  bool max_principle_ok = true;
  std::string solver;      // "ldlt" or "cg"
};

/// Assembles and factors the stiffness matrix once; solves for many traces.
class DirichletSolver {
public:
  DirichletSolver(std::shared_ptr<const DiskMesh> mesh, std::shared_ptr<const MatrixField> field,
                  std::optional<geometry::ElementRule> rule = std::nullopt);

  FemSolution solve(const Eigen::VectorXd& trace) const;
  FemSolution solve(const BoundaryFunction& g) const;

  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }
  const geometry::EnergyForm& form() const { return *form_; }
  std::shared_ptr<const geometry::EnergyForm> form_ptr() const { return form_; }
  const DiskMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const DiskMesh> mesh_ptr() const { return mesh_; }
  std::shared_ptr<const MatrixField> field_ptr() const { return field_; }

private:
  std::shared_ptr<const DiskMesh> mesh_;
  std::shared_ptr<const MatrixField> field_;
  std::shared_ptr<const geometry::EnergyForm> form_;
  Eigen::SparseMatrix<double> stiffness_;
  Eigen::SparseMatrix<double> interior_;   // K_II
  Eigen::SparseMatrix<double> coupling_;   // K_IB
  std::vector<int> interior_index_;        // vertex -> interior slot or -1
  std::vector<int> boundary_index_;        // vertex -> boundary slot or -1
  std::vector<int> interior_vertices_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool use_cg_ = false;
};

/// Samples a boundary function on the boundary ring.
Eigen::VectorXd sample_trace(const DiskMesh& mesh, const BoundaryFunction& g);

FemSolution solve_dirichlet(std::shared_ptr<const DiskMesh> mesh, std::shared_ptr<const MatrixField> field,
                            const BoundaryFunction& trace);

/// P1 interpolant at p; points just outside the inscribed polygon are snapped.
double evaluate(const FemSolution& sol, const PointLocator& locator, const Point2& p);

struct ApproximationError {
  double gap = 0.0;          // D(u - v, u - v) in the coefficients of field_a
  double base_energy = 0.0;  // D(u, u)
  FemSolution u;
  FemSolution v;
};

/// Energy gap between the solutions for field_a and field_b with the same trace.
/// Both coefficient fields are averaged over elements with field_b's rule so
/// that the gap measures the fields rather than their sampling.
ApproximationError approximation_error(std::shared_ptr<const DiskMesh> mesh, std::shared_ptr<const MatrixField> field_a,
                                       std::shared_ptr<const MatrixField> field_b, const BoundaryFunction& trace);

/// Writes <prefix>_vertices.csv (id,x,y,value,boundary) and <prefix>_triangles.csv (id,v0,v1,v2).
void export_solution(const FemSolution& sol, const std::filesystem::path& prefix);

}  // namespace ellcount::pde
