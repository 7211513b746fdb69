#include "ellcount/fem.hpp"

#include "ellcount/io.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ellcount::pde {

DirichletSolver::DirichletSolver(std::shared_ptr<const DiskMesh> mesh, std::shared_ptr<const MatrixField> field,
                                 std::optional<geometry::ElementRule> rule)
    : mesh_(std::move(mesh)), field_(std::move(field)) {
  form_ = std::make_shared<geometry::EnergyForm>(mesh_, field_, std::move(rule));
  const auto nv = static_cast<Eigen::Index>(mesh_->num_vertices());

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh_->num_triangles() * 9);
  for (std::size_t e = 0; e < mesh_->num_triangles(); ++e) {
    const auto& tri = mesh_->triangles[e];
    const auto& g = form_->hat_gradients(e);
    const Eigen::Matrix3d local = mesh_->area(e) * g.transpose() * form_->coefficient(e) * g;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.emplace_back(tri[static_cast<std::size_t>(i)], tri[static_cast<std::size_t>(j)], local(i, j));
  }
  stiffness_.resize(nv, nv);
  stiffness_.setFromTriplets(trips.begin(), trips.end());

  interior_index_.assign(static_cast<std::size_t>(nv), -1);
  boundary_index_.assign(static_cast<std::size_t>(nv), -1);
  for (std::size_t b = 0; b < mesh_->boundary.size(); ++b) boundary_index_[static_cast<std::size_t>(mesh_->boundary[b])] = static_cast<int>(b);
  for (Eigen::Index v = 0; v < nv; ++v) {
    if (!mesh_->on_boundary[static_cast<std::size_t>(v)]) {
      interior_index_[static_cast<std::size_t>(v)] = static_cast<int>(interior_vertices_.size());
      interior_vertices_.push_back(static_cast<int>(v));
    }
  }
  const auto ni = static_cast<Eigen::Index>(interior_vertices_.size());
  const auto nb = static_cast<Eigen::Index>(mesh_->boundary.size());
  std::vector<Eigen::Triplet<double>> tii, tib;
  for (Eigen::Index col = 0; col < stiffness_.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness_, col); it; ++it) {
      const int ri = interior_index_[static_cast<std::size_t>(it.row())];
      if (ri < 0) continue;
      const int ci = interior_index_[static_cast<std::size_t>(it.col())];
      if (ci >= 0) {
        tii.emplace_back(ri, ci, it.value());
      } else {
        tib.emplace_back(ri, boundary_index_[static_cast<std::size_t>(it.col())], it.value());
      }
    }
  }
  interior_.resize(ni, ni);
  interior_.setFromTriplets(tii.begin(), tii.end());
  coupling_.resize(ni, nb);
  coupling_.setFromTriplets(tib.begin(), tib.end());

  ldlt_.compute(interior_);
  if (ldlt_.info() != Eigen::Success) {
    use_cg_ = true;
  } else {
    const auto d = ldlt_.vectorD();
    if (d.minCoeff() <= 0) throw std::runtime_error("stiffness matrix is singular: mesh or field defect");
  }
}

FemSolution DirichletSolver::solve(const Eigen::VectorXd& trace) const {
  if (trace.size() != static_cast<Eigen::Index>(mesh_->boundary.size())) {
    throw std::invalid_argument("trace size does not match the boundary ring");
  }
  const Eigen::VectorXd rhs = -(coupling_ * trace);
  Eigen::VectorXd interior;
  FemSolution sol;
  if (!use_cg_) {
    interior = ldlt_.solve(rhs);
    sol.solver = "ldlt";
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(100000);
    cg.compute(interior_);
    interior = cg.solve(rhs);
    if (cg.info() != Eigen::Success) throw std::runtime_error("iterative Dirichlet solve did not converge");
    sol.solver = "cg";
  }
  sol.mesh = mesh_;
  sol.trace = trace;
  sol.field_id = field_->id();
  sol.values.resize(static_cast<Eigen::Index>(mesh_->num_vertices()));
  for (std::size_t b = 0; b < mesh_->boundary.size(); ++b) sol.values[mesh_->boundary[b]] = trace[static_cast<Eigen::Index>(b)];
  for (std::size_t i = 0; i < interior_vertices_.size(); ++i) sol.values[interior_vertices_[i]] = interior[static_cast<Eigen::Index>(i)];

  sol.energy = sol.values.dot(stiffness_ * sol.values);
  const Eigen::VectorXd ku = stiffness_ * sol.values;
  double kmax = 0.0;
  for (Eigen::Index col = 0; col < stiffness_.outerSize(); ++col) {
    double rowsum = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness_, col); it; ++it) rowsum += std::abs(it.value());
    kmax = std::max(kmax, rowsum);
  }
  const double umax = std::max(sol.values.cwiseAbs().maxCoeff(), 1e-300);
  double res = 0.0;
  for (int v : interior_vertices_) res = std::max(res, std::abs(ku[v]));
  sol.residual = res / (kmax * umax);

  if (trace.size() > 0) {
    const double lo = trace.minCoeff(), hi = trace.maxCoeff();
    const bool rough = field_->piecewise_constant() && !(field_->lambda() == field_->Lambda());
    const double slack = (rough ? 1e-2 : 1e-9) * std::max(hi - lo, 1e-300);
    for (int v : interior_vertices_) {
      if (sol.values[v] < lo - slack || sol.values[v] > hi + slack) {
        sol.max_principle_ok = false;
        break;
      }
    }
  }
  return sol;
}

Eigen::VectorXd sample_trace(const DiskMesh& mesh, const BoundaryFunction& g) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(mesh.boundary.size()));
  for (std::size_t b = 0; b < mesh.boundary.size(); ++b) {
    const auto& p = mesh.vertices[static_cast<std::size_t>(mesh.boundary[b])];
    t[static_cast<Eigen::Index>(b)] = g(p.x(), p.y());
  }
  return t;
}

FemSolution DirichletSolver::solve(const BoundaryFunction& g) const { return solve(sample_trace(*mesh_, g)); }

FemSolution solve_dirichlet(std::shared_ptr<const DiskMesh> mesh, std::shared_ptr<const MatrixField> field,
                            const BoundaryFunction& trace) {
  DirichletSolver solver(std::move(mesh), std::move(field));
  return solver.solve(trace);
}

double evaluate(const FemSolution& sol, const PointLocator& locator, const Point2& p) {
  const auto loc = locator.locate(p, 2.0 * sol.mesh->h);
  if (!loc) throw std::out_of_range("point lies outside the mesh");
  const auto& tri = sol.mesh->triangles[static_cast<std::size_t>(loc->triangle)];
  double v = 0.0;
  for (int k = 0; k < 3; ++k) v += loc->bary[static_cast<std::size_t>(k)] * sol.values[tri[static_cast<std::size_t>(k)]];
  return v;
}

ApproximationError approximation_error(std::shared_ptr<const DiskMesh> mesh, std::shared_ptr<const MatrixField> field_a,
                                       std::shared_ptr<const MatrixField> field_b, const BoundaryFunction& trace) {
  const auto rule = geometry::element_rule(*field_b);
  DirichletSolver sa(mesh, field_a, rule);
  DirichletSolver sb(mesh, field_b, rule);
  ApproximationError out;
  out.u = sa.solve(trace);
  out.v = sb.solve(trace);
  const Eigen::VectorXd diff = out.u.values - out.v.values;
  out.gap = sa.form().energy(diff, diff);
  out.base_energy = sa.form().energy(out.u.values, out.u.values);
  return out;
}

void export_solution(const FemSolution& sol, const std::filesystem::path& prefix) {
  const auto& mesh = *sol.mesh;
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  {
    std::ofstream os(prefix.string() + "_vertices.csv");
    if (!os) throw std::runtime_error("cannot write " + prefix.string() + "_vertices.csv");
    os << "id,x,y,value,boundary\n";
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
      os << v << ',' << io::fmt(mesh.vertices[v].x()) << ',' << io::fmt(mesh.vertices[v].y()) << ','
         << io::fmt(sol.values[static_cast<Eigen::Index>(v)]) << ',' << static_cast<int>(mesh.on_boundary[v]) << '\n';
    }
  }
  std::ofstream os(prefix.string() + "_triangles.csv");
  if (!os) throw std::runtime_error("cannot write " + prefix.string() + "_triangles.csv");
  os << "id,v0,v1,v2\n";
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    os << t << ',' << tri[0] << ',' << tri[1] << ',' << tri[2] << '\n';
  }
}

}  // namespace ellcount::pde
