#pragma once

// Spectrum of the weighted boundary operator phi^{-1} div(phi grad) on the
// circle |x| = t, discretized with periodic P1 elements in the angle.

#include "ellcount/fields.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <filesystem>
#include <string>
#include <vector>

namespace ellcount::spectral {

struct BoundarySpectrum {
  double t = 0.0;
  std::string field_id;
  int m = 0;
  int grid = 0;
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;     // grid x m nodal values, M-orthonormal
  Eigen::SparseMatrix<double> A;    // stiffness, weight phi / |tangent|_g / t
  Eigen::SparseMatrix<double> M;    // Euclidean mass t dtheta
  double mass_weight_residual = 0.0;  // max |M_phi - M| entry, relative to max |M|
  std::string solver;                 // "dense" or "shift-invert"
};

/// Grid sizes up to this use the dense generalized eigensolver.
inline constexpr int kDenseGridLimit = 256;

/// First m eigenvalues on a uniform grid of `grid_size` angles (grid_size >= 8 m).
/// The field must have well-defined boundary traces (mollify measurable fields first).
BoundarySpectrum boundary_spectrum(const MatrixField& field, double t, int m, int grid_size);

/// sphere_eigenvalue(n, k) / t^2.
double euclidean_sphere_oracle(int n, double t, int k);

/// eta_k - lambda_r0^2 eta_k(1) t^{-2} for k = 1..m.
std::vector<double> verify_eigen_lower_bound(const BoundarySpectrum& spectrum, double lambda_r0, double t);

/// Rows k, eta_k, oracle (Euclidean sphere value at t), margin.
void export_spectrum(const BoundarySpectrum& spectrum, double lambda_r0, const std::filesystem::path& path);

}  // namespace ellcount::spectral
