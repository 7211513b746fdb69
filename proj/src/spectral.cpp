#include "ellcount/spectral.hpp"

#include "ellcount/counting.hpp"
#include "ellcount/geometry.hpp"
#include "ellcount/io.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ellcount::spectral {

namespace {

constexpr double kGauss = 0.28867513459481287;  // 1 / (2 sqrt 3)

Eigen::MatrixXd dense_eigvecs_sorted(const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd>& es, int m) {
  return es.eigenvectors().leftCols(m);
}

// Shift-invert subspace iteration with Rayleigh-Ritz on [A - sigma M]^{-1} M.
void subspace_iteration(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& M, double sigma,
                        int m, const Eigen::VectorXd& theta, std::vector<double>& values, Eigen::MatrixXd& vectors) {
  const auto N = A.rows();
  const int p = static_cast<int>(std::min<Eigen::Index>(N, std::max(2 * m, m + 8)));
  Eigen::SparseMatrix<double> K = A - sigma * M;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("shifted boundary operator could not be factored");

  // Start from the Euclidean Fourier modes.
  Eigen::MatrixXd X(N, p);
  for (int c = 0; c < p; ++c) {
    const int q = (c + 1) / 2;
    for (Eigen::Index j = 0; j < N; ++j) X(j, c) = (c % 2 == 1) ? std::cos(q * theta[j]) : (c == 0 ? 1.0 : std::sin(q * theta[j]));
  }
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::infinity());
  for (int it = 0; it < 1000; ++it) {
    const Eigen::MatrixXd Y = ldlt.solve(M * X);
    const Eigen::MatrixXd Ar = Y.transpose() * (A * Y);
    const Eigen::MatrixXd Mr = Y.transpose() * (M * Y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Ar + Ar.transpose()),
                                                                0.5 * (Mr + Mr.transpose()));
    if (es.info() != Eigen::Success) throw std::runtime_error("Rayleigh-Ritz step failed");
    X = Y * es.eigenvectors();
    const Eigen::VectorXd mu = es.eigenvalues();
    double change = 0.0;
    const double scale = std::max(1.0, std::abs(mu[m - 1]));
    for (int i = 0; i < m; ++i) change = std::max(change, std::abs(mu[i] - prev[i]) / scale);
    prev = mu;
    if (change < 1e-12 && it > 0) {
      values.assign(mu.data(), mu.data() + m);
      vectors = X.leftCols(m);
      return;
    }
  }
  throw std::runtime_error("boundary eigensolver did not converge");
}

}  // namespace

BoundarySpectrum boundary_spectrum(const MatrixField& field, double t, int m, int grid_size) {
  if (field.dim() != 2) throw std::invalid_argument("boundary spectra are implemented for n = 2");
  if (!(t > 0)) throw std::invalid_argument("radius must be positive");
  if (m < 1) throw std::invalid_argument("eigenvalue count must be at least 1");
  if (grid_size < 8 * m) throw std::invalid_argument("grid size must be at least 8 m to resolve m modes");
  if (!field.has_boundary_traces()) {
    throw std::invalid_argument("field '" + field.id() +
                                "' has no well-defined restriction to circles; mollify it first");
  }
  const int N = grid_size;
  const double dth = 2.0 * std::numbers::pi / N;
  Eigen::VectorXd theta(N);
  for (int j = 0; j < N; ++j) theta[j] = j * dth;

  auto sample = [&](double th) {
    const Vec x = point2(t * std::cos(th), t * std::sin(th));
    const auto cd = geometry::conformal_data(field, x);
    return std::pair{cd.phi, geometry::tangent_length(cd, x)};
  };

  std::vector<Eigen::Triplet<double>> ta, tm;
  Eigen::MatrixXd mass_phi_local(N, 3);  // per element: diag0, off, diag1
  double mass_residual = 0.0, mass_scale = 0.0;
  for (int e = 0; e < N; ++e) {
    const int i = e, j = (e + 1) % N;
    const auto [phi_mid, tau_mid] = sample(theta[e] + 0.5 * dth);
    if (!(phi_mid > 0) || !(tau_mid > 0)) throw std::runtime_error("boundary weight is not positive");
    const double c = phi_mid / (t * tau_mid);
    ta.emplace_back(i, i, c / dth);
    ta.emplace_back(j, j, c / dth);
    ta.emplace_back(i, j, -c / dth);
    ta.emplace_back(j, i, -c / dth);
    const double md = t * dth / 3.0, mo = t * dth / 6.0;
    tm.emplace_back(i, i, md);
    tm.emplace_back(j, j, md);
    tm.emplace_back(i, j, mo);
    tm.emplace_back(j, i, mo);
    // Same element mass with the weight phi dA_g, by 2-point Gauss quadrature.
    double d0 = 0, off = 0, d1 = 0;
    for (double s : {0.5 - kGauss, 0.5 + kGauss}) {
      const auto [phi, tau] = sample(theta[e] + s * dth);
      const double wgt = 0.5 * dth * phi * t * tau;
      d0 += wgt * (1 - s) * (1 - s);
      off += wgt * (1 - s) * s;
      d1 += wgt * s * s;
    }
    mass_residual = std::max({mass_residual, std::abs(d0 - md), std::abs(off - mo), std::abs(d1 - md)});
    mass_scale = std::max(mass_scale, md);
  }

  BoundarySpectrum sp;
  sp.t = t;
  sp.field_id = field.id();
  sp.m = m;
  sp.grid = N;
  sp.A.resize(N, N);
  sp.A.setFromTriplets(ta.begin(), ta.end());
  sp.M.resize(N, N);
  sp.M.setFromTriplets(tm.begin(), tm.end());
  sp.mass_weight_residual = mass_residual / mass_scale;

  if (N <= kDenseGridLimit) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(sp.A), Eigen::MatrixXd(sp.M));
    if (es.info() != Eigen::Success) throw std::runtime_error("mass matrix is not positive definite");
    sp.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + m);
    sp.eigenvectors = dense_eigvecs_sorted(es, m);
    sp.solver = "dense";
  } else {
    // Shift below zero so that the shifted operator is positive definite.
    double mean_c = 0.0;
    for (Eigen::Index col = 0; col < sp.A.outerSize(); ++col) mean_c += sp.A.coeff(col, col);
    mean_c *= dth / (2.0 * N);
    const double sigma = -0.1 * mean_c / t;
    subspace_iteration(sp.A, sp.M, sigma, m, theta, sp.eigenvalues, sp.eigenvectors);
    sp.solver = "shift-invert";
  }
  return sp;
}

double euclidean_sphere_oracle(int n, double t, int k) {
  if (!(t > 0)) throw std::invalid_argument("radius must be positive");
  return counting::sphere_eigenvalue(n, k) / (t * t);
}

std::vector<double> verify_eigen_lower_bound(const BoundarySpectrum& spectrum, double lambda_r0, double t) {
  std::vector<double> margins;
  margins.reserve(spectrum.eigenvalues.size());
  for (std::size_t k = 0; k < spectrum.eigenvalues.size(); ++k) {
    const double bound = lambda_r0 * lambda_r0 * counting::sphere_eigenvalue(2, static_cast<long>(k + 1)) / (t * t);
    margins.push_back(spectrum.eigenvalues[k] - bound);
  }
  return margins;
}

void export_spectrum(const BoundarySpectrum& spectrum, double lambda_r0, const std::filesystem::path& path) {
  const auto margins = verify_eigen_lower_bound(spectrum, lambda_r0, spectrum.t);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < spectrum.eigenvalues.size(); ++k) {
    rows.push_back({std::to_string(k + 1), io::fmt(spectrum.eigenvalues[k]),
                    io::fmt(euclidean_sphere_oracle(2, spectrum.t, static_cast<int>(k + 1))), io::fmt(margins[k])});
  }
  io::write_csv(path, {"k", "eta", "oracle", "margin"}, rows);
}

}  // namespace ellcount::spectral
