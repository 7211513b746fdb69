#pragma once

// Solution spaces with polynomial-growth traces, their Dirichlet Gram
// matrices, and the numerical checks behind the dimension bounds.

#include "ellcount/counting.hpp"
#include "ellcount/fem.hpp"
#include "ellcount/fields.hpp"
#include "ellcount/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ellcount::dimension {

/// Dirichlet solutions on B(R) with traces R^p cos p theta, R^p sin p theta,
/// normalized to vanish at the origin.
struct HarmonicBasis {
  std::shared_ptr<const MatrixField> field;
  std::shared_ptr<const pde::DiskMesh> mesh;
  std::shared_ptr<const pde::DirichletSolver> solver;
  double R = 0.0;
  std::vector<int> degrees;   // trace degree p per member
  std::vector<int> modes;     // 0 = cos, 1 = sin
  Eigen::MatrixXd U;          // nodal values, one column per member
  std::vector<double> origin_values;  // subtracted value at the origin
  std::vector<double> growth_exponents;  // empty until measured

  int size() const { return static_cast<int>(degrees.size()); }
  HarmonicBasis subset(const std::vector<int>& members) const;
};

/// Degrees 1..d, both modes, on a fresh mesh of B(R) with size h.
HarmonicBasis build_polynomial_basis(std::shared_ptr<const MatrixField> field, int d, double R, double h);
/// Same with an existing solver (shares its mesh and factorization).
HarmonicBasis build_polynomial_basis(std::shared_ptr<const pde::DirichletSolver> solver, int d);

struct GramRecord {
  double t = 0.0;
  Eigen::MatrixXd D;
  double logdet = 0.0;     // ln det D_t
  double condition = 0.0;  // largest / smallest eigenvalue
};

GramRecord gram_matrix(const HarmonicBasis& basis, double t);

struct DetGrowth {
  double r0 = 0.0;
  std::vector<double> radii;           // radii used in the fit
  std::vector<double> log_det_ratio;   // ln det_{D_r0} D_r
  std::vector<double> excluded_radii;  // condition number above 1e12
  double slope = 0.0;
  double s = 0.0;  // growth exponent of the declared partition
};

/// Least-squares slope of ln det_{D_r0} D_r against ln r. `radii` must hold
/// at least 4 values; r0 is the first.
DetGrowth det_growth_exponent(const HarmonicBasis& basis, const std::vector<double>& radii, double s = 0.0);

/// Geometric grid of `count` radii from a to b.
std::vector<double> geometric_radii(double a, double b, int count);

struct Lemma1Result {
  double t = 0.0;
  int k = 0;
  std::vector<double> eta;
  double lhs = 0.0;  // 2 sum sqrt(eta_i)
  double rhs = 0.0;  // sum of boundary integrals of |grad u_i|^2 phi dA
  double margin = 0.0;
  double invariance_residual = 0.0;     // |RHS(VQ) - RHS(V)| for a random orthogonal Q
  double orthonormality_residual = 0.0; // max |V^T D_t V - I|
  std::vector<double> variational_margins;  // per i: A-form - eta_i M-form of the constructed basis
};

/// Orthonormalizes the basis in D_t and evaluates Lemma 1 on the circle |x| = t.
/// `spectrum` must hold at least basis.size() eigenvalues at the same t.
Lemma1Result lemma1_check(const HarmonicBasis& basis, double t, const spectral::BoundarySpectrum& spectrum,
                          std::uint64_t seed = 1, int boundary_samples = 4096);

struct IntegratedResult {
  double r0 = 0.0;
  double r = 0.0;
  std::vector<double> t;
  std::vector<double> root_sums;  // sum_i sqrt(eta_i(t))
  double lhs = 0.0;               // 2 int sum sqrt(eta_i) dt
  double rhs = 0.0;               // Lambda_r0 ln det_{D_r0} D_r
  double margin = 0.0;
  double lambda_r0 = 0.0;
  double Lambda_r0 = 0.0;
  double chain_lower = 0.0;       // 2 lambda_r0 rootsum_bound(k) ln(r / r0)
  double chain_margin = 0.0;      // lhs - chain_lower
  int points_per_octave = 0;
};

/// Trapezoidal rule in ln t on a geometric grid with `points_per_octave` >= 8.
/// Ellipticity bounds on |x| >= r0 come from the field's profile.
IntegratedResult integrated_eigen_check(const HarmonicBasis& basis, double r0, double r, int points_per_octave = 16,
                                        int spectral_grid = 1024);

struct DimsConfig {
  double R = 4.0;
  double h = 0.05;
  double r0 = 1.0;
  int growth_radii = 8;          // geometric radii in [r0, R/2]
  int circle_samples = 512;
  double growth_margin = 0.3;    // members with exponent <= p + margin count toward h_p
  double flag_band = 0.1;        // members within this of the cutoff are flagged
  double rank_threshold = 1e-6;  // relative singular value cutoff
};

struct DimEstimate {
  int d = 0;
  std::vector<long> exact;      // Laplacian values h_p, p = 0..d
  std::vector<int> estimated;   // p = 0..d
  std::vector<bool> ambiguous;  // rank decision within one decade of the threshold
  std::vector<std::string> flags;
  std::vector<double> growth_exponents;
  std::vector<int> degrees;
  std::vector<double> singular_values;  // scaled Gram at r0, degree <= d members
  DimsConfig config;
};

/// Measures sup |u| on circles in [r0, R/2] and sets basis.growth_exponents.
void measure_growth(HarmonicBasis& basis, const DimsConfig& config);

/// Numerical h_p for p = 0..d (d <= 4).
DimEstimate estimate_dims(std::shared_ptr<const MatrixField> field, int d, const DimsConfig& config = {});

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - value, or the quantity's own margin
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct ReportConfig {
  DimsConfig dims;
  std::optional<counting::GrowthPartition> partition;  // default a_i = i
  int max_numeric_degree = 4;
  double lemma1_tol = 1e-3;
  double eigen_tol = 1e-6;
  double integrated_tol = 1e-3;
  double growth_rel_tol = 0.05;  // det-growth slope may exceed s by this fraction
  int spectral_grid = 1024;
  int points_per_octave = 16;
  double mollify_epsilon = 0.05;
  std::uint64_t seed = 1;
};

struct BoundReport {
  std::string field_id;
  std::string provenance;
  std::uint64_t seed = 0;
  int n = 2;
  int d = 0;
  double ratio_inf = 1.0;
  double lambda_inf = 1.0;
  double Lambda_inf = 1.0;
  bool exact_dims = false;  // dims from the Laplacian formula rather than estimates
  std::vector<long> exact;  // Laplacian h_p
  std::vector<double> dims; // dims used by the inequalities
  std::optional<DimEstimate> estimate;
  std::vector<double> partition_degrees;
  double s = 0.0;
  counting::RhsMaximum rhs_max;
  double rhs_at_hprime = 0.0;
  double weighted_sum = 0.0;
  double weighted_bound = 0.0;
  double dim_sum = 0.0;
  double dim_sum_env = 0.0;
  double liminf_env = 0.0;
  bool sharp = false;
  double mollify_epsilon = 0.0;  // epsilon actually used; 0 when no smoothing was needed
  std::optional<DetGrowth> growth;
  std::vector<Check> checks;
  ReportConfig config;

  bool pass() const;
};

/// Theorem 2 and Corollary 3 for a field. The numerical chain (growth slope,
/// Lemma 1, eigenvalue comparison, integrated inequality) runs when d <= 4.
BoundReport theorem2_report(std::shared_ptr<const MatrixField> field, int d, const ReportConfig& config = {});

}  // namespace ellcount::dimension
