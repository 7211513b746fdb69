#pragma once

// Closed-form combinatorics for harmonic-polynomial dimensions, sphere
// spectra and the dimension envelopes built from them.
//
// Integer quantities are exact (arbitrary precision). Real-valued bounds are
// double precision and are reproducible to 12 significant digits.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <vector>

namespace ellcount::counting {

using BigInt = boost::multiprecision::cpp_int;

/// Exact binomial coefficient; zero when k < 0 or k > n.
BigInt binomial(std::int64_t n, std::int64_t k);

/// Dimension of harmonic polynomials of degree at most d on R^n:
/// C(n+d-1, d) + C(n+d-2, d-1).
BigInt cumulative_harmonic_dim(int n, int d);

/// Number of homogeneous harmonic polynomials of degree exactly d.
BigInt homogeneous_harmonic_dim(int n, int d);

/// Least q >= 0 with k <= cumulative_harmonic_dim(n, q).
int eigen_index_to_degree(int n, std::int64_t k);

/// k-th eigenvalue (1-based, with multiplicity) of the unit (n-1)-sphere.
std::int64_t sphere_eigenvalue_exact(int n, std::int64_t k);
double sphere_eigenvalue(int n, std::int64_t k);

/// Lower bound for sum_{i<=k} sqrt(eta_i) on the unit sphere:
/// c_n * ((n-1)/n) * k^{n/(n-1)} - (n-1) k  with c_n = ((n-1)!/2)^{1/(n-1)}.
double eigen_rootsum_lower_bound(int n, std::int64_t k);

/// ((n-1)!/2)^{1/(n-1)}
double sphere_count_constant(int n);

/// Strictly increasing degree sequence 0 = a_0 < ... < a_j = d with the
/// dimension increments k_i of each block.
class GrowthPartition {
public:
  GrowthPartition(std::vector<double> degrees, std::vector<std::int64_t> block_dims = {});

  /// a_i = i for i = 0..d.
  static GrowthPartition unit_steps(int d);

  const std::vector<double>& degrees() const { return degrees_; }
  const std::vector<std::int64_t>& block_dims() const { return block_dims_; }
  double top_degree() const { return degrees_.back(); }
  std::size_t blocks() const { return degrees_.size() - 1; }

  /// s = sum_i (2(a_i - 1) + n) k_i, the determinant growth exponent.
  double growth_exponent(int n) const;

private:
  std::vector<double> degrees_;
  std::vector<std::int64_t> block_dims_;
};

/// Right side of the rearranged dimension inequality as a function of h'.
double rhs_2_12(int n, double d, double ratio, double hprime);

struct RhsMaximum {
  double h_opt;
  double max_value;
};

/// Closed-form maximizer of rhs_2_12 over h' >= 0.
RhsMaximum maximize_rhs_2_12(int n, double d, double ratio);

/// ratio^{n-1} (2/n!) (d + 2n - 1)^n, bounding sum_i (a_i - a_{i-1}) h_{a_{i-1}}.
double weighted_dim_sum_bound(int n, const GrowthPartition& partition, double ratio);

/// ratio^{n-1} (2/n!) (d + 2n)^n, bounding sum_{i=1}^d h_i.
double dim_sum_bound(int n, int d, double ratio);

/// ratio^{n-1} 2/(n-1)!, bounding liminf d^{-(n-1)} h_d.
double liminf_bound(int n, double ratio);

/// sum_{i=1}^{j} (a_i - a_{i-1}) h_{a_{i-1}} where dims(a) = h at real degree a
/// is read as dims[floor(a)].
double weighted_dim_sum(const GrowthPartition& partition, const std::vector<double>& dims);

double factorial(int n);

}  // namespace ellcount::counting
