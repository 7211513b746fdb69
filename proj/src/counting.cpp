#include "ellcount/counting.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ellcount::counting {

namespace {

void require_dimension(int n) {
  if (n < 2) {
    throw std::invalid_argument("ambient dimension must be >= 2, got " + std::to_string(n));
  }
}

}  // namespace

BigInt binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt result = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;
  }
  return result;
}

BigInt cumulative_harmonic_dim(int n, int d) {
  require_dimension(n);
  if (d < 0) throw std::invalid_argument("degree must be nonnegative, got " + std::to_string(d));
  return binomial(n + d - 1, d) + binomial(n + d - 2, d - 1);
}

BigInt homogeneous_harmonic_dim(int n, int d) {
  if (d == 0) return cumulative_harmonic_dim(n, 0);
  return cumulative_harmonic_dim(n, d) - cumulative_harmonic_dim(n, d - 1);
}

int eigen_index_to_degree(int n, std::int64_t k) {
  require_dimension(n);
  if (k < 1) throw std::invalid_argument("eigenvalue index must be >= 1");
  const BigInt target = k;
  int lo = 0, hi = 1;
  while (cumulative_harmonic_dim(n, hi) < target) {
    lo = hi;
    hi *= 2;
  }
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (cumulative_harmonic_dim(n, mid) < target) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::int64_t sphere_eigenvalue_exact(int n, std::int64_t k) {
  const std::int64_t q = eigen_index_to_degree(n, k);
  return q * q + static_cast<std::int64_t>(n - 2) * q;
}

double sphere_eigenvalue(int n, std::int64_t k) {
  return static_cast<double>(sphere_eigenvalue_exact(n, k));
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double sphere_count_constant(int n) {
  require_dimension(n);
  return std::pow(factorial(n - 1) / 2.0, 1.0 / (n - 1));
}

double eigen_rootsum_lower_bound(int n, std::int64_t k) {
  require_dimension(n);
  const double kk = static_cast<double>(k);
  const double nn = n;
  return sphere_count_constant(n) * ((nn - 1.0) / nn) * std::pow(kk, nn / (nn - 1.0)) -
         (nn - 1.0) * kk;
}

GrowthPartition::GrowthPartition(std::vector<double> degrees, std::vector<std::int64_t> block_dims)
    : degrees_(std::move(degrees)), block_dims_(std::move(block_dims)) {
  if (degrees_.size() < 2) {
    throw std::invalid_argument("growth partition needs at least one block (j >= 1)");
  }
  if (degrees_.front() != 0.0) {
    throw std::invalid_argument("growth partition must start at degree 0");
  }
  for (std::size_t i = 1; i < degrees_.size(); ++i) {
    if (!(degrees_[i] > degrees_[i - 1])) {
      throw std::invalid_argument("growth partition degrees must be strictly increasing");
    }
  }
  if (!block_dims_.empty()) {
    if (block_dims_.size() != degrees_.size() - 1) {
      throw std::invalid_argument("growth partition needs one block dimension per block");
    }
    for (auto k : block_dims_) {
      if (k < 0) throw std::invalid_argument("block dimensions must be nonnegative");
    }
  }
}

GrowthPartition GrowthPartition::unit_steps(int d) {
  if (d < 1) throw std::invalid_argument("unit-step partition needs d >= 1");
  std::vector<double> a(static_cast<std::size_t>(d) + 1);
  for (int i = 0; i <= d; ++i) a[static_cast<std::size_t>(i)] = i;
  return GrowthPartition(std::move(a));
}

double GrowthPartition::growth_exponent(int n) const {
  if (block_dims_.empty()) {
    throw std::logic_error("growth exponent requires block dimensions");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < block_dims_.size(); ++i) {
    s += (2.0 * (degrees_[i + 1] - 1.0) + n) * static_cast<double>(block_dims_[i]);
  }
  return s;
}

double rhs_2_12(int n, double d, double ratio, double hprime) {
  require_dimension(n);
  if (hprime < 0) throw std::invalid_argument("h' must be nonnegative");
  const double nn = n;
  const double slope = d + 1.5 * nn - 2.0;
  return slope * hprime - (1.0 / ratio) * sphere_count_constant(n) * ((nn - 1.0) / nn) *
                              std::pow(hprime, nn / (nn - 1.0));
}

RhsMaximum maximize_rhs_2_12(int n, double d, double ratio) {
  require_dimension(n);
  if (ratio < 1.0) throw std::invalid_argument("ellipticity ratio must be >= 1");
  const double slope = d + 1.5 * n - 2.0;
  const double scale = std::pow(ratio, n - 1);
  return {scale * (2.0 / factorial(n - 1)) * std::pow(slope, n - 1),
          scale * (2.0 / factorial(n)) * std::pow(slope, n)};
}

double weighted_dim_sum_bound(int n, const GrowthPartition& partition, double ratio) {
  require_dimension(n);
  return std::pow(ratio, n - 1) * (2.0 / factorial(n)) *
         std::pow(partition.top_degree() + 2.0 * n - 1.0, n);
}

double dim_sum_bound(int n, int d, double ratio) {
  require_dimension(n);
  if (d < 1) throw std::invalid_argument("dim_sum_bound needs a positive integer degree");
  return std::pow(ratio, n - 1) * (2.0 / factorial(n)) * std::pow(d + 2.0 * n, n);
}

double liminf_bound(int n, double ratio) {
  require_dimension(n);
  if (ratio < 1.0) throw std::invalid_argument("ellipticity ratio must be >= 1");
  return std::pow(ratio, n - 1) * 2.0 / factorial(n - 1);
}

double weighted_dim_sum(const GrowthPartition& partition, const std::vector<double>& dims) {
  const auto& a = partition.degrees();
  double total = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const auto idx = static_cast<std::size_t>(std::floor(a[i - 1]));
    if (idx >= dims.size()) throw std::out_of_range("dimension table too short for partition");
    total += (a[i] - a[i - 1]) * dims[idx];
  }
  return total;
}

}  // namespace ellcount::counting
