#pragma once

// Coefficient matrix fields (a^{ij}(x)) for divergence-form operators, their
// ellipticity profiles, and smoothing into nearby smooth fields.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ellcount {

inline constexpr int kMaxDim = 5;

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

inline Vec point2(double x, double y) {
  Vec p(2);
  p << x, y;
  return p;
}

struct EigenBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Extreme eigenvalues of a symmetric matrix.
EigenBounds eigen_bounds(const Mat& a);

/// Projects the eigenvalues of a symmetric matrix into [lower, upper].
Mat clip_eigenvalues(const Mat& a, double lower, double upper);

/// Anything that can be evaluated as a symmetric uniformly elliptic matrix field.
class MatrixField {
public:
  virtual ~MatrixField() = default;

  virtual int dim() const = 0;
  virtual Mat eval(const Vec& x) const = 0;
  Mat eval(double x, double y) const { return eval(point2(x, y)); }

  /// Global bounds: lambda I <= a(x) <= Lambda I.
  virtual double lambda() const = 0;
  virtual double Lambda() const = 0;

  /// True when the field is constant on cells with measure-zero interfaces.
  virtual bool piecewise_constant() const = 0;

  /// True when restrictions to circles centered at the origin are well defined.
  virtual bool has_boundary_traces() const = 0;

  /// Exact bounds over {|x| >= r}, when the family knows them in closed form.
  virtual std::optional<EigenBounds> analytic_bounds_outside(double r) const {
    (void)r;
    return std::nullopt;
  }
  /// Exact limits (lambda_inf, Lambda_inf), when known in closed form.
  virtual std::optional<EigenBounds> analytic_tail() const { return std::nullopt; }

  virtual std::string id() const = 0;
};

enum class Family { identity, constant_spd, radial_piecewise, periodic_checkerboard, conic_decay, random_measurable };

std::string family_name(Family f);
Family parse_family(const std::string& name);

struct ConstantParams {
  Mat matrix;
};

/// alpha(rho) I with alpha = values[i] on breaks[i-1] <= rho < breaks[i].
struct RadialParams {
  std::vector<double> breaks;
  std::vector<double> values;
};

/// values[parity] I where parity = sum_i floor((x_i - origin_i) / period) mod 2.
struct CheckerboardParams {
  double period = 1.0;
  double values[2] = {1.0, 2.0};
  Vec origin;
};

/// base + amplitude * exp(-rho / scale) I.
struct ConicDecayParams {
  Mat base;
  double amplitude = 1.0;
  double scale = 1.0;
};

/// Piecewise-constant SPD matrices on a grid of cubes with side `cell`.
struct RandomParams {
  double cell = 0.5;
};

using FamilyParams =
    std::variant<std::monostate, ConstantParams, RadialParams, CheckerboardParams, ConicDecayParams, RandomParams>;

enum class TailMode { automatic, analytic, sampled };

class CoefficientField final : public MatrixField {
public:
  CoefficientField(int n, Family family, FamilyParams params, std::optional<double> lambda = std::nullopt,
                   std::optional<double> Lambda = std::nullopt, std::uint64_t seed = 0,
                   TailMode tail = TailMode::automatic, double r_max = 16.0);

  static CoefficientField identity(int n = 2);
  static CoefficientField constant(const Mat& a);
  static CoefficientField scalar(int n, double c);
  static CoefficientField diagonal(const std::vector<double>& diag);
  static CoefficientField radial_step(std::vector<double> breaks, std::vector<double> values, int n = 2);
  static CoefficientField checkerboard(double period, double low, double high, int n = 2);
  static CoefficientField conic_decay(const Mat& base, double amplitude, double scale = 1.0);
  static CoefficientField random_measurable(int n, double lambda, double Lambda, double cell, std::uint64_t seed);

  int dim() const override { return n_; }
  Mat eval(const Vec& x) const override;
  using MatrixField::eval;
  double lambda() const override { return lambda_; }
  double Lambda() const override { return Lambda_; }
  bool piecewise_constant() const override;
  bool has_boundary_traces() const override { return family_ != Family::random_measurable; }
  std::optional<EigenBounds> analytic_bounds_outside(double r) const override;
  std::optional<EigenBounds> analytic_tail() const override;
  std::string id() const override;

  Family family() const { return family_; }
  const FamilyParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  TailMode tail_mode() const { return tail_; }
  double r_max() const { return r_max_; }

  /// Affine image of the Laplacian; polynomial-growth dimensions are known exactly.
  bool is_constant() const { return family_ == Family::identity || family_ == Family::constant_spd; }

private:
  EigenBounds family_bounds() const;

  int n_;
  Family family_;
  FamilyParams params_;
  double lambda_;
  double Lambda_;
  std::uint64_t seed_;
  TailMode tail_;
  double r_max_;
};

struct EllipticityProfile {
  std::vector<double> radii;
  std::vector<double> lambda_r;
  std::vector<double> Lambda_r;
  std::vector<double> sampled_lambda_r;
  std::vector<double> sampled_Lambda_r;
  double lambda_inf = 0.0;
  double Lambda_inf = 0.0;
  double ratio_inf = 1.0;
  bool analytic = false;
  double r_max = 0.0;
  std::uint64_t seed = 0;

  std::string provenance() const;
};

/// Sampled (and, where available, closed-form) ellipticity bounds outside B(r)
/// for every r in `radii`, truncated at the field's R_max.
EllipticityProfile ellipticity_profile(const MatrixField& field, const std::vector<double>& radii,
                                       int samples_per_shell = 2000, double r_max = 16.0, std::uint64_t seed = 7);

/// Bounds over {|x| >= r}: closed form when available, else sampled.
EigenBounds annulus_bounds(const MatrixField& field, double r, double r_max = 16.0);

struct MollifyOptions {
  int max_grid_side = 2400;
  double safety = 0.9;
};

/// Grid-sampled smoothing of a field on B(r) with eigenvalue clipping.
///
/// Evaluation bilinearly interpolates the convolved samples, then clips into
/// [lambda, Lambda], and into [lambda_{r0}, Lambda_{r0}] for |x| >= r0.
/// Outside the sampling window the (clipped) base field is returned.
class MollifiedField final : public MatrixField {
public:
  int dim() const override { return 2; }
  Mat eval(const Vec& x) const override;
  using MatrixField::eval;
  double lambda() const override { return base_->lambda(); }
  double Lambda() const override { return base_->Lambda(); }
  bool piecewise_constant() const override { return false; }
  bool has_boundary_traces() const override { return true; }
  std::optional<EigenBounds> analytic_bounds_outside(double r) const override;
  std::optional<EigenBounds> analytic_tail() const override { return base_->analytic_tail(); }
  std::string id() const override;

  const MatrixField& base() const { return *base_; }
  double epsilon() const { return epsilon_; }
  double radius() const { return r_; }
  double inner_radius() const { return r0_; }
  double kernel_width() const { return width_; }
  double grid_spacing() const { return spacing_; }
  int grid_side() const { return side_; }
  double exceptional_set_measure() const { return exceptional_measure_; }
  EigenBounds annulus() const { return annulus_; }

private:
  friend std::shared_ptr<const MollifiedField> mollify(std::shared_ptr<const MatrixField>, double, double, double,
                                                      const MollifyOptions&);
  MollifiedField() = default;

  Mat interpolate(double x, double y) const;

  std::shared_ptr<const MatrixField> base_;
  double epsilon_ = 0.0;
  double r_ = 0.0;
  double r0_ = 0.0;
  double width_ = 0.0;
  double spacing_ = 0.0;
  int side_ = 0;
  double origin_ = 0.0;
  std::vector<double> a11_, a12_, a22_;
  double exceptional_measure_ = 0.0;
  EigenBounds annulus_;
};

/// Thrown when the requested measure budget needs a grid finer than allowed.
class MollifyError : public std::runtime_error {
public:
  MollifyError(const std::string& what, int required_side)
      : std::runtime_error(what), required_side_(required_side) {}
  int required_side() const { return required_side_; }

private:
  int required_side_;
};

std::shared_ptr<const MollifiedField> mollify(std::shared_ptr<const MatrixField> field, double epsilon, double r,
                                             double r0, const MollifyOptions& options = {});

}  // namespace ellcount
