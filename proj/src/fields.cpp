#include "ellcount/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace ellcount {

namespace {

constexpr double kBoundSlack = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t cell_hash(std::uint64_t seed, const Eigen::Matrix<long long, Eigen::Dynamic, 1, 0, kMaxDim, 1>& cell) {
  std::uint64_t h = splitmix64(seed);
  for (Eigen::Index i = 0; i < cell.size(); ++i) {
    h = splitmix64(h ^ static_cast<std::uint64_t>(cell[i]));
  }
  return h;
}

double norm(const Vec& x) { return x.norm(); }

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

EigenBounds eigen_bounds(const Mat& a) {
  if (a.rows() == 2) {
    const double tr = 0.5 * (a(0, 0) + a(1, 1));
    const double diff = 0.5 * (a(0, 0) - a(1, 1));
    const double rad = std::hypot(diff, a(0, 1));
    return {tr - rad, tr + rad};
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

Mat clip_eigenvalues(const Mat& a, double lower, double upper) {
  const auto b = eigen_bounds(a);
  if (b.lower >= lower && b.upper <= upper) return a;
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  Vec ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = std::clamp(ev[i], lower, upper);
  Mat out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  // exact symmetry
  Mat sym = 0.5 * (out + out.transpose());
  return sym;
}

std::string family_name(Family f) {
  switch (f) {
    case Family::identity: return "identity";
    case Family::constant_spd: return "constant-SPD";
    case Family::radial_piecewise: return "radial-piecewise";
    case Family::periodic_checkerboard: return "periodic-checkerboard";
    case Family::conic_decay: return "conic-decay";
    case Family::random_measurable: return "seeded-random-measurable";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  for (auto f : {Family::identity, Family::constant_spd, Family::radial_piecewise, Family::periodic_checkerboard,
                 Family::conic_decay, Family::random_measurable}) {
    if (family_name(f) == name) return f;
  }
  throw std::invalid_argument("unknown field family '" + name + "'");
}

CoefficientField::CoefficientField(int n, Family family, FamilyParams params, std::optional<double> lambda,
                                   std::optional<double> Lambda, std::uint64_t seed, TailMode tail, double r_max)
    : n_(n), family_(family), params_(std::move(params)), lambda_(0), Lambda_(0), seed_(seed), tail_(tail),
      r_max_(r_max) {
  if (n_ < 1 || n_ > kMaxDim) throw std::invalid_argument("field dimension out of range");
  switch (family_) {
    case Family::identity:
      params_ = std::monostate{};
      break;
    case Family::constant_spd: {
      auto* p = std::get_if<ConstantParams>(&params_);
      if (!p || p->matrix.rows() != n_ || p->matrix.cols() != n_) {
        throw std::invalid_argument("constant-SPD field needs an n x n matrix");
      }
      if ((p->matrix - p->matrix.transpose()).cwiseAbs().maxCoeff() > 0) {
        throw std::invalid_argument("constant-SPD matrix must be symmetric");
      }
      break;
    }
    case Family::radial_piecewise: {
      auto* p = std::get_if<RadialParams>(&params_);
      if (!p || p->values.size() != p->breaks.size() + 1 || p->values.empty()) {
        throw std::invalid_argument("radial-piecewise field needs values.size() == breaks.size() + 1");
      }
      for (std::size_t i = 0; i < p->breaks.size(); ++i) {
        if (p->breaks[i] <= 0 || (i > 0 && p->breaks[i] <= p->breaks[i - 1])) {
          throw std::invalid_argument("radial-piecewise breaks must be positive and increasing");
        }
      }
      break;
    }
    case Family::periodic_checkerboard: {
      auto* p = std::get_if<CheckerboardParams>(&params_);
      if (!p || !(p->period > 0)) throw std::invalid_argument("checkerboard period must be positive");
      if (p->origin.size() == 0) p->origin = Vec::Zero(n_);
      if (p->origin.size() != n_) throw std::invalid_argument("checkerboard origin has wrong dimension");
      break;
    }
    case Family::conic_decay: {
      auto* p = std::get_if<ConicDecayParams>(&params_);
      if (!p || p->base.rows() != n_ || p->base.cols() != n_) {
        throw std::invalid_argument("conic-decay field needs an n x n base matrix");
      }
      if (p->amplitude < 0 || !(p->scale > 0)) {
        throw std::invalid_argument("conic-decay needs amplitude >= 0 and scale > 0");
      }
      break;
    }
    case Family::random_measurable: {
      auto* p = std::get_if<RandomParams>(&params_);
      if (!p || !(p->cell > 0)) throw std::invalid_argument("random field cell size must be positive");
      if (!lambda || !Lambda) throw std::invalid_argument("random field needs declared lambda and Lambda");
      break;
    }
  }
  if (family_ == Family::random_measurable) {
    lambda_ = *lambda;
    Lambda_ = *Lambda;
  } else {
    const auto b = family_bounds();
    if (b.lower <= 0) throw std::invalid_argument("field is not positive definite");
    if (lambda && *lambda > b.lower + kBoundSlack) {
      throw std::invalid_argument("declared lambda exceeds the field's smallest eigenvalue");
    }
    if (Lambda && *Lambda < b.upper - kBoundSlack) {
      throw std::invalid_argument("declared Lambda is below the field's largest eigenvalue");
    }
    lambda_ = lambda.value_or(b.lower);
    Lambda_ = Lambda.value_or(b.upper);
  }
  if (!(lambda_ > 0) || lambda_ > Lambda_) throw std::invalid_argument("need 0 < lambda <= Lambda");
  if (tail_ == TailMode::analytic && family_ == Family::random_measurable) {
    throw std::invalid_argument("random field has no analytic tail");
  }
}

CoefficientField CoefficientField::identity(int n) { return {n, Family::identity, std::monostate{}}; }

CoefficientField CoefficientField::constant(const Mat& a) {
  return {static_cast<int>(a.rows()), Family::constant_spd, ConstantParams{a}};
}

CoefficientField CoefficientField::scalar(int n, double c) {
  Mat a = c * Mat::Identity(n, n);
  return constant(a);
}

CoefficientField CoefficientField::diagonal(const std::vector<double>& diag) {
  const auto n = static_cast<int>(diag.size());
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) a(i, i) = diag[static_cast<std::size_t>(i)];
  return constant(a);
}

CoefficientField CoefficientField::radial_step(std::vector<double> breaks, std::vector<double> values, int n) {
  return {n, Family::radial_piecewise, RadialParams{std::move(breaks), std::move(values)}};
}

CoefficientField CoefficientField::checkerboard(double period, double low, double high, int n) {
  CheckerboardParams p;
  p.period = period;
  p.values[0] = low;
  p.values[1] = high;
  p.origin = Vec::Zero(n);
  return {n, Family::periodic_checkerboard, p};
}

CoefficientField CoefficientField::conic_decay(const Mat& base, double amplitude, double scale) {
  return {static_cast<int>(base.rows()), Family::conic_decay, ConicDecayParams{base, amplitude, scale}};
}

CoefficientField CoefficientField::random_measurable(int n, double lambda, double Lambda, double cell,
                                                     std::uint64_t seed) {
  return {n, Family::random_measurable, RandomParams{cell}, lambda, Lambda, seed, TailMode::sampled};
}

bool CoefficientField::piecewise_constant() const {
  return family_ == Family::radial_piecewise || family_ == Family::periodic_checkerboard ||
         family_ == Family::random_measurable || is_constant();
}

Mat CoefficientField::eval(const Vec& x) const {
  if (x.size() != n_) throw std::invalid_argument("evaluation point has wrong dimension");
  switch (family_) {
    case Family::identity:
      return Mat::Identity(n_, n_);
    case Family::constant_spd:
      return std::get<ConstantParams>(params_).matrix;
    case Family::radial_piecewise: {
      const auto& p = std::get<RadialParams>(params_);
      const double rho = norm(x);
      // closed on the outer side: rho == breaks[i] takes values[i + 1]
      const auto idx = static_cast<std::size_t>(std::upper_bound(p.breaks.begin(), p.breaks.end(), rho) -
                                                p.breaks.begin());
      return p.values[idx] * Mat::Identity(n_, n_);
    }
    case Family::periodic_checkerboard: {
      const auto& p = std::get<CheckerboardParams>(params_);
      long long parity = 0;
      for (int i = 0; i < n_; ++i) parity += static_cast<long long>(std::floor((x[i] - p.origin[i]) / p.period));
      return p.values[parity & 1LL] * Mat::Identity(n_, n_);
    }
    case Family::conic_decay: {
      const auto& p = std::get<ConicDecayParams>(params_);
      return p.base + p.amplitude * std::exp(-norm(x) / p.scale) * Mat::Identity(n_, n_);
    }
    case Family::random_measurable: {
      const auto& p = std::get<RandomParams>(params_);
      Eigen::Matrix<long long, Eigen::Dynamic, 1, 0, kMaxDim, 1> cell(n_);
      for (int i = 0; i < n_; ++i) cell[i] = static_cast<long long>(std::floor(x[i] / p.cell));
      std::mt19937_64 rng(cell_hash(seed_, cell));
      std::uniform_real_distribution<double> eig(lambda_, Lambda_);
      Vec ev(n_);
      for (int i = 0; i < n_; ++i) ev[i] = eig(rng);
      Mat q;
      if (n_ == 2) {
        std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
        const double t = angle(rng);
        q.resize(2, 2);
        q << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
      } else {
        std::normal_distribution<double> gauss;
        Mat g(n_, n_);
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j) g(i, j) = gauss(rng);
        q = Eigen::HouseholderQR<Mat>(g).householderQ();
      }
      Mat a = q * ev.asDiagonal() * q.transpose();
      return 0.5 * (a + a.transpose());
    }
  }
  return Mat::Identity(n_, n_);
}

EigenBounds CoefficientField::family_bounds() const {
  switch (family_) {
    case Family::identity:
      return {1.0, 1.0};
    case Family::constant_spd:
      return eigen_bounds(std::get<ConstantParams>(params_).matrix);
    case Family::radial_piecewise: {
      const auto& v = std::get<RadialParams>(params_).values;
      return {*std::min_element(v.begin(), v.end()), *std::max_element(v.begin(), v.end())};
    }
    case Family::periodic_checkerboard: {
      const auto& p = std::get<CheckerboardParams>(params_);
      return {std::min(p.values[0], p.values[1]), std::max(p.values[0], p.values[1])};
    }
    case Family::conic_decay: {
      const auto& p = std::get<ConicDecayParams>(params_);
      const auto b = eigen_bounds(p.base);
      return {b.lower, b.upper + p.amplitude};
    }
    case Family::random_measurable:
      return {lambda_, Lambda_};
  }
  return {lambda_, Lambda_};
}

std::optional<EigenBounds> CoefficientField::analytic_bounds_outside(double r) const {
  if (tail_ == TailMode::sampled) return std::nullopt;
  switch (family_) {
    case Family::identity:
    case Family::constant_spd:
    case Family::periodic_checkerboard:
      return family_bounds();
    case Family::radial_piecewise: {
      const auto& p = std::get<RadialParams>(params_);
      EigenBounds b{p.values.back(), p.values.back()};
      for (std::size_t i = 0; i + 1 < p.values.size(); ++i) {
        if (p.breaks[i] > r) {
          b.lower = std::min(b.lower, p.values[i]);
          b.upper = std::max(b.upper, p.values[i]);
        }
      }
      return b;
    }
    case Family::conic_decay: {
      const auto& p = std::get<ConicDecayParams>(params_);
      const auto b = eigen_bounds(p.base);
      return EigenBounds{b.lower, b.upper + p.amplitude * std::exp(-std::max(r, 0.0) / p.scale)};
    }
    case Family::random_measurable:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<EigenBounds> CoefficientField::analytic_tail() const {
  if (tail_ == TailMode::sampled) return std::nullopt;
  switch (family_) {
    case Family::radial_piecewise: {
      const double v = std::get<RadialParams>(params_).values.back();
      return EigenBounds{v, v};
    }
    case Family::conic_decay:
      return eigen_bounds(std::get<ConicDecayParams>(params_).base);
    case Family::random_measurable:
      return std::nullopt;
    default:
      return family_bounds();
  }
}

std::string CoefficientField::id() const {
  std::ostringstream os;
  os << family_name(family_) << "(n=" << n_;
  switch (family_) {
    case Family::identity:
      break;
    case Family::constant_spd: {
      const auto& m = std::get<ConstantParams>(params_).matrix;
      os << ",matrix=[";
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        os << (i ? ";" : "");
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << fmt_double(m(i, j));
      }
      os << "]";
      break;
    }
    case Family::radial_piecewise: {
      const auto& p = std::get<RadialParams>(params_);
      os << ",breaks=[";
      for (std::size_t i = 0; i < p.breaks.size(); ++i) os << (i ? "," : "") << fmt_double(p.breaks[i]);
      os << "],values=[";
      for (std::size_t i = 0; i < p.values.size(); ++i) os << (i ? "," : "") << fmt_double(p.values[i]);
      os << "]";
      break;
    }
    case Family::periodic_checkerboard: {
      const auto& p = std::get<CheckerboardParams>(params_);
      os << ",period=" << fmt_double(p.period) << ",values=[" << fmt_double(p.values[0]) << ","
         << fmt_double(p.values[1]) << "]";
      break;
    }
    case Family::conic_decay: {
      const auto& p = std::get<ConicDecayParams>(params_);
      os << ",amplitude=" << fmt_double(p.amplitude) << ",scale=" << fmt_double(p.scale);
      break;
    }
    case Family::random_measurable:
      os << ",cell=" << fmt_double(std::get<RandomParams>(params_).cell) << ",seed=" << seed_;
      break;
  }
  os << ")";
  return os.str();
}

std::string EllipticityProfile::provenance() const {
  if (analytic) return "analytic tail";
  std::ostringstream os;
  os << "sampled at R_max=" << r_max;
  return os.str();
}

EllipticityProfile ellipticity_profile(const MatrixField& field, const std::vector<double>& radii,
                                       int samples_per_shell, double r_max, std::uint64_t seed) {
  if (radii.empty()) throw std::invalid_argument("ellipticity profile needs at least one radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] < 0 || (i > 0 && radii[i] <= radii[i - 1])) {
      throw std::invalid_argument("profile radii must be nonnegative and increasing");
    }
  }
  if (samples_per_shell < 1000) throw std::invalid_argument("sampling budget must be >= 1000 points per shell");
  if (r_max <= radii.back()) r_max = 2.0 * radii.back() + 1.0;

  const int n = field.dim();
  const std::size_t m = radii.size();
  std::vector<EigenBounds> shell(m);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss;
  Vec x(n);
  for (std::size_t i = 0; i < m; ++i) {
    const double lo = radii[i];
    const double hi = i + 1 < m ? radii[i + 1] : r_max;
    EigenBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (int s = 0; s < samples_per_shell; ++s) {
      // uniform in volume: radius from the n-th root law, direction gaussian
      const double u = unit(rng);
      const double rho = std::pow(std::pow(lo, n) + u * (std::pow(hi, n) - std::pow(lo, n)), 1.0 / n);
      for (int k = 0; k < n; ++k) x[k] = gauss(rng);
      x *= rho / x.norm();
      const auto e = eigen_bounds(field.eval(x));
      b.lower = std::min(b.lower, e.lower);
      b.upper = std::max(b.upper, e.upper);
    }
    shell[i] = b;
  }

  EllipticityProfile prof;
  prof.radii = radii;
  prof.r_max = r_max;
  prof.seed = seed;
  prof.sampled_lambda_r.resize(m);
  prof.sampled_Lambda_r.resize(m);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = m; i-- > 0;) {
    lo = std::min(lo, shell[i].lower);
    hi = std::max(hi, shell[i].upper);
    prof.sampled_lambda_r[i] = lo;
    prof.sampled_Lambda_r[i] = hi;
  }
  prof.lambda_r = prof.sampled_lambda_r;
  prof.Lambda_r = prof.sampled_Lambda_r;

  const auto tail = field.analytic_tail();
  if (tail) {
    prof.analytic = true;
    for (std::size_t i = 0; i < m; ++i) {
      const auto b = field.analytic_bounds_outside(radii[i]);
      if (b) {
        prof.lambda_r[i] = b->lower;
        prof.Lambda_r[i] = b->upper;
      }
    }
    prof.lambda_inf = tail->lower;
    prof.Lambda_inf = tail->upper;
  } else {
    prof.lambda_inf = prof.lambda_r.back();
    prof.Lambda_inf = prof.Lambda_r.back();
  }
  prof.ratio_inf = prof.Lambda_inf / prof.lambda_inf;
  return prof;
}

EigenBounds annulus_bounds(const MatrixField& field, double r, double r_max) {
  if (auto b = field.analytic_bounds_outside(r)) return *b;
  const auto prof = ellipticity_profile(field, {r}, 4000, r_max);
  return {prof.lambda_r[0], prof.Lambda_r[0]};
}

// ---------------------------------------------------------------------------
// Mollification

namespace {

double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

std::vector<double> bump_weights(int half) {
  std::vector<double> w(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (int k = -half; k <= half; ++k) {
    const double v = bump(static_cast<double>(k) / (half + 1));
    w[static_cast<std::size_t>(k + half)] = v;
    sum += v;
  }
  for (auto& v : w) v /= sum;
  return w;
}

// Separable convolution of an (ext x ext) sample array, keeping the centered (side x side) block.
std::vector<double> convolve(const std::vector<double>& src, int ext, int side, int half, const std::vector<double>& w) {
  std::vector<double> tmp(static_cast<std::size_t>(side) * static_cast<std::size_t>(ext));
  // along x (fast index), rows j in [0, ext)
  for (int j = 0; j < ext; ++j) {
    const double* row = &src[static_cast<std::size_t>(j) * static_cast<std::size_t>(ext)];
    for (int i = 0; i < side; ++i) {
      double acc = 0.0;
      for (int k = 0; k <= 2 * half; ++k) acc += w[static_cast<std::size_t>(k)] * row[i + k];
      tmp[static_cast<std::size_t>(j) * static_cast<std::size_t>(side) + static_cast<std::size_t>(i)] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      double acc = 0.0;
      for (int k = 0; k <= 2 * half; ++k) {
        acc += w[static_cast<std::size_t>(k)] *
               tmp[static_cast<std::size_t>(j + k) * static_cast<std::size_t>(side) + static_cast<std::size_t>(i)];
      }
      out[static_cast<std::size_t>(j) * static_cast<std::size_t>(side) + static_cast<std::size_t>(i)] = acc;
    }
  }
  return out;
}

constexpr int kStencilHalf = 2;

}  // namespace

Mat MollifiedField::interpolate(double x, double y) const {
  const double fx = (x - origin_) / spacing_;
  const double fy = (y - origin_) / spacing_;
  int i = static_cast<int>(std::floor(fx));
  int j = static_cast<int>(std::floor(fy));
  i = std::clamp(i, 0, side_ - 2);
  j = std::clamp(j, 0, side_ - 2);
  const double tx = std::clamp(fx - i, 0.0, 1.0);
  const double ty = std::clamp(fy - j, 0.0, 1.0);
  auto at = [&](const std::vector<double>& g, int ii, int jj) {
    return g[static_cast<std::size_t>(jj) * static_cast<std::size_t>(side_) + static_cast<std::size_t>(ii)];
  };
  auto lerp = [&](const std::vector<double>& g) {
    return (1 - tx) * (1 - ty) * at(g, i, j) + tx * (1 - ty) * at(g, i + 1, j) + (1 - tx) * ty * at(g, i, j + 1) +
           tx * ty * at(g, i + 1, j + 1);
  };
  Mat m(2, 2);
  const double off = lerp(a12_);
  m << lerp(a11_), off, off, lerp(a22_);
  return m;
}

Mat MollifiedField::eval(const Vec& x) const {
  if (x.size() != 2) throw std::invalid_argument("mollified fields are two-dimensional");
  const double half = r_;
  Mat m;
  if (std::abs(x[0]) > half || std::abs(x[1]) > half) {
    m = base_->eval(x);
  } else {
    m = interpolate(x[0], x[1]);
  }
  m = clip_eigenvalues(m, lambda(), Lambda());
  const double rho = x.norm();
  if (rho >= r0_ && rho <= r_) m = clip_eigenvalues(m, annulus_.lower, annulus_.upper);
  return m;
}

std::optional<EigenBounds> MollifiedField::analytic_bounds_outside(double r) const {
  if (!base_->analytic_bounds_outside(r0_)) return std::nullopt;
  if (r >= r0_) return annulus_;
  return EigenBounds{lambda(), Lambda()};
}

std::string MollifiedField::id() const {
  std::ostringstream os;
  os << "mollified(" << base_->id() << ",eps=" << epsilon_ << ",r=" << r_ << ",r0=" << r0_ << ")";
  return os.str();
}

std::shared_ptr<const MollifiedField> mollify(std::shared_ptr<const MatrixField> field, double epsilon, double r,
                                             double r0, const MollifyOptions& options) {
  if (!field) throw std::invalid_argument("mollify needs a field");
  if (field->dim() != 2) throw std::invalid_argument("mollification is implemented for n = 2");
  if (!(epsilon > 0)) throw std::invalid_argument("mollify needs epsilon > 0");
  if (!(r0 > 0) || !(r0 < r)) throw std::invalid_argument("mollify needs 0 < r0 < r");

  const auto annulus = annulus_bounds(*field, r0);
  const double budget = options.safety * epsilon;
  double width = std::min(epsilon, r / 4.0);

  for (int attempt = 0; attempt < 40; ++attempt) {
    const double spacing = width / kStencilHalf;
    const int side = static_cast<int>(std::ceil(2.0 * r / spacing)) + 1;
    if (side > options.max_grid_side) {
      std::ostringstream os;
      os << "mollifier needs a " << side << "x" << side << " grid (limit " << options.max_grid_side
         << ") to keep the exceptional set below " << epsilon;
      throw MollifyError(os.str(), side);
    }
    auto out = std::shared_ptr<MollifiedField>(new MollifiedField());
    out->base_ = field;
    out->epsilon_ = epsilon;
    out->r_ = r;
    out->r0_ = r0;
    out->width_ = width;
    out->side_ = side;
    out->spacing_ = 2.0 * r / (side - 1);
    out->origin_ = -r;
    out->annulus_ = annulus;

    const int ext = side + 2 * kStencilHalf;
    const double ext_origin = -r - kStencilHalf * out->spacing_;
    std::vector<double> s11(static_cast<std::size_t>(ext) * ext), s12(s11.size()), s22(s11.size());
    for (int j = 0; j < ext; ++j) {
      for (int i = 0; i < ext; ++i) {
        const Mat a = field->eval(ext_origin + i * out->spacing_, ext_origin + j * out->spacing_);
        const auto idx = static_cast<std::size_t>(j) * ext + static_cast<std::size_t>(i);
        s11[idx] = a(0, 0);
        s12[idx] = a(0, 1);
        s22[idx] = a(1, 1);
      }
    }
    const auto w = bump_weights(kStencilHalf);
    out->a11_ = convolve(s11, ext, side, kStencilHalf, w);
    out->a12_ = convolve(s12, ext, side, kStencilHalf, w);
    out->a22_ = convolve(s22, ext, side, kStencilHalf, w);

    // exceptional set: cell centers in B(r) where |a - b| >= epsilon
    double measure = 0.0;
    const double cell_area = out->spacing_ * out->spacing_;
    for (int j = 0; j + 1 < side; ++j) {
      const double y = out->origin_ + (j + 0.5) * out->spacing_;
      for (int i = 0; i + 1 < side; ++i) {
        const double x = out->origin_ + (i + 0.5) * out->spacing_;
        if (x * x + y * y >= r * r) continue;
        const Mat diff = field->eval(x, y) - out->eval(x, y);
        if (diff.cwiseAbs().maxCoeff() >= epsilon) measure += cell_area;
      }
    }
    out->exceptional_measure_ = measure;
    if (measure <= budget) return out;
    // the exceptional set scales linearly with the kernel width
    width *= std::clamp(0.95 * budget / measure, 0.1, 0.95);
  }
  throw MollifyError("mollifier width iteration did not converge", 0);
}

}  // namespace ellcount
