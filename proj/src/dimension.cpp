#include "ellcount/dimension.hpp"

#include "ellcount/geometry.hpp"
#include "ellcount/io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ellcount::dimension {

namespace {

constexpr double kConditionLimit = 1e12;

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den <= 0) throw std::invalid_argument("slope fit needs distinct abscissae");
  return (n * sxy - sx * sy) / den;
}

int origin_vertex(const pde::DiskMesh& mesh) {
  int best = 0;
  for (std::size_t v = 1; v < mesh.num_vertices(); ++v) {
    if (mesh.vertices[v].norm() < mesh.vertices[static_cast<std::size_t>(best)].norm()) best = static_cast<int>(v);
  }
  return best;
}

// P1 values of the columns of U at p.
Eigen::VectorXd interpolate_columns(const pde::DiskMesh& mesh, const pde::PointLocator& locator,
                                    const Eigen::MatrixXd& U, const pde::Point2& p, int* triangle = nullptr) {
  const auto loc = locator.locate(p, 2.0 * mesh.h);
  if (!loc) throw std::out_of_range("sample point lies outside the mesh");
  const auto& tri = mesh.triangles[static_cast<std::size_t>(loc->triangle)];
  Eigen::VectorXd v = Eigen::VectorXd::Zero(U.cols());
  for (int k = 0; k < 3; ++k) v += loc->bary[static_cast<std::size_t>(k)] * U.row(tri[static_cast<std::size_t>(k)]).transpose();
  if (triangle) *triangle = loc->triangle;
  return v;
}

Eigen::MatrixXd random_orthogonal(int k, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd G(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) G(i, j) = nd(gen);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  return qr.householderQ();
}

// Orthonormal basis of the null space of C (rows are constraints) inside span(S).
Eigen::MatrixXd null_space(const Eigen::MatrixXd& C) {
  const auto cols = C.cols();
  if (C.rows() == 0) return Eigen::MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = std::max(1e-12, 1e-10 * (sv.size() ? sv[0] : 0.0));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

}  // namespace

HarmonicBasis HarmonicBasis::subset(const std::vector<int>& members) const {
  HarmonicBasis out;
  out.field = field;
  out.mesh = mesh;
  out.solver = solver;
  out.R = R;
  out.U.resize(U.rows(), static_cast<Eigen::Index>(members.size()));
  for (std::size_t c = 0; c < members.size(); ++c) {
    const int m = members[c];
    if (m < 0 || m >= size()) throw std::out_of_range("basis member index out of range");
    out.degrees.push_back(degrees[static_cast<std::size_t>(m)]);
    out.modes.push_back(modes[static_cast<std::size_t>(m)]);
    out.origin_values.push_back(origin_values[static_cast<std::size_t>(m)]);
    if (!growth_exponents.empty()) out.growth_exponents.push_back(growth_exponents[static_cast<std::size_t>(m)]);
    out.U.col(static_cast<Eigen::Index>(c)) = U.col(m);
  }
  return out;
}

HarmonicBasis build_polynomial_basis(std::shared_ptr<const pde::DirichletSolver> solver, int d) {
  if (d < 1) throw std::invalid_argument("basis degree must be at least 1");
  HarmonicBasis b;
  b.solver = solver;
  b.mesh = solver->mesh_ptr();
  b.field = solver->field_ptr();
  b.R = b.mesh->radius;
  for (int p = 1; p <= d; ++p) {
    for (int mode = 0; mode < 2; ++mode) {
      b.degrees.push_back(p);
      b.modes.push_back(mode);
    }
  }
  const int k = b.size();
  const int origin = origin_vertex(*b.mesh);
  b.U.resize(static_cast<Eigen::Index>(b.mesh->num_vertices()), k);
  b.origin_values.assign(static_cast<std::size_t>(k), 0.0);
  io::parallel_for(static_cast<std::size_t>(k), [&](std::size_t i) {
    const int p = b.degrees[i];
    const int mode = b.modes[i];
    const auto sol = solver->solve([p, mode](double x, double y) {
      const auto z = std::pow(std::complex<double>(x, y), p);
      return mode == 0 ? z.real() : z.imag();
    });
    const double o = sol.values[origin];
    b.origin_values[i] = o;
    b.U.col(static_cast<Eigen::Index>(i)) = sol.values.array() - o;
  });
  return b;
}

HarmonicBasis build_polynomial_basis(std::shared_ptr<const MatrixField> field, int d, double R, double h) {
  auto mesh = std::make_shared<const pde::DiskMesh>(pde::mesh_disk(R, h));
  auto solver = std::make_shared<const pde::DirichletSolver>(mesh, field);
  return build_polynomial_basis(solver, d);
}

GramRecord gram_matrix(const HarmonicBasis& basis, double t) {
  if (!(t > 0) || t > basis.R * (1 + 1e-12)) throw std::invalid_argument("Gram radius must lie in (0, R]");
  GramRecord rec;
  rec.t = t;
  rec.D = basis.solver->form().gram(basis.U, t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rec.D, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev.size() == 0) return rec;
  rec.condition = ev[0] > 0 ? ev[ev.size() - 1] / ev[0] : std::numeric_limits<double>::infinity();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(rec.D);
  rec.logdet = ldlt.vectorD().array().log().sum();
  return rec;
}

std::vector<double> geometric_radii(double a, double b, int count) {
  if (!(a > 0) || !(b > a) || count < 2) throw std::invalid_argument("geometric grid needs 0 < a < b and count >= 2");
  std::vector<double> r(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) r[static_cast<std::size_t>(i)] = a * std::pow(b / a, static_cast<double>(i) / (count - 1));
  r.back() = b;
  return r;
}

DetGrowth det_growth_exponent(const HarmonicBasis& basis, const std::vector<double>& radii, double s) {
  if (radii.size() < 4) throw std::invalid_argument("det growth needs at least 4 radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("radii must be increasing");
  std::vector<GramRecord> recs(radii.size());
  io::parallel_for(radii.size(), [&](std::size_t i) { recs[i] = gram_matrix(basis, radii[i]); });
  DetGrowth g;
  g.r0 = radii.front();
  g.s = s;
  if (!(recs.front().condition <= kConditionLimit)) throw std::runtime_error("reference Gram matrix is degenerate");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(recs[i].condition <= kConditionLimit)) {
      g.excluded_radii.push_back(radii[i]);
      continue;
    }
    g.radii.push_back(radii[i]);
    g.log_det_ratio.push_back(recs[i].logdet - recs.front().logdet);
    x.push_back(std::log(radii[i]));
    y.push_back(g.log_det_ratio.back());
  }
  if (x.size() < 4) throw std::runtime_error("fewer than 4 usable radii for the det growth fit");
  g.slope = fit_slope(x, y);
  return g;
}

Lemma1Result lemma1_check(const HarmonicBasis& basis, double t, const spectral::BoundarySpectrum& spectrum,
                          std::uint64_t seed, int boundary_samples) {
  const int k = basis.size();
  if (k < 1) throw std::invalid_argument("Lemma 1 needs a nonempty basis");
  if (static_cast<int>(spectrum.eigenvalues.size()) < k) throw std::invalid_argument("spectrum holds fewer than k eigenvalues");
  if (std::abs(spectrum.t - t) > 1e-12 * t) throw std::invalid_argument("spectrum radius differs from t");
  if (boundary_samples < 64) throw std::invalid_argument("too few boundary samples");
  const auto& mesh = *basis.mesh;
  const auto& form = basis.solver->form();
  const MatrixField& field = *basis.field;

  Lemma1Result res;
  res.t = t;
  res.k = k;
  res.eta.assign(spectrum.eigenvalues.begin(), spectrum.eigenvalues.begin() + k);

  // D_t-orthonormal coefficients: V = U C.
  const GramRecord rec = gram_matrix(basis, t);
  Eigen::LLT<Eigen::MatrixXd> llt(rec.D);
  if (llt.info() != Eigen::Success || !(rec.condition <= kConditionLimit)) {
    throw std::runtime_error("D_t-orthonormalization failed: basis is rank deficient at t");
  }
  const Eigen::MatrixXd C = llt.matrixU().solve(Eigen::MatrixXd::Identity(k, k));
  res.orthonormality_residual = (C.transpose() * rec.D * C - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();

  // Boundary form B(u, v) = circle integral of grad u . (w a) grad v  phi dA_g.
  pde::PointLocator locator(mesh);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(k, k);
  const double dth = 2.0 * std::numbers::pi / boundary_samples;
  for (int q = 0; q < boundary_samples; ++q) {
    const double th = (q + 0.5) * dth;
    const pde::Point2 p(t * std::cos(th), t * std::sin(th));
    const auto loc = locator.locate(p, 2.0 * mesh.h);
    if (!loc) throw std::out_of_range("circle |x| = t leaves the mesh");
    const auto tri = static_cast<std::size_t>(loc->triangle);
    Eigen::Matrix<double, 2, Eigen::Dynamic> G(2, k);
    for (int i = 0; i < k; ++i) G.col(i) = form.gradient(tri, basis.U.col(i));
    const Vec x = point2(p.x(), p.y());
    const auto cd = geometry::conformal_data(field, x);
    const double dA = cd.phi * t * geometry::tangent_length(cd, x) * dth;
    const Eigen::Matrix2d gi = cd.g_inv;
    B += G.transpose() * gi * G * dA;
  }
  const Eigen::MatrixXd Bv = C.transpose() * B * C;
  res.rhs = Bv.trace();
  for (int i = 0; i < k; ++i) res.lhs += 2.0 * std::sqrt(std::max(0.0, res.eta[static_cast<std::size_t>(i)]));
  res.margin = res.rhs - res.lhs;

  // Same sum for another D_t-orthonormal basis V Q.
  const Eigen::MatrixXd Q = random_orthogonal(k, seed);
  double rhs_q = 0.0;
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd c = C * Q.col(i);
    rhs_q += c.dot(B * c);
  }
  res.invariance_residual = std::abs(rhs_q - res.rhs);

  // Traces on the spectral grid, then the ordered basis of the variational step.
  const int N = spectrum.grid;
  Eigen::MatrixXd T(N, k);
  for (int j = 0; j < N; ++j) {
    const double th = 2.0 * std::numbers::pi * j / N;
    T.row(j) = interpolate_columns(mesh, locator, basis.U, pde::Point2(t * std::cos(th), t * std::sin(th))).transpose();
  }
  const Eigen::MatrixXd TC = T * C;
  const Eigen::MatrixXd Af = TC.transpose() * (spectrum.A * TC);
  const Eigen::MatrixXd Mf = TC.transpose() * (spectrum.M * TC);
  const Eigen::MatrixXd W = spectrum.eigenvectors.leftCols(std::max(0, k - 1));
  const Eigen::MatrixXd cons = W.transpose() * (spectrum.M * TC);  // (k-1) x k

  std::vector<Eigen::VectorXd> ordered(static_cast<std::size_t>(k));
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(k, k);  // orthonormal, coefficient space
  for (int i = k; i >= 1; --i) {
    const Eigen::MatrixXd Ci = cons.topRows(i - 1) * S;
    const Eigen::MatrixXd Z = null_space(Ci);
    if (Z.cols() == 0) throw std::runtime_error("variational construction found no admissible direction");
    Eigen::VectorXd y = S * Z.col(0);
    y.normalize();
    ordered[static_cast<std::size_t>(i - 1)] = y;
    // Complement of y inside span(S).
    const Eigen::MatrixXd P = S - y * (y.transpose() * S);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeThinU);
    S = svd.matrixU().leftCols(i - 1);
  }
  res.variational_margins.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const auto& y = ordered[static_cast<std::size_t>(i)];
    res.variational_margins[static_cast<std::size_t>(i)] = y.dot(Af * y) - res.eta[static_cast<std::size_t>(i)] * y.dot(Mf * y);
  }
  return res;
}

IntegratedResult integrated_eigen_check(const HarmonicBasis& basis, double r0, double r, int points_per_octave,
                                        int spectral_grid) {
  if (points_per_octave < 8) throw std::invalid_argument("radius grid too coarse: need at least 8 points per octave");
  if (!(r0 > 0) || !(r > r0) || r > basis.R * (1 + 1e-12)) throw std::invalid_argument("need 0 < r0 < r <= R");
  const int k = basis.size();
  const int intervals = std::max(1, static_cast<int>(std::ceil(points_per_octave * std::log2(r / r0) - 1e-9)));
  IntegratedResult res;
  res.r0 = r0;
  res.r = r;
  res.points_per_octave = points_per_octave;
  res.t = geometric_radii(r0, r, intervals + 1);
  res.root_sums.assign(res.t.size(), 0.0);
  const int grid = std::max(spectral_grid, 8 * k);
  io::parallel_for(res.t.size(), [&](std::size_t i) {
    const auto sp = spectral::boundary_spectrum(*basis.field, res.t[i], k, grid);
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += std::sqrt(std::max(0.0, sp.eigenvalues[static_cast<std::size_t>(j)]));
    res.root_sums[i] = s;
  });
  // int f dt = int f t d(ln t)
  for (std::size_t i = 1; i < res.t.size(); ++i) {
    const double h = std::log(res.t[i] / res.t[i - 1]);
    res.lhs += h * 0.5 * (res.root_sums[i] * res.t[i] + res.root_sums[i - 1] * res.t[i - 1]);
  }
  res.lhs *= 2.0;
  const auto bounds = annulus_bounds(*basis.field, r0);
  res.lambda_r0 = bounds.lower;
  res.Lambda_r0 = bounds.upper;
  const double logdet = gram_matrix(basis, r).logdet - gram_matrix(basis, r0).logdet;
  res.rhs = res.Lambda_r0 * logdet;
  res.margin = res.rhs - res.lhs;
  res.chain_lower = 2.0 * res.lambda_r0 * counting::eigen_rootsum_lower_bound(2, k) * std::log(r / r0);
  res.chain_margin = res.lhs - res.chain_lower;
  return res;
}

void measure_growth(HarmonicBasis& basis, const DimsConfig& config) {
  const double hi = basis.R / 2;
  if (!(hi > config.r0)) throw std::invalid_argument("growth window [r0, R/2] is empty");
  const auto radii = geometric_radii(config.r0, hi, config.growth_radii);
  const auto& mesh = *basis.mesh;
  pde::PointLocator locator(mesh);
  const int k = basis.size();
  Eigen::MatrixXd sup = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(radii.size()), k);
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    for (int q = 0; q < config.circle_samples; ++q) {
      const double th = 2.0 * std::numbers::pi * q / config.circle_samples;
      const auto v = interpolate_columns(mesh, locator, basis.U,
                                         pde::Point2(radii[ri] * std::cos(th), radii[ri] * std::sin(th)));
      sup.row(static_cast<Eigen::Index>(ri)) = sup.row(static_cast<Eigen::Index>(ri)).cwiseMax(v.cwiseAbs().transpose());
    }
  }
  std::vector<double> x;
  for (double r : radii) x.push_back(std::log(r));
  basis.growth_exponents.assign(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) {
    std::vector<double> y;
    for (std::size_t ri = 0; ri < radii.size(); ++ri) y.push_back(std::log(std::max(sup(static_cast<Eigen::Index>(ri), i), 1e-300)));
    basis.growth_exponents[static_cast<std::size_t>(i)] = fit_slope(x, y);
  }
}

namespace {

struct RankResult {
  int rank = 0;
  bool ambiguous = false;
  std::vector<double> singular_values;
};

RankResult scaled_rank(const Eigen::MatrixXd& D, double threshold) {
  RankResult r;
  if (D.rows() == 0) return r;
  const Eigen::VectorXd s = D.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd Ds = s.asDiagonal() * D * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Ds + Ds.transpose()), Eigen::EigenvaluesOnly);
  Eigen::VectorXd sv = es.eigenvalues().cwiseAbs();
  std::sort(sv.data(), sv.data() + sv.size(), std::greater<>());
  const double cut = threshold * sv[0];
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cut) ++r.rank;
    if (sv[i] > cut / 10 && sv[i] < cut * 10) r.ambiguous = true;
    r.singular_values.push_back(sv[i]);
  }
  return r;
}

DimEstimate estimate_from_basis(HarmonicBasis& basis, int d, const DimsConfig& config) {
  DimEstimate est;
  est.d = d;
  est.config = config;
  for (int p = 0; p <= d; ++p) est.exact.push_back(counting::cumulative_harmonic_dim(2, p).convert_to<long>());
  if (d == 0) {
    est.estimated = {1};
    est.ambiguous = {false};
    return est;
  }
  measure_growth(basis, config);
  est.growth_exponents = basis.growth_exponents;
  est.degrees = basis.degrees;
  const Eigen::MatrixXd D = gram_matrix(basis, config.r0).D;
  for (int p = 0; p <= d; ++p) {
    const double cutoff = p + config.growth_margin;
    std::vector<int> members;
    for (int i = 0; i < basis.size(); ++i) {
      const double e = basis.growth_exponents[static_cast<std::size_t>(i)];
      if (e <= cutoff) members.push_back(i);
      if (std::abs(e - cutoff) < config.flag_band) {
        std::ostringstream os;
        os << "member " << i << " (degree " << basis.degrees[static_cast<std::size_t>(i)]
           << (basis.modes[static_cast<std::size_t>(i)] == 0 ? " cos" : " sin") << ") growth exponent " << io::fmt(e)
           << " within " << config.flag_band << " of cutoff " << io::fmt(cutoff);
        est.flags.push_back(os.str());
      }
    }
    Eigen::MatrixXd Dp(members.size(), members.size());
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = 0; b < members.size(); ++b) Dp(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = D(members[a], members[b]);
    const auto rr = scaled_rank(Dp, config.rank_threshold);
    est.estimated.push_back(1 + rr.rank);
    est.ambiguous.push_back(rr.ambiguous);
    if (rr.ambiguous) est.flags.push_back("rank at degree " + std::to_string(p) + " within one decade of the threshold");
    if (p == d) est.singular_values = rr.singular_values;
  }
  return est;
}

}  // namespace

DimEstimate estimate_dims(std::shared_ptr<const MatrixField> field, int d, const DimsConfig& config) {
  if (d < 0 || d > 4) throw std::invalid_argument("estimate_dims supports 0 <= d <= 4");
  if (field->dim() != 2) throw std::invalid_argument("numerical dimension estimates are implemented for n = 2");
  if (d == 0) {
    HarmonicBasis empty;
    return estimate_from_basis(empty, 0, config);
  }
  auto basis = build_polynomial_basis(field, d, config.R, config.h);
  return estimate_from_basis(basis, d, config);
}

bool BoundReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

Check upper_check(std::string name, double value, double bound, double tol, std::string detail = {}) {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.bound = bound;
  c.margin = bound - value;
  c.tolerance = tol;
  c.pass = c.margin >= -tol;
  c.detail = std::move(detail);
  return c;
}

Check margin_check(std::string name, double margin, double tol, std::string detail = {}) {
  Check c;
  c.name = std::move(name);
  c.value = margin;
  c.bound = 0.0;
  c.margin = margin;
  c.tolerance = tol;
  c.pass = margin >= -tol;
  c.detail = std::move(detail);
  return c;
}

std::string at_t(double t) { return "t=" + io::fmt(t); }

}  // namespace

BoundReport theorem2_report(std::shared_ptr<const MatrixField> field, int d, const ReportConfig& config) {
  if (d < 1) throw std::invalid_argument("Theorem 2 report needs d >= 1");
  const int n = field->dim();
  BoundReport rep;
  rep.field_id = field->id();
  rep.n = n;
  rep.d = d;
  rep.config = config;
  if (const auto* cf = dynamic_cast<const CoefficientField*>(field.get())) rep.seed = cf->seed();

  const double r_max = 16.0;
  const auto profile = ellipticity_profile(*field, {1.0, 2.0, 4.0, 8.0}, 2000, r_max, config.seed);
  rep.provenance = profile.provenance();
  rep.lambda_inf = profile.lambda_inf;
  rep.Lambda_inf = profile.Lambda_inf;
  rep.ratio_inf = profile.ratio_inf;

  for (int p = 0; p <= d; ++p) rep.exact.push_back(counting::cumulative_harmonic_dim(n, p).convert_to<long>());
  const auto* cf = dynamic_cast<const CoefficientField*>(field.get());
  rep.exact_dims = cf && cf->is_constant();
  const bool numeric = n == 2 && d <= config.max_numeric_degree;
  if (!rep.exact_dims && !numeric) {
    throw std::invalid_argument("dimension estimates for non-constant fields are limited to n = 2, d <= " +
                                std::to_string(config.max_numeric_degree));
  }

  // Numerical chain on B(R).
  std::optional<HarmonicBasis> basis;
  std::shared_ptr<const MatrixField> work = field;
  if (numeric) {
    const auto& dc = config.dims;
    if (!field->has_boundary_traces()) {
      // Widen epsilon until the exceptional-set budget fits the sampling grid.
      double eps = config.mollify_epsilon;
      for (;;) {
        try {
          work = mollify(field, eps, dc.R, dc.r0);
          break;
        } catch (const MollifyError&) {
          if (eps >= 1.0) throw;
          eps = std::min(1.0, 2.0 * eps);
        }
      }
      rep.mollify_epsilon = eps;
    }
    basis = build_polynomial_basis(work, d, dc.R, dc.h);
    rep.estimate = estimate_from_basis(*basis, d, dc);
  }
  if (rep.exact_dims) {
    rep.dims.assign(rep.exact.begin(), rep.exact.end());
  } else {
    rep.dims.assign(rep.estimate->estimated.begin(), rep.estimate->estimated.end());
  }

  const auto partition = config.partition ? *config.partition : counting::GrowthPartition::unit_steps(d);
  if (std::abs(partition.top_degree() - d) > 1e-12) throw std::invalid_argument("partition must end at d");
  rep.partition_degrees = partition.degrees();
  std::vector<std::int64_t> blocks;
  for (std::size_t i = 1; i < partition.degrees().size(); ++i) {
    const auto hi = static_cast<std::size_t>(std::floor(partition.degrees()[i]));
    const auto lo = static_cast<std::size_t>(std::floor(partition.degrees()[i - 1]));
    blocks.push_back(static_cast<std::int64_t>(rep.dims[hi] - rep.dims[lo]));
  }
  rep.s = counting::GrowthPartition(partition.degrees(), blocks).growth_exponent(n);

  const double ratio = rep.ratio_inf;
  rep.weighted_sum = counting::weighted_dim_sum(partition, rep.dims);
  rep.weighted_bound = counting::weighted_dim_sum_bound(n, partition, ratio);
  rep.checks.push_back(upper_check("theorem2.weighted_sum", rep.weighted_sum, rep.weighted_bound, 0.0,
                                   "sum (a_i - a_{i-1}) h_{a_{i-1}} <= ratio^{n-1} (2/n!) (d+2n-1)^n"));
  for (int i = 1; i <= d; ++i) rep.dim_sum += rep.dims[static_cast<std::size_t>(i)];
  rep.dim_sum_env = counting::dim_sum_bound(n, d, ratio);
  rep.checks.push_back(upper_check("theorem2.dim_sum", rep.dim_sum, rep.dim_sum_env, 0.0,
                                   "sum_{i<=d} h_i <= ratio^{n-1} (2/n!) (d+2n)^n"));

  // Rearranged inequality in h' = h - 1 and its maximization.
  std::vector<double> hprime(rep.dims.size());
  for (std::size_t i = 0; i < rep.dims.size(); ++i) hprime[i] = rep.dims[i] - 1.0;
  const double hd = hprime[static_cast<std::size_t>(d)];
  rep.rhs_max = counting::maximize_rhs_2_12(n, d, ratio);
  rep.rhs_at_hprime = counting::rhs_2_12(n, d, ratio, hd);
  const double lhs_prime = counting::weighted_dim_sum(partition, hprime);
  rep.checks.push_back(upper_check("rearranged.at_hprime", lhs_prime, rep.rhs_at_hprime, 0.0,
                                   "sum (a_i - a_{i-1}) h'_{a_{i-1}} <= rhs(h'_d)"));
  rep.checks.push_back(upper_check("rearranged.maximum", rep.rhs_at_hprime, rep.rhs_max.max_value,
                                   1e-12 * std::max(1.0, rep.rhs_max.max_value), "rhs(h'_d) <= max over h' >= 0"));

  // Liminf envelope at finite d, with a 2n/d allowance for lower-order terms.
  rep.liminf_env = counting::liminf_bound(n, ratio);
  const double hd_scaled = rep.dims[static_cast<std::size_t>(d)] / std::pow(d, n - 1);
  const double slack = rep.liminf_env * 2.0 * n / d;
  rep.checks.push_back(upper_check("corollary3.liminf", hd_scaled, rep.liminf_env + slack, 0.0,
                                   "h_d / d^{n-1} <= ratio^{n-1} 2/(n-1)! (1 + 2n/d)"));
  rep.sharp = hd_scaled >= rep.liminf_env;

  if (basis) {
    const auto& dc = config.dims;
    const int k = basis->size();
    // Growth slope of the Gram determinant.
    rep.growth = det_growth_exponent(*basis, geometric_radii(dc.r0, dc.R, 9), rep.s);
    rep.checks.push_back(upper_check("growth21.slope", rep.growth->slope, rep.s, config.growth_rel_tol * rep.s,
                                     "ln det_{D_r0} D_r slope over [r0, R]"));
    if (!rep.growth->excluded_radii.empty()) {
      rep.checks.back().detail += "; excluded radii with condition > 1e12: " + std::to_string(rep.growth->excluded_radii.size());
    }

    const auto bounds = annulus_bounds(*field, dc.r0);
    const int m = std::max(k, 9);
    for (double t : {dc.r0, 2 * dc.r0, dc.R}) {
      const auto sp = spectral::boundary_spectrum(*work, t, m, std::max(config.spectral_grid, 8 * m));
      const auto margins = spectral::verify_eigen_lower_bound(sp, bounds.lower, t);
      const double worst = *std::min_element(margins.begin(), margins.end());
      rep.checks.push_back(margin_check("eigen28.min_margin", worst, config.eigen_tol, at_t(t)));
      if (t < dc.R) {
        const auto l1 = lemma1_check(*basis, t, sp, config.seed);
        rep.checks.push_back(margin_check("lemma1.margin", l1.margin, config.lemma1_tol,
                                          at_t(t) + " lhs=" + io::fmt(l1.lhs) + " rhs=" + io::fmt(l1.rhs)));
        rep.checks.push_back(upper_check("lemma1.invariance", l1.invariance_residual, 0.0,
                                         1e-8 * std::max(1.0, std::abs(l1.rhs)), at_t(t)));
        const double vm = *std::min_element(l1.variational_margins.begin(), l1.variational_margins.end());
        rep.checks.push_back(margin_check("lemma1.variational", vm, config.lemma1_tol, at_t(t)));
      }
    }
    const auto integ = integrated_eigen_check(*basis, dc.r0, 2 * dc.r0, config.points_per_octave, config.spectral_grid);
    rep.checks.push_back(margin_check("integrated25.margin", integ.margin, config.integrated_tol,
                                      "lhs=" + io::fmt(integ.lhs) + " rhs=" + io::fmt(integ.rhs)));
    rep.checks.push_back(margin_check("integrated211.chain", integ.chain_margin, config.integrated_tol,
                                      "lower=" + io::fmt(integ.chain_lower)));
  }
  return rep;
}

}  // namespace ellcount::dimension
