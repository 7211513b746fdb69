// Acceptance runner: one PASS/FAIL line per criterion, with wall time
// against its budget. Exit status is nonzero when any criterion fails.

#include "ellcount/counting.hpp"
#include "ellcount/dimension.hpp"
#include "ellcount/fem.hpp"
#include "ellcount/field_spec.hpp"
#include "ellcount/geometry.hpp"
#include "ellcount/io.hpp"
#include "ellcount/spectral.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace ellcount;
using ellcount::io::fmt;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::shared_ptr<const CoefficientField> shared(CoefficientField f) {
  return std::make_shared<const CoefficientField>(std::move(f));
}

std::shared_ptr<const CoefficientField> shipped(const std::string& name) {
  return load_field_spec(std::filesystem::path(ELLCOUNT_FIELDS_DIR) / name);
}

// Smooth fields without traces, widening epsilon until the sampling grid fits.
std::shared_ptr<const MatrixField> traced(std::shared_ptr<const CoefficientField> f, double R, double r0) {
  if (f->has_boundary_traces()) return f;
  for (double eps = 0.05;; eps *= 2) {
    try {
      return mollify(f, eps, R, r0);
    } catch (const MollifyError&) {
      if (eps > 1.0) throw;
    }
  }
}

void crit1(Outcome& o) {
  int cases = 0;
  for (int n = 2; n <= 5; ++n) {
    for (int d = 0; d <= 6; ++d) {
      const long brute = oracle::harmonic_dim_bruteforce(n, d);
      o.require(counting::cumulative_harmonic_dim(n, d) == brute,
                "n=" + std::to_string(n) + " d=" + std::to_string(d));
      ++cases;
    }
  }
  o.detail << cases << " (n,d) pairs equal to elimination";
}

void crit2(Outcome& o) {
  for (int n : {2, 3}) {
    const auto listing = oracle::sphere_spectrum_listing(n, 200);
    for (std::size_t k = 1; k <= 200; ++k) {
      if (counting::sphere_eigenvalue_exact(n, static_cast<std::int64_t>(k)) != listing[k - 1]) {
        o.require(false, "n=" + std::to_string(n) + " k=" + std::to_string(k));
      }
    }
  }
  o.detail << "k<=200, n in {2,3}";
}

void crit3(Outcome& o) {
  double worst = std::numeric_limits<double>::infinity();
  for (int n = 2; n <= 5; ++n) {
    oracle::Float50 sum = 0;
    for (std::int64_t k = 1; k <= 10000; ++k) {
      sum += sqrt(oracle::Float50(counting::sphere_eigenvalue_exact(n, k)));
      const oracle::Float50 bound = counting::eigen_rootsum_lower_bound(n, k);
      const oracle::Float50 exact_bound = oracle::rootsum_bound50(n, k);
      if (!(sum >= bound) || !(sum >= exact_bound)) {
        o.require(false, "n=" + std::to_string(n) + " k=" + std::to_string(k));
      }
      worst = std::min(worst, static_cast<double>(sum - bound));
    }
  }
  o.detail << "min margin " << fmt(worst);
}

void crit4(Outcome& o) {
  const auto id = CoefficientField::identity();
  const auto s1 = spectral::boundary_spectrum(id, 1.0, 5, 2048);
  const auto s2 = spectral::boundary_spectrum(id, 2.0, 5, 2048);
  const double expect[] = {0, 1, 1, 4, 4};
  double rel = std::abs(s1.eigenvalues[0]);  // zero mode: absolute
  double scaling = 0.0;
  for (int k = 1; k < 5; ++k) {
    const auto i = static_cast<std::size_t>(k);
    rel = std::max(rel, std::abs(s1.eigenvalues[i] - expect[k]) / expect[k]);
    scaling = std::max(scaling, std::abs(4.0 * s2.eigenvalues[i] - s1.eigenvalues[i]) / s1.eigenvalues[i]);
  }
  o.require(rel <= 1e-3, "spectrum");
  o.require(scaling <= 1e-6, "t^-2 scaling");
  o.detail << "max rel err " << fmt(rel) << ", scaling err " << fmt(scaling);
}

void crit5(Outcome& o) {
  const auto diag = CoefficientField::diagonal({1.0, 2.0});
  double worst = std::numeric_limits<double>::infinity();
  for (double t : {1.0, 2.0, 4.0}) {
    const auto sp = spectral::boundary_spectrum(diag, t, 50, 2048);
    for (double m : spectral::verify_eigen_lower_bound(sp, 1.0, t)) worst = std::min(worst, m);
  }
  o.require(worst >= -1e-6, "diag(1,2) margins");
  const auto two = CoefficientField::scalar(2, 2.0);
  const auto sp = spectral::boundary_spectrum(two, 1.0, 50, 4096);
  double eq = 0.0;
  for (std::size_t k = 1; k < sp.eigenvalues.size(); ++k) {
    const double bound = 4.0 * counting::sphere_eigenvalue(2, static_cast<std::int64_t>(k + 1));
    eq = std::max(eq, std::abs(sp.eigenvalues[k] - bound) / bound);
  }
  o.require(eq <= 1e-3, "2I equality");
  o.detail << "diag(1,2) min margin " << fmt(worst) << ", 2I rel dev " << fmt(eq);
}

void crit6(Outcome& o) {
  auto mesh = std::make_shared<const pde::DiskMesh>(pde::mesh_disk(1.0, 0.02));
  const auto sol = pde::solve_dirichlet(mesh, shipped("radial_step.json"), [](double x, double) { return x; });
  const pde::PointLocator loc(*mesh);
  const double probe = pde::evaluate(sol, loc, pde::Point2(0.25, 0.0));
  const double err = std::abs(probe - 4.0 / 13.0);
  o.require(err < 2e-3, "probe");
  o.detail << "probe err " << fmt(err) << ", ratios";

  auto id = shared(CoefficientField::identity());
  for (int p = 2; p <= 3; ++p) {
    const auto trace = [p](double x, double y) { return std::pow(std::complex<double>(x, y), p).real(); };
    const auto grad = [p](double x, double y) {
      const auto d = static_cast<double>(p) * std::pow(std::complex<double>(x, y), p - 1);
      return std::pair{d.real(), -d.imag()};
    };
    std::vector<double> errors;
    for (double h : {0.1, 0.05}) {
      auto m = std::make_shared<const pde::DiskMesh>(pde::mesh_disk(1.0, h));
      errors.push_back(oracle::energy_norm_error(*m, pde::solve_dirichlet(m, id, trace).values, grad));
    }
    const double ratio = errors[0] / errors[1];
    o.require(ratio >= 1.7 && ratio <= 2.3, "halving ratio p=" + std::to_string(p));
    o.detail << " " << fmt(ratio);
  }
}

void crit7(Outcome& o) {
  auto mesh = std::make_shared<const pde::DiskMesh>(pde::mesh_disk(2.0, 0.15));
  std::vector<std::shared_ptr<const MatrixField>> fields;
  for (const auto& e : std::filesystem::directory_iterator(ELLCOUNT_FIELDS_DIR)) {
    if (e.path().extension() == ".json") fields.push_back(load_field_spec(e.path()));
  }
  std::sort(fields.begin(), fields.end(), [](const auto& a, const auto& b) { return a->id() < b->id(); });
  for (double eps = 0.1;; eps *= 2) {
    try {
      fields.push_back(mollify(shipped("checkerboard.json"), eps, 2.0, 1.0));
      break;
    } catch (const MollifyError&) {
      if (eps > 1.0) throw;
    }
  }
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> ut(0.3, 2.0);
  const int pairs = 1000;
  double worst = 0.0;
  std::vector<geometry::EnergyForm> forms;
  for (const auto& f : fields) forms.emplace_back(mesh, f);
  for (int p = 0; p < pairs; ++p) {
    const auto& form = forms[static_cast<std::size_t>(p) % forms.size()];
    Eigen::VectorXd u(mesh->num_vertices()), v(mesh->num_vertices());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u[i] = g(rng);
      v[i] = g(rng);
    }
    const double t = ut(rng);
    const double scale = std::sqrt(form.energy(u, u, t) * form.energy(v, v, t));
    worst = std::max(worst, std::abs(form.energy(u, v, t) - form.riemannian_energy(u, v, t)) / scale);
  }
  o.require(worst <= 1e-10, "collapse");
  o.detail << pairs << " pairs over " << fields.size() << " fields, max rel diff " << fmt(worst);
}

void crit8(Outcome& o) {
  const auto radii = dimension::geometric_radii(1.0, 4.0, 9);
  const auto lap = dimension::build_polynomial_basis(shared(CoefficientField::identity()), 2, 4.0, 0.05);
  const auto g = dimension::det_growth_exponent(lap, radii, 12.0);
  o.require(std::abs(g.slope - 12.0) <= 0.02 * 12.0, "Laplacian slope");
  const auto cb = dimension::build_polynomial_basis(shipped("checkerboard.json"), 1, 4.0, 0.05);
  const auto gc = dimension::det_growth_exponent(cb, radii, 4.0);
  o.require(gc.slope <= 4.2, "checkerboard slope");
  o.detail << "Laplacian slope " << fmt(g.slope) << ", checkerboard slope " << fmt(gc.slope);
}

void crit9(Outcome& o) {
  const auto id = CoefficientField::identity();
  const auto lap = dimension::build_polynomial_basis(shared(id), 1, 2.0, 0.05);
  const auto res = dimension::lemma1_check(lap, 1.0, spectral::boundary_spectrum(id, 1.0, 2, 2048));
  o.require(std::abs(res.lhs - 2.0) <= 1e-3 && std::abs(res.rhs - 4.0) <= 1e-3, "closed form");
  o.detail << "LHS " << fmt(res.lhs) << " RHS " << fmt(res.rhs) << "; min margins";
  for (const auto* name : {"radial_step.json", "checkerboard.json", "conic_decay.json", "random.json"}) {
    const double R = 2.5;
    const auto field = traced(shipped(name), R, 0.5);
    double worst = std::numeric_limits<double>::infinity();
    for (int d = 1; d <= 2; ++d) {
      const auto basis = dimension::build_polynomial_basis(field, d, R, 0.05);
      for (double t : {1.0, 2.0}) {
        const auto sp = spectral::boundary_spectrum(*field, t, basis.size(), 1024);
        worst = std::min(worst, dimension::lemma1_check(basis, t, sp).margin);
      }
    }
    o.require(worst >= -1e-3, name);
    o.detail << " " << name << "=" << fmt(worst);
  }
}

void crit10(Outcome& o) {
  const auto lap = dimension::build_polynomial_basis(shared(CoefficientField::identity()), 1, 4.0, 0.05);
  const auto res = dimension::integrated_eigen_check(lap, 1.0, 2.0);
  const double ln2 = std::log(2.0);
  o.require(std::abs(res.lhs - 2 * ln2) <= 1e-3 && std::abs(res.rhs - 4 * ln2) <= 1e-3, "closed form");
  const auto diag = dimension::build_polynomial_basis(shipped("diag_1_2.json"), 1, 4.0, 0.05);
  const auto rd = dimension::integrated_eigen_check(diag, 1.0, 2.0);
  o.require(rd.margin >= -1e-3, "diag(1,2)");
  o.detail << "LHS " << fmt(res.lhs) << " RHS " << fmt(res.rhs) << "; diag(1,2) margin " << fmt(rd.margin);
}

void crit11(Outcome& o) {
  auto mesh = std::make_shared<const pde::DiskMesh>(pde::mesh_disk(1.0, 0.02));
  const auto field = shipped("checkerboard.json");
  double prev = std::numeric_limits<double>::infinity(), base = 0.0;
  o.detail << "gaps";
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    const auto m = mollify(field, eps, 1.0, 0.5);
    const auto err = pde::approximation_error(mesh, field, m, [](double x, double) { return x; });
    o.require(err.gap < prev, "strict decrease at eps=" + fmt(eps));
    prev = err.gap;
    base = err.base_energy;
    o.detail << " " << fmt(err.gap);
  }
  o.require(prev <= 1e-2 * base, "final gap");
  o.detail << "; final/base " << fmt(prev / base);
}

void crit12(Outcome& o) {
  for (int d = 1; d <= 100; ++d) {
    counting::BigInt sum = 0;
    for (int i = 1; i <= d; ++i) sum += counting::cumulative_harmonic_dim(2, i);
    o.require(sum == counting::BigInt(d) * d + 2 * d && sum <= counting::BigInt(d + 4) * (d + 4),
              "dim sum d=" + std::to_string(d));
  }
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> nd(2, 5);
  std::uniform_real_distribution<double> dd(0.0, 30.0), rd(1.0, 4.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int n = nd(rng);
    const double d = dd(rng), ratio = rd(rng);
    const auto closed = counting::maximize_rhs_2_12(n, d, ratio);
    const auto grid = oracle::grid_search([&](double h) { return oracle::rhs_rearranged(n, d, ratio, h); },
                                          4.0 * closed.h_opt + 10.0);
    worst = std::max(worst, std::abs(closed.max_value - grid.value) / std::max(1.0, std::abs(grid.value)));
  }
  o.require(worst <= 1e-6, "maximizer vs grid search");
  const auto est = dimension::estimate_dims(shared(CoefficientField::identity()), 3);
  o.require(est.estimated == std::vector<int>{1, 3, 5, 7}, "identity estimates");
  const auto rep = dimension::theorem2_report(shipped("checkerboard.json"), 2);
  int failed = 0;
  for (const auto& c : rep.checks) {
    if (!c.pass) {
      ++failed;
      o.require(false, c.name);
    }
  }
  o.detail << "maximizer dev " << fmt(worst) << ", identity dims " << est.estimated[1] << "," << est.estimated[2] << ","
           << est.estimated[3] << "; checkerboard report " << rep.checks.size() - static_cast<std::size_t>(failed) << "/"
           << rep.checks.size() << " checks pass";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "harmonic dimension oracle", 5, crit1},
      {2, "sphere spectrum oracle", 1, crit2},
      {3, "root-sum lower bound", 30, crit3},
      {4, "boundary eigensolver", 10, crit4},
      {5, "eigenvalue comparison margins", 60, crit5},
      {6, "Dirichlet solver", 120, crit6},
      {7, "energy-form collapse", 30, crit7},
      {8, "determinant growth", 180, crit8},
      {9, "Lemma 1", 120, crit9},
      {10, "integrated inequality", 120, crit10},
      {11, "mollification convergence", 300, crit11},
      {12, "Theorem 2 and Corollary 3", 600, crit12},
  };
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s %2d %-30s %7.2fs / %4.0fs  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.budget_s,
                o.detail.str().c_str(), in_time ? "" : " [over time budget]");
    std::fflush(stdout);
  }
  const double total = std::chrono::duration<double>(clock::now() - start).count();
  const bool total_ok = total <= 600.0;
  if (!total_ok) ++failures;
  std::printf("%s total %.2fs / 600s\n", total_ok ? "PASS" : "FAIL", total);
  return failures == 0 ? 0 : 1;
}
