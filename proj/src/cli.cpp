#include "ellcount/cli.hpp"

#include "ellcount/dimension.hpp"
#include "ellcount/fem.hpp"
#include "ellcount/field_spec.hpp"
#include "ellcount/io.hpp"
#include "ellcount/report.hpp"
#include "ellcount/spectral.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <sstream>

namespace ellcount::cli {

namespace fs = std::filesystem;
using io::fmt;

namespace {

struct Common {
  std::string field_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
};

struct Mesh {
  double R = 4.0;
  double h = 0.05;
  double r0 = 1.0;
};

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::shared_ptr<const CoefficientField> load(const Common& c) {
  if (c.field_path.empty()) throw ConfigError("--field is required");
  return load_field_spec(c.field_path);
}

// Fields without traces on circles are smoothed on B(R) before spectral work.
std::shared_ptr<const MatrixField> with_traces(std::shared_ptr<const CoefficientField> f, double R, double r0,
                                               double epsilon) {
  if (f->has_boundary_traces()) return f;
  return mollify(f, epsilon, R, r0);
}

pde::BoundaryFunction parse_trace(const std::string& s) {
  if (s == "x") return [](double x, double) { return x; };
  if (s == "y") return [](double, double y) { return y; };
  if (s == "one") return [](double, double) { return 1.0; };
  if (s == "x2-y2") return [](double x, double y) { return x * x - y * y; };
  if (s == "2xy") return [](double x, double y) { return 2 * x * y; };
  const auto colon = s.find(':');
  if (colon != std::string::npos) {
    const std::string kind = s.substr(0, colon);
    int p = 0;
    try {
      p = std::stoi(s.substr(colon + 1));
    } catch (...) {
      throw ConfigError("--trace: bad degree in '" + s + "'");
    }
    if (p < 0) throw ConfigError("--trace: degree must be nonnegative");
    if (kind == "cos" || kind == "sin") {
      const bool c = kind == "cos";
      return [p, c](double x, double y) {
        const auto z = std::pow(std::complex<double>(x, y), p);
        return c ? z.real() : z.imag();
      };
    }
  }
  throw ConfigError("--trace: expected x, y, one, x2-y2, 2xy, cos:P or sin:P, got '" + s + "'");
}

void add_common(CLI::App* sub, Common& c, bool needs_field = true) {
  auto* opt = sub->add_option("--field", c.field_path, "field specification (JSON)");
  if (needs_field) opt->required();
  sub->add_option("--out", c.out_dir, "output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "seed for randomized checks")->capture_default_str();
}

void add_mesh(CLI::App* sub, Mesh& m) {
  sub->add_option("--R", m.R, "outer radius of the solution basis")->capture_default_str();
  sub->add_option("--h", m.h, "mesh size")->capture_default_str();
  sub->add_option("--r0", m.r0, "inner reference radius")->capture_default_str();
}

dimension::DimsConfig dims_config(const Mesh& m) {
  dimension::DimsConfig c;
  c.R = m.R;
  c.h = m.h;
  c.r0 = m.r0;
  return c;
}

void require_positive(double v, const std::string& name) {
  if (!(v > 0)) throw ConfigError(name + " must be positive");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dimension counting laboratory for divergence-form elliptic operators", "ellcount"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  Common common;
  Mesh mesh;
  int d = 1;
  std::vector<double> ts{1.0};
  int k = 10;
  int m = 5;
  int grid = 2048;
  double r = 1.0;
  double r_outer = 2.0;
  std::string trace = "x";
  std::vector<double> probe;
  std::vector<double> radii{1.0, 2.0, 4.0, 8.0};
  double tol = -1.0;
  double epsilon = 0.05;
  int per_octave = 16;

  auto* dims = app.add_subcommand("dims", "per-degree dimension estimates and report");
  add_common(dims, common);
  add_mesh(dims, mesh);
  dims->add_option("--d", d, "top degree (0..4)")->required();

  auto* verify = app.add_subcommand("verify", "run one inequality check suite");
  verify->require_subcommand(1);
  auto* lemma1 = verify->add_subcommand("lemma1", "Lemma 1 on the circle |x| = t");
  auto* eigen28 = verify->add_subcommand("eigen28", "boundary eigenvalue comparison");
  auto* growth21 = verify->add_subcommand("growth21", "Gram determinant growth slope");
  auto* integrated = verify->add_subcommand("integrated", "integrated eigenvalue inequality");
  auto* theorem2 = verify->add_subcommand("theorem2", "Theorem 2 and Corollary 3 report");
  for (auto* sub : {lemma1, eigen28, growth21, integrated, theorem2}) {
    add_common(sub, common);
    sub->add_option("--tol", tol, "tolerance on margins (default per check)");
    sub->add_option("--epsilon", epsilon, "mollification parameter for fields without traces")->capture_default_str();
  }
  for (auto* sub : {lemma1, growth21, integrated, theorem2}) {
    add_mesh(sub, mesh);
    sub->add_option("--d", d, "top degree of the basis")->capture_default_str();
  }
  lemma1->add_option("--t", ts, "radius (or comma-separated radii)")->delimiter(',')->capture_default_str();
  lemma1->add_option("--grid", grid, "boundary grid size")->capture_default_str();
  eigen28->add_option("--t", ts, "radius (or comma-separated radii)")->delimiter(',')->capture_default_str();
  eigen28->add_option("--k", k, "number of eigenvalues")->capture_default_str();
  eigen28->add_option("--grid", grid, "boundary grid size")->capture_default_str();
  eigen28->add_option("--r0", mesh.r0, "annulus radius for lambda_r0 (default: smallest t)");
  integrated->add_option("--r", r_outer, "upper radius")->capture_default_str();
  integrated->add_option("--per-octave", per_octave, "radius grid points per octave")->capture_default_str();
  integrated->add_option("--grid", grid, "boundary grid size")->capture_default_str();

  auto* spectrum = app.add_subcommand("spectrum", "boundary spectrum on |x| = t");
  add_common(spectrum, common);
  spectrum->add_option("--t", ts, "radius")->delimiter(',')->capture_default_str();
  spectrum->add_option("--m", m, "number of eigenvalues")->capture_default_str();
  spectrum->add_option("--grid", grid, "boundary grid size")->capture_default_str();
  spectrum->add_option("--epsilon", epsilon, "mollification parameter for fields without traces")->capture_default_str();

  auto* profile = app.add_subcommand("profile", "ellipticity profile lambda_r, Lambda_r");
  add_common(profile, common);
  profile->add_option("--radii", radii, "radii (comma-separated)")->delimiter(',')->capture_default_str();

  auto* solve = app.add_subcommand("solve", "Dirichlet problem on B(r)");
  add_common(solve, common);
  solve->add_option("--trace", trace, "x, y, one, x2-y2, 2xy, cos:P, sin:P")->capture_default_str();
  solve->add_option("--r", r, "disk radius")->capture_default_str();
  solve->add_option("--h", mesh.h, "mesh size")->capture_default_str();
  solve->add_option("--probe", probe, "probe point x,y")->delimiter(',')->expected(2);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const fs::path dir = common.out_dir;
    fs::create_directories(dir);

    if (*dims) {
      if (d < 0 || d > 4) throw ConfigError("--d must lie in 0..4 for dimension estimates");
      const auto field = load(common);
      std::vector<std::vector<std::string>> rows;
      bool pass = true;
      if (d == 0) {
        const auto exact = field->is_constant() ? std::string("1") : std::string();
        rows.push_back({"0", exact, "1", ""});
        report::write_json(dir / "report.json", {{"field", field->id()}, {"d", 0}, {"dims", {1}}, {"pass", true}});
      } else {
        dimension::ReportConfig rc;
        rc.dims = dims_config(mesh);
        rc.seed = common.seed;
        rc.mollify_epsilon = epsilon;
        const auto rep = dimension::theorem2_report(field, d, rc);
        for (int p = 1; p <= d; ++p) {
          const auto i = static_cast<std::size_t>(p);
          const bool amb = rep.estimate && rep.estimate->ambiguous[i];
          const auto exact = field->is_constant() ? std::to_string(rep.exact[i]) : std::string();
          const auto estimated = rep.estimate ? std::to_string(rep.estimate->estimated[i]) : exact;
          rows.push_back({std::to_string(p), exact, estimated, amb ? "ambiguous-rank" : ""});
        }
        if (rep.estimate) {
          for (const auto& f : rep.estimate->flags) out << "flag: " << f << '\n';
        }
        report::write_json(dir / "report.json", report::to_json(rep));
        report::write_checks_csv(dir / "checks.csv", rep.checks);
        pass = rep.pass();
      }
      io::write_csv(dir / "dims.csv", {"d", "exact", "estimated", "flags"}, rows);
      for (const auto& row : rows) out << "d=" << row[0] << " exact=" << row[1] << " estimated=" << row[2] << '\n';
      out << (pass ? "PASS" : "FAIL") << '\n';
      return pass ? kOk : kCheckFailed;
    }

    if (*verify) {
      const auto field = load(common);
      if (*theorem2) {
        dimension::ReportConfig rc;
        rc.dims = dims_config(mesh);
        rc.seed = common.seed;
        rc.mollify_epsilon = epsilon;
        if (tol > 0) rc.lemma1_tol = rc.eigen_tol = rc.integrated_tol = tol;
        const auto rep = dimension::theorem2_report(field, d, rc);
        report::write_json(dir / "report.json", report::to_json(rep));
        report::write_checks_csv(dir / "margins.csv", rep.checks);
        if (rep.growth) report::write_growth_csv(dir / "det_growth.csv", *rep.growth);
        for (const auto& c : rep.checks) {
          out << c.name << " margin=" << fmt(c.margin) << (c.pass ? " pass" : " FAIL") << '\n';
        }
        out << "dim_sum=" << fmt(rep.dim_sum) << " bound=" << fmt(rep.dim_sum_env) << '\n';
        out << (rep.pass() ? "PASS" : "FAIL") << '\n';
        return rep.pass() ? kOk : kCheckFailed;
      }
      if (*eigen28) {
        if (k < 1) throw ConfigError("--k must be at least 1");
        const double tmin = *std::min_element(ts.begin(), ts.end());
        require_positive(tmin, "--t");
        const double r0 = eigen28->count("--r0") ? mesh.r0 : tmin;
        if (r0 > tmin) throw ConfigError("--r0 must not exceed the smallest t");
        const double tt = tol > 0 ? tol : 1e-6;
        const auto bounds = annulus_bounds(*field, r0);
        const double tmax = *std::max_element(ts.begin(), ts.end());
        const auto work = with_traces(field, tmax * 1.25, r0 * 0.5, epsilon);
        std::vector<std::vector<std::string>> rows;
        bool pass = true;
        double worst = std::numeric_limits<double>::infinity();
        for (double t : ts) {
          const auto sp = spectral::boundary_spectrum(*work, t, k, std::max(grid, 8 * k));
          const auto margins = spectral::verify_eigen_lower_bound(sp, bounds.lower, t);
          for (int i = 0; i < k; ++i) {
            const double bound = sp.eigenvalues[static_cast<std::size_t>(i)] - margins[static_cast<std::size_t>(i)];
            rows.push_back({fmt(t), std::to_string(i + 1), fmt(sp.eigenvalues[static_cast<std::size_t>(i)]), fmt(bound),
                            fmt(margins[static_cast<std::size_t>(i)])});
            worst = std::min(worst, margins[static_cast<std::size_t>(i)]);
            pass = pass && margins[static_cast<std::size_t>(i)] >= -tt;
          }
        }
        io::write_csv(dir / "eigen28.csv", {"t", "k", "eta", "bound", "margin"}, rows);
        out << "lambda_r0=" << fmt(bounds.lower) << " min_margin=" << fmt(worst) << " tol=" << fmt(tt) << '\n';
        out << (pass ? "PASS" : "FAIL") << '\n';
        return pass ? kOk : kCheckFailed;
      }
      if (d < 1) throw ConfigError("--d must be at least 1");
      require_positive(mesh.R, "--R");
      require_positive(mesh.h, "--h");
      require_positive(mesh.r0, "--r0");
      const auto work = with_traces(field, mesh.R, mesh.r0, epsilon);
      const auto basis = dimension::build_polynomial_basis(work, d, mesh.R, mesh.h);
      if (*lemma1) {
        const double tt = tol > 0 ? tol : 1e-3;
        std::vector<std::vector<std::string>> rows;
        bool pass = true;
        for (double t : ts) {
          require_positive(t, "--t");
          const auto sp = spectral::boundary_spectrum(*work, t, basis.size(), std::max(grid, 8 * basis.size()));
          const auto res = dimension::lemma1_check(basis, t, sp, common.seed);
          const double vm = *std::min_element(res.variational_margins.begin(), res.variational_margins.end());
          rows.push_back({fmt(t), std::to_string(res.k), fmt(res.lhs), fmt(res.rhs), fmt(res.margin),
                          fmt(res.invariance_residual), fmt(vm)});
          out << "t=" << fmt(t) << " lhs=" << fmt(res.lhs) << " rhs=" << fmt(res.rhs) << " margin=" << fmt(res.margin)
              << '\n';
          pass = pass && res.margin >= -tt && vm >= -tt;
        }
        io::write_csv(dir / "lemma1.csv", {"t", "k", "lhs", "rhs", "margin", "invariance_residual", "min_variational_margin"},
                      rows);
        out << (pass ? "PASS" : "FAIL") << '\n';
        return pass ? kOk : kCheckFailed;
      }
      if (*growth21) {
        const auto g = dimension::det_growth_exponent(basis, dimension::geometric_radii(mesh.r0, mesh.R, 9),
                                                      counting::GrowthPartition(
                                                          [&] {
                                                            std::vector<double> a;
                                                            for (int i = 0; i <= d; ++i) a.push_back(i);
                                                            return a;
                                                          }(),
                                                          std::vector<std::int64_t>(static_cast<std::size_t>(d), 2))
                                                          .growth_exponent(2));
        const double tt = tol > 0 ? tol : 0.05 * g.s;
        report::write_growth_csv(dir / "det_growth.csv", g);
        const bool pass = g.slope <= g.s + tt;
        out << "slope=" << fmt(g.slope) << " s=" << fmt(g.s) << " tol=" << fmt(tt) << '\n';
        out << (pass ? "PASS" : "FAIL") << '\n';
        return pass ? kOk : kCheckFailed;
      }
      if (*integrated) {
        const double tt = tol > 0 ? tol : 1e-3;
        const auto res = dimension::integrated_eigen_check(basis, mesh.r0, r_outer, per_octave, grid);
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < res.t.size(); ++i) rows.push_back({fmt(res.t[i]), fmt(res.root_sums[i])});
        io::write_csv(dir / "integrated.csv", {"t", "root_sum"}, rows);
        const bool pass = res.margin >= -tt && res.chain_margin >= -tt;
        out << "lhs=" << fmt(res.lhs) << " rhs=" << fmt(res.rhs) << " margin=" << fmt(res.margin)
            << " chain_lower=" << fmt(res.chain_lower) << '\n';
        out << (pass ? "PASS" : "FAIL") << '\n';
        return pass ? kOk : kCheckFailed;
      }
    }

    if (*spectrum) {
      const auto field = load(common);
      if (m < 1) throw ConfigError("--m must be at least 1");
      const double t = ts.front();
      require_positive(t, "--t");
      const auto work = with_traces(field, t * 1.25, t * 0.5, epsilon);
      const auto sp = spectral::boundary_spectrum(*work, t, m, grid);
      const double lambda_r0 = annulus_bounds(*field, t).lower;
      spectral::export_spectrum(sp, lambda_r0, dir / "spectrum.csv");
      for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i) out << "eta_" << i + 1 << "=" << fmt(sp.eigenvalues[i]) << '\n';
      return kOk;
    }

    if (*profile) {
      const auto field = load(common);
      std::sort(radii.begin(), radii.end());
      if (radii.empty() || !(radii.front() >= 0)) throw ConfigError("--radii must be nonnegative");
      const auto p = ellipticity_profile(*field, radii, 2000, field->r_max(), common.seed);
      std::vector<std::vector<std::string>> rows;
      for (std::size_t i = 0; i < p.radii.size(); ++i) {
        rows.push_back({fmt(p.radii[i]), fmt(p.lambda_r[i]), fmt(p.Lambda_r[i]), p.provenance()});
      }
      io::write_csv(dir / "profile.csv", {"r", "lambda_r", "Lambda_r", "provenance"}, rows);
      report::write_json(dir / "profile.json", report::to_json(p));
      out << "lambda_inf=" << fmt(p.lambda_inf) << " Lambda_inf=" << fmt(p.Lambda_inf) << " ratio_inf=" << fmt(p.ratio_inf)
          << " provenance=" << p.provenance() << '\n';
      return kOk;
    }

    if (*solve) {
      const auto field = load(common);
      if (field->dim() != 2) throw ConfigError("the Dirichlet solver is implemented for n = 2");
      require_positive(r, "--r");
      const auto g = parse_trace(trace);
      auto dmesh = std::make_shared<const pde::DiskMesh>(pde::mesh_disk(r, mesh.h));
      const auto sol = pde::solve_dirichlet(dmesh, field, g);
      pde::export_solution(sol, dir / "solution");
      out << "vertices=" << dmesh->num_vertices() << " h=" << fmt(dmesh->h) << " energy=" << fmt(sol.energy)
          << " residual=" << fmt(sol.residual) << " max_principle=" << (sol.max_principle_ok ? "ok" : "violated") << '\n';
      if (!probe.empty()) {
        pde::PointLocator loc(*dmesh);
        out << "probe=" << fmt(pde::evaluate(sol, loc, pde::Point2(probe[0], probe[1]))) << '\n';
      }
      return sol.max_principle_ok ? kOk : kCheckFailed;
    }
  } catch (const FieldSpecError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
  err << "error: no command\n";
  return kConfigError;
}

}  // namespace ellcount::cli
