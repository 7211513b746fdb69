#include "ellcount/field_spec.hpp"
#include "ellcount/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace ellcount;
using namespace ellcount::geometry;

namespace {

std::vector<std::shared_ptr<const MatrixField>> shipped_fields() {
  std::vector<std::shared_ptr<const MatrixField>> out;
  for (const auto& entry : std::filesystem::directory_iterator(ELLCOUNT_FIELDS_DIR)) {
    if (entry.path().extension() == ".json") out.push_back(load_field_spec(entry.path()));
  }
  return out;
}

}  // namespace

TEST_CASE("conformal data by hand") {
  const auto id = CoefficientField::identity();
  auto cd = conformal_data(id, point2(0.3, -0.4));
  CHECK(cd.w == doctest::Approx(1.0));
  CHECK(cd.phi == doctest::Approx(1.0));
  CHECK((cd.g_inv - Mat::Identity(2, 2)).norm() < 1e-15);

  const auto diag = CoefficientField::diagonal({1.0, 4.0});
  cd = conformal_data(diag, point2(1.0, 0.0));
  CHECK(cd.w == doctest::Approx(1.0));
  CHECK(cd.phi == doctest::Approx(2.0));
  CHECK(cd.g_inv(0, 0) == doctest::Approx(1.0));
  CHECK(cd.g_inv(1, 1) == doctest::Approx(4.0));

  cd = conformal_data(diag, point2(0.0, 1.0));
  CHECK(cd.w == doctest::Approx(4.0));
  CHECK(cd.phi == doctest::Approx(2.0));
  CHECK(cd.g_inv(0, 0) == doctest::Approx(4.0));
  CHECK(cd.g_inv(1, 1) == doctest::Approx(16.0));
  CHECK(std::abs(cd.g_inv(0, 1)) < 1e-15);

  cd = conformal_data(diag, point2(0.0, 0.0));
  CHECK(cd.at_origin);
}

TEST_CASE("radial gradient norm equals w") {
  CHECK(radial_gradient_norm(CoefficientField::identity(), point2(2.0, 1.0)) == doctest::Approx(1.0));
  CHECK(radial_gradient_norm(CoefficientField::diagonal({1.0, 4.0}), point2(0.0, 1.0)) == doctest::Approx(4.0));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (const auto& f : shipped_fields()) {
    CAPTURE(f->id());
    for (int i = 0; i < 10000; ++i) {
      const auto x = point2(u(rng), u(rng));
      const auto cd = conformal_data(*f, x);
      CHECK(std::abs(radial_gradient_norm(*f, x) - cd.w) <= 1e-12);
    }
  }
}

TEST_CASE("boundary weight identity") {
  auto res = boundary_weight_identity(CoefficientField::identity(), 1.0, 4096);
  CHECK(res.euclidean[0] == doctest::Approx(2 * std::numbers::pi));
  CHECK(res.weighted[0] == doctest::Approx(2 * std::numbers::pi));
  CHECK(res.residual < 1e-12);
  res = boundary_weight_identity(CoefficientField::diagonal({1.0, 4.0}), 1.0, 4096);
  CHECK(res.residual <= 1e-8);
  res = boundary_weight_identity(CoefficientField::scalar(2, 2.0), 2.0, 4096);
  CHECK(res.residual <= 1e-8);
  CHECK(std::abs(res.weighted[1]) <= 1e-8);
  res = boundary_weight_identity(CoefficientField::conic_decay(Mat::Identity(2, 2), 1.0), 1.5, 4096);
  CHECK(res.residual <= 1e-8);
}

TEST_CASE("closed-form Dirichlet energies") {
  auto mesh = std::make_shared<const pde::DiskMesh>(pde::mesh_disk(1.0, 0.05));
  auto id = std::make_shared<const CoefficientField>(CoefficientField::identity());
  const EnergyForm form(mesh, id);
  Eigen::VectorXd x(mesh->num_vertices()), y(mesh->num_vertices()), c(mesh->num_vertices());
  for (std::size_t i = 0; i < mesh->num_vertices(); ++i) {
    x[static_cast<Eigen::Index>(i)] = mesh->vertices[i].x();
    y[static_cast<Eigen::Index>(i)] = mesh->vertices[i].y();
    c[static_cast<Eigen::Index>(i)] = 3.0;
  }
  // The mesh covers the inscribed polygon, so the area is slightly below pi.
  const double area = 0.5 * form.energy(x, x) + 0.5 * form.energy(y, y);
  CHECK(weighted_energy(form, x, x, 1.0).value == doctest::Approx(std::numbers::pi).epsilon(2e-3));
  CHECK(weighted_energy(form, x, x, 1.0).value == doctest::Approx(area).epsilon(1e-12));
  CHECK(std::abs(weighted_energy(form, c, c, 1.0).value) < 1e-20);
  CHECK(std::abs(weighted_energy(form, x, y, 1.0).value) < 1e-12);
  CHECK(form.energy(x, x, 0.5) == doctest::Approx(std::numbers::pi * 0.25).epsilon(1e-12));
  CHECK_THROWS(weighted_energy(form, x, x, 1.5));

  const Eigen::MatrixXd G = form.gram((Eigen::MatrixXd(x.size(), 2) << x, y).finished(), 0.7);
  CHECK(G(0, 0) == doctest::Approx(std::numbers::pi * 0.49).epsilon(1e-12));
  CHECK(std::abs(G(0, 1)) < 1e-12);
  CHECK((G - G.transpose()).norm() == 0.0);
}

TEST_CASE("triangle clipped area") {
  const pde::Point2 a(0, 0), b(1, 0), c(0, 1);
  CHECK(triangle_disk_area(a, b, c, 2.0) == doctest::Approx(0.5));
  CHECK(triangle_disk_area(a, b, c, 1.0) == doctest::Approx(0.5));
  // quarter disk minus the circular segment cut off by x + y = 1
  const double r = 0.8, d = 1.0 / std::sqrt(2.0);
  const double segment = r * r * std::acos(d / r) - d * std::sqrt(r * r - d * d);
  CHECK(triangle_disk_area(a, b, c, r) == doctest::Approx(std::numbers::pi * r * r / 4 - segment).epsilon(1e-12));
  CHECK(triangle_disk_area(a, b, c, 0.5) == doctest::Approx(std::numbers::pi / 16).epsilon(1e-12));
  const pde::Point2 p(3, 3), q(4, 3), s(3, 4);
  CHECK(triangle_disk_area(p, q, s, 1.0) == 0.0);
}

TEST_CASE("Riemannian form collapses to the Euclidean form") {
  auto mesh = std::make_shared<const pde::DiskMesh>(pde::mesh_disk(2.0, 0.15));
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> ut(0.3, 2.0);
  const auto fields = shipped_fields();
  REQUIRE(fields.size() >= 8);
  double worst = 0.0;
  for (const auto& f : fields) {
    const EnergyForm form(mesh, f);
    for (int pair = 0; pair < 20; ++pair) {
      Eigen::VectorXd u(mesh->num_vertices()), v(mesh->num_vertices());
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        u[i] = g(rng);
        v[i] = g(rng);
      }
      const double t = ut(rng);
      const double e = form.energy(u, v, t);
      const double scale = std::sqrt(form.energy(u, u, t) * form.energy(v, v, t));
      worst = std::max(worst, std::abs(e - form.riemannian_energy(u, v, t)) / scale);
    }
  }
  CHECK(worst <= 1e-10);
}
