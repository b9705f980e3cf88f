#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "vilab/error.hpp"

using namespace vilab;
using testing::constant;

TEST_CASE("interval mesh generator") {
  const Mesh m = build_interval_mesh(4, 0.0, 1.0);
  REQUIRE(m.num_nodes() == 5);
  for (int i = 0; i < 5; ++i) CHECK(m.nodes()[i][0] == doctest::Approx(0.25 * i));
  CHECK(m.h() == doctest::Approx(0.25));
  CHECK(mesh_size(m) == doctest::Approx(0.25));

  const Mesh one = build_interval_mesh(1, 0.0, 1.0);
  CHECK(one.num_nodes() == 2);
  CHECK(one.num_elements() == 1);
  CHECK(one.is_boundary(0));
  CHECK(one.is_boundary(1));

  const Mesh sym = build_interval_mesh(8, -1.0, 1.0);
  CHECK(sym.h() == doctest::Approx(0.25));
  CHECK(sym.num_nodes() == 9);

  CHECK_THROWS_AS(build_interval_mesh(0, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_interval_mesh(4, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("triangle mesh generator") {
  const Mesh m1 = build_triangle_mesh(1, 1);
  CHECK(m1.num_nodes() == 4);
  CHECK(m1.num_elements() == 2);
  const Mesh m2 = build_triangle_mesh(2, 2);
  CHECK(m2.num_nodes() == 9);
  CHECK(m2.num_elements() == 8);
  CHECK(m2.h() == doctest::Approx(std::sqrt(2.0) / 2.0));
  double area = 0.0;
  for (std::size_t e = 0; e < m2.num_elements(); ++e) area += m2.measure(e);
  CHECK(area == doctest::Approx(1.0));
}

TEST_CASE("shape regularity") {
  // 1D convention: inball diameter equals the diameter
  CHECK(shape_regularity(build_interval_mesh(4, 0.0, 1.0)) == doctest::Approx(1.0));

  // right triangle with legs h: inradius (a + b - c) / 2
  const double h = 0.5, c = std::sqrt(2.0) * h;
  const double expected = c / (2.0 * (h + h - c) / 2.0);
  const Mesh m = build_triangle_mesh(2, 2);
  CHECK(m.inball_diameter(0) == doctest::Approx(2.0 * (h + h - c) / 2.0));
  CHECK(shape_regularity(m) == doctest::Approx(expected));
  for (int n : {2, 4, 8}) CHECK(shape_regularity(build_triangle_mesh(n, n)) == doctest::Approx(expected));
}

TEST_CASE("refinement halves h and nests") {
  for (const Mesh& m : {build_interval_mesh(3, 0.0, 2.0), build_triangle_mesh(3, 2, {0.0, 1.0, 0.0, 2.0})}) {
    const Mesh r = refine(m);
    CHECK(r.h() == doctest::Approx(m.h() / 2.0).epsilon(1e-14));
    CHECK(is_nested(m, r));
    CHECK_FALSE(is_nested(r, m));
  }
}

TEST_CASE("nodal interpolation reproduces affine fields") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Mesh m = build_triangle_mesh(5, 4);
  const ScalarField fields[] = {constant(1.0), [](const Point& p) { return p[0]; }, [](const Point& p) { return p[1]; },
                                [](const Point& p) { return p[0] + p[1]; }};
  for (const auto& f : fields) {
    const NodalVector v = interpolate_nodal(f, m);
    for (int k = 0; k < 100; ++k) {
      const Point p{u(rng), u(rng)};
      CHECK(std::abs(m.evaluate(v.span(), p) - f(p)) <= 1e-12);
    }
  }
  const Mesh line = build_interval_mesh(7, 0.0, 1.0);
  CHECK(reconstruction_error(interpolate_nodal([](const Point& p) { return p[0]; }, line), line,
                             [](const Point& p) { return p[0]; }) <= 1e-14);
  const NodalVector c = interpolate_nodal(constant(2.5), line);
  CHECK(c.values().cwiseEqual(2.5).all());
}

TEST_CASE("nodal interpolation is linear") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Mesh m = build_triangle_mesh(4, 4);
  for (int k = 0; k < 10; ++k) {
    const double a = u(rng), b = u(rng), s = u(rng), t = u(rng);
    const ScalarField f = [s](const Point& p) { return std::sin(s * p[0]) + p[1] * p[1]; };
    const ScalarField g = [t](const Point& p) { return std::exp(t * p[1]) * p[0]; };
    const NodalVector lhs = interpolate_nodal([&](const Point& p) { return a * f(p) + b * g(p); }, m);
    const Eigen::VectorXd rhs = a * interpolate_nodal(f, m).values() + b * interpolate_nodal(g, m).values();
    CHECK((lhs.values() - rhs).cwiseAbs().maxCoeff() <= 1e-13);
  }
  CHECK_THROWS_AS(interpolate_nodal([](const Point&) { return NAN; }, m), InvalidArgument);
}

TEST_CASE("interpolation error of sin(pi x) is second order") {
  const ScalarField f = [](const Point& p) { return std::sin(M_PI * p[0]); };
  double prev = 0.0;
  for (int n : {8, 16, 32, 64}) {
    const Mesh m = build_interval_mesh(n, 0.0, 1.0);
    const double err = reconstruction_error(interpolate_nodal(f, m), m, f);
    // independent bound: |f - I_h f| <= h^2 / 8 max|f''|
    CHECK(err <= m.h() * m.h() / 8.0 * M_PI * M_PI * (1.0 + 1e-9));
    if (prev > 0.0) CHECK(std::log2(prev / err) >= 1.9);
    prev = err;
  }
}

TEST_CASE("mesh file round trip") {
  const Mesh m = build_triangle_mesh(3, 2);
  const auto path = std::filesystem::temp_directory_path() / "vilab_mesh_roundtrip.txt";
  write_mesh_file(m, path);
  const Mesh r = read_mesh_file(path);
  std::filesystem::remove(path);
  CHECK(r.num_nodes() == m.num_nodes());
  CHECK(r.num_elements() == m.num_elements());
  CHECK(r.boundary_nodes().size() == m.boundary_nodes().size());
  CHECK(r.h() == doctest::Approx(m.h()));
  CHECK_THROWS(read_mesh_file("/nonexistent/mesh.txt"));
}

TEST_CASE("prolongation is exact on nested P1 spaces") {
  const Mesh c = build_triangle_mesh(3, 3), f = refine(c);
  const ScalarField g = [](const Point& p) { return 2.0 * p[0] - p[1] + 0.5; };
  const NodalVector up = prolongate(interpolate_nodal(g, c), c, f);
  CHECK((up.values() - interpolate_nodal(g, f).values()).cwiseAbs().maxCoeff() <= 1e-14);
}
