#include <random>

#include "doctest.h"
#include "support.hpp"
#include "vilab/error.hpp"

using namespace vilab;
using testing::constant;

TEST_CASE("nodal feasibility") {
  const Mesh m = build_interval_mesh(6, 0.0, 1.0);
  const NodalVector phi = interpolate_nodal([](const Point& p) { return 0.2 + p[0]; }, m);
  const ConstraintSet K = ConstraintSet::nodal(m, phi);
  CHECK(is_feasible(NodalVector(m, 0.0), K, m));
  CHECK(is_feasible(phi, K, m, 0.0));
  NodalVector bad = phi;
  bad[3] += 0.1;
  CHECK_FALSE(is_feasible(bad, K, m));
  CHECK(constraint_violation(bad, K, m) == doctest::Approx(0.1));
  CHECK_THROWS_AS(ConstraintSet::nodal(m, NodalVector(m, -1.0), true), InvalidArgument);
  CHECK(is_feasible(NodalVector(m, 1e9), ConstraintSet::unbounded(m), m));
}

TEST_CASE("midpoint and gradient feasibility") {
  const Mesh m = build_interval_mesh(4, 0.0, 1.0);
  const NodalVector hat = interpolate_nodal([](const Point& p) { return std::min(p[0], 1.0 - p[0]); }, m);
  // slopes are +-1, midpoint values 1/8 and 3/8
  CHECK(is_feasible(hat, ConstraintSet::gradient(m, Eigen::VectorXd::Ones(4), 2.0), m));
  CHECK_FALSE(is_feasible(hat, ConstraintSet::gradient(m, Eigen::VectorXd::Constant(4, 0.9), 2.0), m));
  CHECK(constraint_violation(hat, ConstraintSet::gradient(m, Eigen::VectorXd::Constant(4, 0.9), 2.0), m) ==
        doctest::Approx(0.1));
  CHECK(is_feasible(hat, ConstraintSet::midpoint(m, Eigen::VectorXd::Constant(4, 0.375)), m));
  CHECK_FALSE(is_feasible(hat, ConstraintSet::midpoint(m, Eigen::VectorXd::Constant(4, 0.3)), m));
  CHECK_THROWS_AS(ConstraintSet::gradient(m, Eigen::VectorXd::Constant(4, 0.5), 2.0, 1.0), InvalidArgument);
}

TEST_CASE("lp norms") {
  const Point g{3.0, -4.0};
  CHECK(lp_norm(g, 2, 2.0) == doctest::Approx(5.0));
  CHECK(lp_norm(g, 2, 1.0) == doctest::Approx(7.0));
  CHECK(lp_norm(g, 2, INFINITY) == doctest::Approx(4.0));
  CHECK(lp_norm(g, 1, 2.0) == doctest::Approx(3.0));
}

TEST_CASE("lattice operations") {
  std::mt19937_64 rng(17);
  const Mesh m = build_interval_mesh(40, 0.0, 1.0);
  const Eigen::Index n = static_cast<Eigen::Index>(m.num_nodes());
  CHECK(pos_part(NodalVector(m, -1.0)).values().isZero());
  for (int k = 0; k < 20; ++k) {
    const NodalVector v(m.id(), testing::random_vector(rng, n, -1, 1));
    const NodalVector w(m.id(), testing::random_vector(rng, n, -1, 1));
    CHECK((sup(v, w).values() + inf(v, w).values() - v.values() - w.values()).cwiseAbs().maxCoeff() <= 1e-15);
    const NodalVector p = pos_part(v);
    CHECK(p.values().cwiseProduct(p.values() - v.values()).isZero());
  }
}

TEST_CASE("inf(v, phi) is the mass-nearest feasible point") {
  std::mt19937_64 rng(19);
  const Mesh m = build_interval_mesh(12, 0.0, 1.0);
  const Eigen::VectorXd mass = lumped_mass_diagonal(m);
  const Eigen::Index n = mass.size();
  const NodalVector phi(m.id(), testing::random_vector(rng, n, 0, 1));
  const ConstraintSet K = ConstraintSet::nodal(m, phi);
  for (int k = 0; k < 20; ++k) {
    const NodalVector v(m.id(), testing::random_vector(rng, n, -1, 2));
    const NodalVector p = inf(v, phi);
    REQUIRE(is_feasible(p, K, m));
    const double best = (p.values() - v.values()).cwiseAbs2().dot(mass);
    for (int s = 0; s < 50; ++s) {
      // random feasible competitor
      const Eigen::VectorXd q = phi.values() - testing::random_vector(rng, n, 0, 1);
      CHECK((q - v.values()).cwiseAbs2().dot(mass) >= best - 1e-14);
    }
  }
}

TEST_CASE("scale recovery") {
  const Mesh m = build_interval_mesh(8, 0.0, 1.0);
  const NodalVector w = interpolate_nodal([](const Point& p) { return p[0] * (1 - p[0]); }, m);
  const Eigen::VectorXd phi = Eigen::VectorXd::Ones(8), phi_n = Eigen::VectorXd::Constant(8, 1.5);
  CHECK(scale_factor({phi.data(), 8}, {phi_n.data(), 8}, 1.0) == doctest::Approx(2.0 / 3.0));
  const NodalVector wn = scale_recovery(w, {phi.data(), 8}, {phi_n.data(), 8}, 1.0);
  CHECK((wn.values() - 2.0 / 3.0 * w.values()).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(scale_recovery(w, {phi.data(), 8}, {phi.data(), 8}, 1.0).values() == w.values());

  // shrinking gradient bounds: feasibility and the (1 - beta) bound
  const DiscreteOperator op = assemble_operator(m, {});
  const NodalVector slope1 = interpolate_nodal([](const Point& p) { return std::min(p[0], 1 - p[0]); }, m);
  double prev = INFINITY;
  for (double d : {0.4, 0.2, 0.1, 0.05, 0.025}) {
    const Eigen::VectorXd a_n = Eigen::VectorXd::Constant(8, 1.0 - d);
    const NodalVector r = scale_recovery(slope1, {phi.data(), 8}, {a_n.data(), 8}, 0.5);
    CHECK(is_feasible(r, ConstraintSet::gradient(m, a_n, 2.0), m));
    NodalVector diff = r;
    diff.values() -= slope1.values();
    const double dist = op.energy_norm(diff);
    CHECK(dist <= d / 0.5 * op.energy_norm(slope1) + 1e-14);
    CHECK(dist < prev);
    prev = dist;
  }
  CHECK_THROWS_AS(scale_factor({phi.data(), 8}, {phi_n.data(), 8}, 0.0), InvalidArgument);
}

TEST_CASE("truncation recovery") {
  const Mesh m = build_interval_mesh(5, 0.0, 1.0);
  CHECK(truncation_recovery(NodalVector(m, 0.0), 0.3).values().isZero());
  CHECK((truncation_recovery(NodalVector(m, 1.0), 0.3).values().array() - 0.7).abs().maxCoeff() <= 1e-15);
  const NodalVector w = interpolate_nodal([](const Point& p) { return std::sin(7 * p[0]); }, m);
  CHECK(truncation_recovery(w, 0.0).values() == w.values());

  std::mt19937_64 rng(23);
  for (int k = 0; k < 50; ++k) {
    const NodalVector a(m.id(), testing::random_vector(rng, 6, -2, 2));
    const NodalVector b(m.id(), testing::random_vector(rng, 6, -2, 2));
    const double s = testing::random_vector(rng, 1, 0, 1)[0];
    const Eigen::VectorXd ta = truncation_recovery(a, s).values(), tb = truncation_recovery(b, s).values();
    CHECK(((ta - tb).cwiseAbs() - (a.values() - b.values()).cwiseAbs()).maxCoeff() <= 1e-15);
  }
}

TEST_CASE("singular perturbation recovery") {
  const Mesh m = build_interval_mesh(32, 0.0, 1.0);
  const DiscreteOperator Q = assemble_operator(m, {});
  const DiscreteOperator M = assemble_lumped_mass(m);
  const NodalVector phi = interpolate_nodal([](const Point& p) { return 0.1 + p[0] * (1 - p[0]); }, m);

  const NodalVector below = interpolate_nodal([](const Point& p) { return 0.5 * p[0] * (1 - p[0]); }, m);
  const auto same = singular_perturbation_recovery(below, phi, Q, M);
  CHECK(same.r == 0.0);
  CHECK(same.w.values() == below.values());

  // w = phi + bump violates phi; output must lie below phi
  const NodalVector w = interpolate_nodal([](const Point& p) {
    return 0.1 + p[0] * (1 - p[0]) + 0.05 * std::exp(-200 * (p[0] - 0.4) * (p[0] - 0.4));
  }, m);
  NodalVector w0 = w;
  w0[0] = 0.0;
  w0[32] = 0.0;
  const auto out = singular_perturbation_recovery(w0, phi, Q, M);
  CHECK(out.r > 0.0);
  CHECK(is_feasible(out.w, ConstraintSet::nodal(m, phi), m));

  // convex obstacle breaks Q phi >= 0
  const NodalVector convex = interpolate_nodal([](const Point& p) { return 0.1 + (p[0] - 0.5) * (p[0] - 0.5); }, m);
  CHECK_THROWS_AS(singular_perturbation_recovery(w0, convex, Q, M), PreconditionError);
}

TEST_CASE("recovery trace ordering") {
  RecoveryTrace t;
  t.push({1, 1.0, true});
  t.push({2, 0.5, true});
  CHECK(t.all_feasible());
  CHECK_THROWS_AS(t.push({2, 0.1, true}), InvalidArgument);
  t.push({3, 0.1, false});
  CHECK_FALSE(t.all_feasible());
}
