#include <Eigen/Dense>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "vilab/error.hpp"
#include "vilab/vi_solver.hpp"

using namespace vilab;
using testing::constant;

namespace {

/// Tries every active set on the free nodes and keeps the ones satisfying
/// y <= phi and f - A y >= 0 (dense solves only).
std::vector<Eigen::VectorXd> enumerate_active_sets(const Eigen::MatrixXd& A, const Eigen::VectorXd& f,
                                                   const Eigen::VectorXd& phi) {
  const int n = static_cast<int>(f.size());
  std::vector<Eigen::VectorXd> hits;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> in, out;
    for (int i = 0; i < n; ++i) ((mask >> i) & 1u ? in : out).push_back(i);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    for (int i : in) y[i] = phi[i];
    if (!out.empty()) {
      const Eigen::Index k = static_cast<Eigen::Index>(out.size());
      Eigen::MatrixXd Aoo(k, k);
      Eigen::VectorXd rhs(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        rhs[a] = f[out[a]];
        for (int i : in) rhs[a] -= A(out[a], i) * phi[i];
        for (Eigen::Index b = 0; b < k; ++b) Aoo(a, b) = A(out[a], out[b]);
      }
      const Eigen::VectorXd yo = Aoo.fullPivLu().solve(rhs);
      for (Eigen::Index a = 0; a < k; ++a) y[out[a]] = yo[a];
    }
    const Eigen::VectorXd slack = f - A * y;
    if ((y - phi).maxCoeff() <= 1e-12 && slack.minCoeff() >= -1e-12) hits.push_back(y);
  }
  return hits;
}

ViOptions relaxation(double tol = 1e-13) {
  ViOptions o;
  o.method = ViMethod::ProjectedRelaxation;
  o.tol = tol;
  return o;
}

}  // namespace

TEST_CASE("zero load gives zero") {
  const testing::Contact1D p(16, 0.0, 0.3);
  for (const ViOptions& o : {ViOptions{}, relaxation()}) {
    const VISolution s = solve_obstacle_vi(p.op, p.f, p.K, o);
    CHECK(s.y.values().isZero());
    CHECK(s.active_set.empty());
  }
}

TEST_CASE("brute-force active-set enumeration oracle") {
  const testing::Contact1D p(8, 8.0, 0.1);
  const Eigen::MatrixXd A(p.op.matrix());
  const auto hits = enumerate_active_sets(A, p.f.values, testing::free_obstacle(p.op, p.K));
  REQUIRE(hits.size() == 1);
  for (const ViOptions& o : {ViOptions{}, relaxation()}) {
    const VISolution s = solve_obstacle_vi(p.op, p.f, p.K, o);
    CHECK((p.op.restrict(s.y) - hits[0]).cwiseAbs().maxCoeff() <= 1e-8);
  }
  // contact region contains the midpoint
  const VISolution s = solve_obstacle_vi(p.op, p.f, p.K);
  CHECK(std::find(s.active_set.begin(), s.active_set.end(), 4) != s.active_set.end());
}

TEST_CASE("no constraint reduces to the linear solve") {
  const testing::Contact1D p(16, 5.0, 0.0);
  const VISolution s = solve_obstacle_vi(p.op, p.f, ConstraintSet::unbounded(p.mesh));
  CHECK(sup_distance(s.y, solve_linear(p.op, p.f)) <= 1e-12);
}

TEST_CASE("projected-gradient oracle on symmetric problems") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 6; ++trial) {
    const bool twod = trial % 2 == 1;
    const Mesh m = twod ? build_triangle_mesh(6, 5) : build_interval_mesh(16 + 8 * trial, 0.0, 1.0);
    Coefficients c;
    c.reaction = trial * 0.5;
    const DiscreteOperator op = assemble_operator(m, c);
    const Eigen::Index n = static_cast<Eigen::Index>(op.size());
    const LoadFunctional f = load_from_values(op, testing::random_vector(rng, n, 0.0, 0.2));
    const NodalVector phi(m.id(), testing::random_vector(rng, static_cast<Eigen::Index>(m.num_nodes()), 0.01, 0.05));
    const ConstraintSet K = ConstraintSet::nodal(m, phi);
    const Eigen::VectorXd oracle =
        testing::projected_gradient(Eigen::MatrixXd(op.matrix()), f.values, testing::free_obstacle(op, K));
    const VISolution s = solve_obstacle_vi(op, f, K);
    CAPTURE(trial);
    CHECK((op.restrict(s.y) - oracle).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("comparison principles of the solution map") {
  std::mt19937_64 rng(31);
  const Mesh m = build_interval_mesh(24, 0.0, 1.0);
  const DiscreteOperator op = assemble_operator(m, {});
  const Eigen::Index n = static_cast<Eigen::Index>(op.size()), N = static_cast<Eigen::Index>(m.num_nodes());
  int violations = 0;
  for (int k = 0; k < 50; ++k) {
    const NodalVector phi(m.id(), testing::random_vector(rng, N, 0.0, 0.1));
    const ConstraintSet K = ConstraintSet::nodal(m, phi);
    const Eigen::VectorXd f1 = testing::random_vector(rng, n, -0.05, 0.1);
    const Eigen::VectorXd f2 = f1 + testing::random_vector(rng, n, 0.0, 0.1);
    const NodalVector y1 = solution_map(load_from_values(op, f1), K, op, m);
    const NodalVector y2 = solution_map(load_from_values(op, f2), K, op, m);
    if ((y2.values() - y1.values()).minCoeff() < -1e-10) ++violations;

    // larger set, nonnegative load
    const NodalVector phi2(m.id(), phi.values() + testing::random_vector(rng, N, 0.0, 0.05));
    const LoadFunctional fp = load_from_values(op, f2.cwiseAbs());
    const NodalVector z1 = solution_map(fp, K, op, m);
    const NodalVector z2 = solution_map(fp, ConstraintSet::nodal(m, phi2), op, m);
    if ((z2.values() - z1.values()).minCoeff() < -1e-10) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("uniqueness from different starts and the iteration bound") {
  std::mt19937_64 rng(37);
  const testing::Contact1D p(40, 20.0, 0.3);
  const NodalVector ref = solve_obstacle_vi(p.op, p.f, p.K).y;
  for (int k = 0; k < 5; ++k) {
    ViOptions as;
    as.initial = NodalVector(p.mesh.id(), testing::random_vector(rng, 41, -1.0, 1.0));
    const VISolution a = solve_obstacle_vi(p.op, p.f, p.K, as);
    CHECK(sup_distance(a.y, ref) <= 1e-8);
    CHECK(a.iterations <= 2 * static_cast<int>(p.op.size()));
    ViOptions pr = relaxation();
    pr.initial = as.initial;
    CHECK(sup_distance(solve_obstacle_vi(p.op, p.f, p.K, pr).y, ref) <= 1e-8);
  }
}

TEST_CASE("Lipschitz dependence on the load") {
  const testing::Contact1D p(32, 20.0, 0.3);
  const double c = p.op.coercivity_estimate();
  const NodalVector y = solve_obstacle_vi(p.op, p.f, p.K).y;
  for (double eps : {1.0, 0.1, 0.01}) {
    const LoadFunctional fn{p.f.values + eps * Eigen::VectorXd::Ones(p.f.values.size()), p.f.mesh_id};
    NodalVector d = solve_obstacle_vi(p.op, fn, p.K).y;
    d.values() -= y.values();
    // |y_n - y|_A^2 <= <f_n - f, y_n - y> <= |f_n - f|_2 |y_n - y|_2 and |.|_2 <= |.|_A / sqrt(c)
    CHECK(p.op.energy_norm(d) <= (fn.values - p.f.values).norm() / std::sqrt(c) * (1 + 1e-9));
  }
}

TEST_CASE("energy of the VI solution beats feasible samples") {
  std::mt19937_64 rng(41);
  const testing::Contact1D p(20, 20.0, 0.25);
  const Eigen::MatrixXd A(p.op.matrix());
  const Eigen::VectorXd y = p.op.restrict(solve_obstacle_vi(p.op, p.f, p.K).y);
  const Eigen::VectorXd phi = testing::free_obstacle(p.op, p.K);
  const auto energy = [&](const Eigen::VectorXd& v) { return 0.5 * v.dot(A * v) - p.f.values.dot(v); };
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd v = phi - testing::random_vector(rng, phi.size(), 0.0, 0.3);
    CHECK(energy(y) <= energy(v) + 1e-12);
  }
}

TEST_CASE("complementarity residual") {
  const testing::Contact1D p(16, 20.0, 0.3);
  const NodalVector y = solve_obstacle_vi(p.op, p.f, p.K).y;
  CHECK(complementarity_residual(y, p.op, p.f, p.K).value <= 1e-9);
  const NodalVector free = solve_linear(p.op, p.f);
  const auto r = complementarity_residual(free, p.op, p.f, p.K);
  CHECK(r.value > 0.0);
  CHECK_FALSE(r.feasible);

  // moving one inactive node by eps changes the residual by Theta(eps)
  const VISolution s = solve_obstacle_vi(p.op, p.f, p.K);
  int node = 1;
  while (std::find(s.active_set.begin(), s.active_set.end(), node) != s.active_set.end()) ++node;
  for (double eps : {1e-3, 1e-4, 1e-5}) {
    NodalVector z = y;
    z[static_cast<std::size_t>(node)] -= eps;
    const double res = complementarity_residual(z, p.op, p.f, p.K).value;
    CHECK(res >= 0.5 * eps * p.op.matrix().coeff(node - 1, node - 1) / 2);
    CHECK(res <= 4.0 * eps * p.op.matrix().coeff(node - 1, node - 1));
  }
}

TEST_CASE("non M-matrix falls back to relaxation with a warning") {
  const Mesh m = build_interval_mesh(16, 0.0, 1.0);
  Coefficients c;
  c.advection = {60.0, 0.0};
  const DiscreteOperator op = assemble_operator(m, c);
  REQUIRE_FALSE(op.is_m_matrix());
  const VISolution s = solve_obstacle_vi(op, assemble_load(m, constant(10.0)), ConstraintSet::nodal(m, NodalVector(m, 0.1)));
  CHECK_FALSE(s.warnings.empty());
  CHECK(complementarity_residual(s.y, op, assemble_load(m, constant(10.0)), ConstraintSet::nodal(m, NodalVector(m, 0.1))).value <=
        1e-8);
}

TEST_CASE("midpoint VI against a dense dual oracle") {
  const Mesh m = build_interval_mesh(8, 0.0, 1.0);
  const DiscreteOperator op = assemble_operator(m, {});
  const LoadFunctional f = assemble_load(m, constant(8.0));
  const ConstraintSet K = ConstraintSet::midpoint(m, Eigen::VectorXd::Constant(8, 0.1));
  const VISolution s = solve_midpoint_vi(op, f, K, m);
  CHECK(constraint_violation(s.y, K, m) <= 1e-9);
  // oracle: projected gradient on the same problem in midpoint coordinates via penalty-free
  // check of KKT: y minimizes the energy among feasible perturbations along free directions
  const Eigen::MatrixXd A(op.matrix());
  const Eigen::VectorXd y = op.restrict(s.y);
  const double e0 = 0.5 * y.dot(A * y) - f.values.dot(y);
  std::mt19937_64 rng(43);
  for (int k = 0; k < 300; ++k) {
    const Eigen::VectorXd v = y + testing::random_vector(rng, y.size(), -0.02, 0.02);
    if (constraint_violation(op.extend(v), K, m) > 0) continue;
    CHECK(e0 <= 0.5 * v.dot(A * v) - f.values.dot(v) + 1e-12);
  }
}

TEST_CASE("gradient VI") {
  const Mesh m = build_interval_mesh(32, 0.0, 1.0);
  const DiscreteOperator op = assemble_operator(m, {});
  const ConstraintSet K = ConstraintSet::gradient(m, Eigen::VectorXd::Ones(32), 2.0);
  CHECK(solve_gradient_vi(op, assemble_load(m, constant(0.0)), K, m).y.values().isZero());

  // huge load: the torsion limit min(x, 1 - x)
  const GradientVISolution s = solve_gradient_vi(op, assemble_load(m, constant(1e3)), K, m);
  const NodalVector tent = interpolate_nodal([](const Point& p) { return std::min(p[0], 1 - p[0]); }, m);
  CHECK(sup_distance(s.y, tent) <= 1e-3);

  // violation roughly halves when gamma doubles
  GradientOptions o;
  o.gamma_schedule = {1e3, 2e3, 4e3, 8e3};
  const GradientVISolution d = solve_gradient_vi(op, assemble_load(m, constant(20.0)), ConstraintSet::gradient(m, Eigen::VectorXd::Constant(32, 2.0), 2.0), m, o);
  for (std::size_t i = 1; i < d.path.size(); ++i) {
    const double ratio = d.path[i].violation / d.path[i - 1].violation;
    CHECK(ratio >= 0.35);
    CHECK(ratio <= 0.65);
  }
}
