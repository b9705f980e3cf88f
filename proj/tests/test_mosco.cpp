#include "doctest.h"
#include "support.hpp"
#include "vilab/error.hpp"
#include "vilab/mosco.hpp"
#include "vilab/vi_solver.hpp"

using namespace vilab;
using testing::constant;

TEST_CASE("constant set sequence") {
  const testing::Contact1D p(32, 20.0, 0.3);
  const MoscoReport r = mosco_study(p.op, p.f, SetSequence::constant(p.K, 5), p.mesh);
  REQUIRE(r.records.size() == 6);
  for (const auto& rec : r.records) CHECK(rec.err_sup <= 1e-9);

  const NodalVector w = interpolate_nodal([](const Point& x) { return x[0] * (1 - x[0]); }, p.mesh);
  const RecoveryReport rr = recovery_study(w, SetSequence::constant(p.K, 4), RecoveryConstruction::Truncate, p.mesh,
                                           {&p.op, nullptr, nullptr, 0.0});
  for (const auto& s : rr.trace.steps()) CHECK(s.distance == 0.0);
}

TEST_CASE("shifted obstacles: C/n bound and limit feasibility") {
  const testing::Contact1D p(64, 20.0, 0.3);
  std::vector<double> harmonic;
  for (int n = 1; n <= 10; ++n) harmonic.push_back(1.0 / n);
  const SetSequence seq =
      SetSequence::shifted_obstacle(p.mesh, p.K.as<NodalObstacle>()->phi, NodalVector(p.mesh, 1.0), harmonic);
  const MoscoReport r = mosco_study(p.op, p.f, seq, p.mesh);
  const double C = r.records[1].err_sup / harmonic[0];
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    CHECK(r.records[i].err_sup <= C * r.records[i].delta * 1.05);
    CHECK(r.records[i].error.empty());
  }
  CHECK(r.slope > 0.0);
  CHECK(r.limit_feasible);

  // simultaneous load perturbation
  const auto dy = dyadic_schedule(10);
  std::vector<LoadFunctional> loads;
  for (double d : dy) loads.push_back({p.f.values * (1 + d), p.f.mesh_id});
  const MoscoReport both =
      mosco_study(p.op, p.f, SetSequence::shifted_obstacle(p.mesh, p.K.as<NodalObstacle>()->phi, NodalVector(p.mesh, 1.0), dy),
                  p.mesh, loads);
  CHECK(both.converged);
  CHECK(both.limit_feasible);
  CHECK(both.slope > 0.0);
}

TEST_CASE("solver failures are recorded, not thrown") {
  const testing::Contact1D p(16, 20.0, 0.3);
  const auto dy = dyadic_schedule(3);
  std::vector<LoadFunctional> loads(3, p.f);
  loads[1].values = Eigen::VectorXd::Constant(p.f.values.size(), NAN);
  const MoscoReport r =
      mosco_study(p.op, p.f, SetSequence::shifted_obstacle(p.mesh, p.K.as<NodalObstacle>()->phi, NodalVector(p.mesh, 1.0), dy),
                  p.mesh, loads);
  CHECK_FALSE(r.records[2].error.empty());
  CHECK(std::isnan(r.records[2].err_sup));
  CHECK(r.records[1].error.empty());
}

TEST_CASE("recovery constructions") {
  const Mesh m = build_interval_mesh(64, 0.0, 1.0);
  const DiscreteOperator op = assemble_operator(m, {});
  const DiscreteOperator mass = assemble_lumped_mass(m);

  // scale, gradient bounds alpha_n = 1 + 1/n with nu = 1
  std::vector<double> harmonic;
  for (int n = 1; n <= 10; ++n) harmonic.push_back(1.0 / n);
  const NodalVector w = interpolate_nodal([](const Point& x) { return 0.9 * std::min(x[0], 1 - x[0]); }, m);
  const SetSequence grad = SetSequence::shifted_gradient(m, Eigen::VectorXd::Ones(64), Eigen::VectorXd::Ones(64), 2.0,
                                                         harmonic, 1.0);
  const RecoveryReport s = recovery_study(w, grad, RecoveryConstruction::Scale, m, {&op, nullptr, nullptr, 1.0});
  REQUIRE(s.failures.empty());
  CHECK(s.trace.all_feasible());
  for (const auto& st : s.trace.steps()) CHECK(st.distance <= harmonic[st.n - 1] * op.energy_norm(w) * (1 + 1e-12));

  // singular perturbation with concave obstacles decreasing to phi
  const NodalVector phi = interpolate_nodal([](const Point& x) { return 0.2 + x[0] * (1 - x[0]); }, m);
  const NodalVector target = interpolate_nodal([](const Point& x) { return 0.8 * x[0] * (1 - x[0]); }, m);
  const SetSequence down = SetSequence::shifted_obstacle(m, phi, NodalVector(m, -0.1), dyadic_schedule(10));
  const RecoveryReport sp =
      recovery_study(target, down, RecoveryConstruction::SingularPerturbation, m, {&op, &op, &mass, 0.0});
  CHECK(sp.failures.empty());
  CHECK(sp.trace.all_feasible());
  CHECK(sp.converged);

  const RecoveryReport tr = recovery_study(target, down, RecoveryConstruction::Truncate, m, {&op, nullptr, nullptr, 0.0});
  CHECK(tr.failures.empty());
  CHECK(tr.trace.all_feasible());
  CHECK(tr.converged);

  // violated preconditions are recorded per n
  const NodalVector low = interpolate_nodal([](const Point&) { return 0.05; }, m);
  const RecoveryReport bad = recovery_study(NodalVector(m, 0.0),
                                            SetSequence::shifted_obstacle(m, low, NodalVector(m, -1.0), dyadic_schedule(5)),
                                            RecoveryConstruction::Truncate, m, {&op, nullptr, nullptr, 0.0});
  CHECK(bad.failures.size() == 4);
  CHECK_FALSE(bad.converged);
}

TEST_CASE("finite element constraint studies") {
  std::vector<Mesh> levels;
  for (int n : {8, 16, 32, 64}) levels.push_back(build_interval_mesh(n, 0.0, 1.0));
  ContinuumProblem pb;
  pb.load = constant(20.0);
  pb.obstacle = [](const Point& x) { return 0.3 + 0.2 * x[0]; };

  const MoscoReport k2 = fem_constraint_study(pb, FemConstraint::K2Nodal, levels);
  for (std::size_t i = 2; i < k2.records.size(); ++i) CHECK(k2.records[i].err_sup < k2.records[i - 1].err_sup);

  const MoscoReport k1 = fem_constraint_study(pb, FemConstraint::K1Midpoint, levels);
  for (std::size_t i = 2; i < k1.records.size(); ++i) CHECK(k1.records[i].err_sup < k1.records[i - 1].err_sup);
  // both variants approach the same continuous solution
  const Mesh ref = refine(levels.back());
  const DiscreteOperator op = assemble_operator(ref, {});
  const LoadFunctional f = assemble_load(ref, pb.load);
  const NodalVector y2 = solve_obstacle_vi(op, f, ConstraintSet::nodal(ref, interpolate_nodal(pb.obstacle, ref))).y;
  const NodalVector y1 = solve_midpoint_vi(op, f, ConstraintSet::midpoint(ref, sample_midpoints(pb.obstacle, ref)), ref).y;
  CHECK(sup_distance(y1, y2) <= 4 * ref.h());

  // gradient bound never active: plain FEM errors at second order
  ContinuumProblem loose;
  loose.load = [](const Point& x) { return M_PI * M_PI * std::sin(M_PI * x[0]); };
  loose.alpha = constant(1e6);
  const MoscoReport ki = fem_constraint_study(loose, FemConstraint::KiGradient, levels);
  std::vector<double> plain;
  {
    const Mesh r = refine(levels.back());
    const NodalVector yr = solve_linear(assemble_operator(r, {}), assemble_load(r, loose.load));
    for (const Mesh& l : levels) {
      NodalVector up = prolongate(solve_linear(assemble_operator(l, {}), assemble_load(l, loose.load)), l, r);
      plain.push_back(sup_distance(up, yr));
    }
  }
  for (std::size_t i = 1; i < ki.records.size(); ++i)
    CHECK(ki.records[i].err_sup == doctest::Approx(plain[i - 1]).epsilon(1e-6));
  CHECK(ki.slope >= 1.9);
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 2, 4, 8}, {3, 12, 48, 192}) == doctest::Approx(2.0));
  CHECK(loglog_slope({1, 2, 4}, {1, 0.5, 0.25}) == doctest::Approx(-1.0));
}
