#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "vilab/assembly.hpp"
#include "vilab/constraints.hpp"
#include "vilab/mesh.hpp"
#include "vilab/nodal.hpp"

namespace testing {

using namespace vilab;

inline ScalarField constant(double c) {
  return [c](const Point&) { return c; };
}

/// -u'' = load on (0,1) with a constant obstacle.
struct Contact1D {
  Mesh mesh;
  DiscreteOperator op;
  LoadFunctional f;
  ConstraintSet K;

  Contact1D(int n, double load, double phi)
      : mesh(build_interval_mesh(n, 0.0, 1.0)),
        op(assemble_operator(mesh, {})),
        f(assemble_load(mesh, constant(load))),
        K(ConstraintSet::nodal(mesh, NodalVector(mesh, phi))) {}
};

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

/// Free-node obstacle values of a nodal constraint.
inline Eigen::VectorXd free_obstacle(const DiscreteOperator& op, const ConstraintSet& K) {
  return op.restrict(K.as<NodalObstacle>()->phi);
}

/// Projected gradient on 1/2 y'Ay - f'y over y <= phi with a dense matrix.
/// Slow and plain on purpose: it shares no code with the library solvers.
inline Eigen::VectorXd projected_gradient(const Eigen::MatrixXd& A, const Eigen::VectorXd& f, const Eigen::VectorXd& phi,
                                          int max_iter = 2000000, double tol = 1e-13) {
  const Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S).eigenvalues().maxCoeff();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(f.size()).cwiseMin(phi);
  for (int k = 0; k < max_iter; ++k) {
    const Eigen::VectorXd next = (y - (A * y - f) / L).cwiseMin(phi);
    const double step = (next - y).cwiseAbs().maxCoeff();
    y = next;
    if (step < tol) break;
  }
  return y;
}

}  // namespace testing
