#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vilab/assembly.hpp"
#include "vilab/constraints.hpp"
#include "vilab/mesh.hpp"

namespace vilab {

/// n -> K_n (n = 1..size()) together with the limit set; all on one mesh.
struct SetSequence {
  ConstraintSet limit;
  std::function<ConstraintSet(int n)> generator;
  /// delta_n, the size of the perturbation at step n.
  std::vector<double> delta;
  std::string descriptor;

  int size() const { return static_cast<int>(delta.size()); }
  ConstraintSet at(int n) const { return generator(n); }
  /// The data (phi_n or alpha_n) of K_n, for distances to the limit data.
  Eigen::VectorXd data(int n) const;
  Eigen::VectorXd limit_data() const;

  /// phi_n = phi + delta_n g (nodal obstacles).
  static SetSequence shifted_obstacle(const Mesh& mesh, const NodalVector& phi, const NodalVector& g,
                                      std::vector<double> delta);
  /// alpha_n = alpha + delta_n g (gradient bounds), with lower bound nu.
  static SetSequence shifted_gradient(const Mesh& mesh, const Eigen::VectorXd& alpha, const Eigen::VectorXd& g,
                                      double p, std::vector<double> delta, double nu = 0.0);
  static SetSequence constant(const ConstraintSet& K, int n_max);
};

/// delta_n = 2^{-n}, n = 1..n_max
std::vector<double> dyadic_schedule(int n_max);

struct MoscoRecord {
  int n = 0;
  double h = 0.0;
  double delta = 0.0;
  /// ||phi_n - phi||_inf over the constraint data.
  double data_distance = 0.0;
  double err_sup = 0.0;
  double err_l2 = 0.0;
  double err_energy = 0.0;
  /// Violation of the limit set by y_n.
  double violation = 0.0;
  bool feasible = true;
  int iterations = 0;
  double residual = 0.0;
  /// Solver failure message; errors are then NaN.
  std::string error;
};

struct MoscoReport {
  /// n = 0 holds the limit problem; the rest strictly increasing.
  std::vector<MoscoRecord> records;
  /// Sup error dropped by >= 10x from the first to the last perturbed record.
  bool converged = false;
  /// Least-squares slope of log err_sup against log delta (or log h).
  double slope = 0.0;
  /// Extrapolated violation of the limit set at delta = 0 (surrogate for
  /// feasibility of weak limits).
  double limit_violation = 0.0;
  bool limit_feasible = false;
};

/// Solves the limit problem once and each perturbed problem once.
/// `loads` (optional) gives f_n per n; otherwise f is used throughout.
MoscoReport mosco_study(const DiscreteOperator& op, const LoadFunctional& f, const SetSequence& seq, const Mesh& mesh,
                        const std::vector<LoadFunctional>& loads = {});

enum class RecoveryConstruction { Scale, Truncate, SingularPerturbation };
std::string to_string(RecoveryConstruction c);

struct RecoveryContext {
  /// Distances are measured in this operator's energy norm.
  const DiscreteOperator* energy = nullptr;
  /// Q for the singular perturbation (with its lumped mass).
  const DiscreteOperator* q = nullptr;
  const DiscreteOperator* mass = nullptr;
  /// Lower bound nu for the scale construction.
  double nu = 0.0;
};

struct RecoveryReport {
  RecoveryTrace trace;
  /// Per-n precondition failures (empty when all preconditions held).
  std::vector<std::string> failures;
  /// Last distance <= first / 10.
  bool converged = false;
};

/// Builds w_n in K_n by the given construction and records ||w_n - w||.
RecoveryReport recovery_study(const NodalVector& w, const SetSequence& seq, RecoveryConstruction construction,
                              const Mesh& mesh, const RecoveryContext& ctx);

enum class FemConstraint { K1Midpoint, K2Nodal, KiGradient };
std::string to_string(FemConstraint c);

/// Continuous data of a VI, discretized afresh on every mesh level.
struct ContinuumProblem {
  Coefficients coefficients;
  ScalarField load;
  /// Obstacle for K1/K2.
  ScalarField obstacle;
  /// Gradient bound alpha(x) for Ki, and its exponent.
  ScalarField alpha;
  double p = 2.0;
};

/// Solves the VI on each nested level with that level's discrete set. The
/// reference is one uniform refinement beyond the last level.
MoscoReport fem_constraint_study(const ContinuumProblem& problem, FemConstraint constraint,
                                 const std::vector<Mesh>& hierarchy);

/// Least-squares slope of log y against log x over the positive pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace vilab
