#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vilab/assembly.hpp"
#include "vilab/constraints.hpp"

namespace vilab {

enum class ViMethod {
  /// primal-dual active set (semismooth Newton on min(phi - y, f - A y) = 0)
  ActiveSet,
  /// projected Gauss-Seidel / SOR
  ProjectedRelaxation,
};

std::string to_string(ViMethod m);

struct ViOptions {
  ViMethod method = ViMethod::ActiveSet;
  double tol = 1e-10;
  /// 0 selects the default: 10 * #free for active set, 1e5 sweeps for relaxation.
  int max_iter = 0;
  double omega = 1.5;
  std::optional<NodalVector> initial;
};

/// Solution of the discrete VI  y in K : <A y - f, v - y> >= 0 for all v in K.
struct VISolution {
  NodalVector y;
  /// Node indices (obstacle sets) or element indices (midpoint/gradient sets)
  /// where the constraint is attained.
  std::vector<int> active_set;
  int iterations = 0;
  double residual = 0.0;
  std::string method;
  std::vector<std::string> warnings;
};

/// Upper-obstacle VI over a NodalObstacle (or the Unconstrained sentinel).
/// Throws SolverError when max_iter is exceeded.
VISolution solve_obstacle_vi(const DiscreteOperator& op, const LoadFunctional& f, const ConstraintSet& K,
                             const ViOptions& options = {});

struct MidpointOptions {
  double tol = 1e-10;
  int max_sweeps = 200000;
};

/// VI over a MidpointObstacle, solved through its dual complementarity
/// problem by projected Gauss-Seidel on the multipliers.
VISolution solve_midpoint_vi(const DiscreteOperator& op, const LoadFunctional& f, const ConstraintSet& K,
                             const Mesh& mesh, const MidpointOptions& options = {});

struct GradientOptions {
  /// Increasing penalty parameters; the last one decides the accuracy.
  std::vector<double> gamma_schedule = {1e2, 1e3, 1e4, 1e5, 1e6, 1e7};
  double tol = 1e-10;
  int max_newton = 200;
};

struct GradientStep {
  double gamma = 0.0;
  double violation = 0.0;
  int newton_iterations = 0;
};

struct GradientVISolution : VISolution {
  std::vector<GradientStep> path;
};

/// Gradient-bound VI by penalty path-following with damped Newton.
GradientVISolution solve_gradient_vi(const DiscreteOperator& op, const LoadFunctional& f, const ConstraintSet& K,
                                     const Mesh& mesh, const GradientOptions& options = {});

/// Dispatches on the constraint kind with default options.
VISolution solve_vi(const DiscreteOperator& op, const LoadFunctional& f, const ConstraintSet& K, const Mesh& mesh);

/// S(f, K): dispatches on the constraint kind. Deterministic.
NodalVector solution_map(const LoadFunctional& f, const ConstraintSet& K, const DiscreteOperator& op, const Mesh& mesh);

struct ComplementarityResidual {
  double value = 0.0;
  bool feasible = true;
};

/// max_i |min(phi_i - y_i, -(A y - f)_i)| over free nodes; zero exactly at the
/// VI solution. `feasible` flags y <= phi.
ComplementarityResidual complementarity_residual(const NodalVector& y, const DiscreteOperator& op,
                                                 const LoadFunctional& f, const ConstraintSet& K,
                                                 double feasibility_tol = kFeasibilityTol);

}  // namespace vilab
