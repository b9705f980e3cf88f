#pragma once

#include <Eigen/Core>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "vilab/assembly.hpp"
#include "vilab/mesh.hpp"
#include "vilab/nodal.hpp"

namespace vilab {

inline constexpr double kFeasibilityTol = 1e-9;

/// {w : w(x) <= phi(x) at every node}
struct NodalObstacle {
  NodalVector phi;
};

/// {w : w(x_T) <= phi_T at every element barycenter}
struct MidpointObstacle {
  Eigen::VectorXd phi;
};

/// {w : |grad w|_T|_p <= alpha_T on every element}; p may be +inf.
struct GradientBound {
  Eigen::VectorXd alpha;
  double p = 2.0;
};

/// Reserved "no constraint" marker (phi = +inf), not a large float.
struct Unconstrained {};

/// Discrete admissible set over one mesh.
class ConstraintSet {
 public:
  using Variant = std::variant<NodalObstacle, MidpointObstacle, GradientBound, Unconstrained>;

  /// `require_zero_feasible` checks phi >= 0 so that 0 belongs to the set.
  static ConstraintSet nodal(const Mesh& mesh, NodalVector phi, bool require_zero_feasible = false, double nu = 0.0);
  static ConstraintSet midpoint(const Mesh& mesh, Eigen::VectorXd phi, bool require_zero_feasible = false,
                                double nu = 0.0);
  /// With nu > 0, every alpha_T must be >= nu.
  static ConstraintSet gradient(const Mesh& mesh, Eigen::VectorXd alpha, double p, double nu = 0.0);
  static ConstraintSet unbounded(const Mesh& mesh);

  const Variant& variant() const { return variant_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&variant_);
  }
  std::uint64_t mesh_id() const { return mesh_id_; }
  double lower_bound_nu() const { return nu_; }

 private:
  ConstraintSet(Variant v, std::uint64_t mesh_id, double nu) : variant_(std::move(v)), mesh_id_(mesh_id), nu_(nu) {}

  Variant variant_;
  std::uint64_t mesh_id_;
  double nu_;
};

/// Largest amount by which v violates K (0 when feasible).
double constraint_violation(const NodalVector& v, const ConstraintSet& K, const Mesh& mesh);
bool is_feasible(const NodalVector& v, const ConstraintSet& K, const Mesh& mesh, double tol = kFeasibilityTol);

/// ell^p norm of a dim-vector, p in [1, inf].
double lp_norm(const Point& g, int dim, double p);

NodalVector pos_part(const NodalVector& v);
NodalVector sup(const NodalVector& v, const NodalVector& w);
NodalVector inf(const NodalVector& v, const NodalVector& w);

/// beta = (1 + ||phi_n - phi||_inf / nu)^{-1}
double scale_factor(std::span<const double> phi, std::span<const double> phi_n, double nu);

/// beta * w with the factor above; feasible for the phi_n gradient set when
/// phi_n >= nu.
NodalVector scale_recovery(const NodalVector& w, std::span<const double> phi, std::span<const double> phi_n, double nu);

/// Nodewise sign(w) * max(|w| - shift, 0).
NodalVector truncation_recovery(const NodalVector& w, double shift);

struct SingularPerturbationResult {
  NodalVector w;
  /// r_n = ||min(w, phi_n) - w||_H
  double r = 0.0;
};

/// Solves (r Q + M) w_n = M min(w, phi_n) with r = ||min(w, phi_n) - w||_M.
/// Checks Q phi_n >= 0 beforehand and w_n <= phi_n afterwards.
SingularPerturbationResult singular_perturbation_recovery(const NodalVector& w, const NodalVector& phi_n,
                                                          const DiscreteOperator& Q, const DiscreteOperator& mass);

struct RecoveryStep {
  int n = 0;
  double distance = 0.0;
  bool feasible = false;
};

/// Distances of a recovery sequence to its target; n strictly increasing.
class RecoveryTrace {
 public:
  void push(RecoveryStep step);
  const std::vector<RecoveryStep>& steps() const { return steps_; }
  bool all_feasible() const;

 private:
  std::vector<RecoveryStep> steps_;
};

}  // namespace vilab
