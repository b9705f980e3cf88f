#pragma once

#include <limits>
#include <string>
#include <vector>

#include "vilab/assembly.hpp"
#include "vilab/constraints.hpp"
#include "vilab/mesh.hpp"

namespace vilab {

/// Value returned for the indicator part of a perturbation outside its domain.
inline constexpr double kInfinitePenalty = std::numeric_limits<double>::infinity();

enum class SchemeKind {
  /// i_K + ||u||_Y^alpha / (2 gamma'_n)
  Tikhonov,
  /// (gamma_n / 2) dist(u, K)^2
  MoreauYosida,
  /// (gamma_n / 2) dist(u, K)^2 + i_{V_n}
  GalerkinMY,
  /// (gamma_n / 2) dist(u, K)^2 + ||u||_Y^alpha / (2 gamma'_n)
  TikhonovMY,
};

std::string to_string(SchemeKind kind);

/// Perturbation family R_n, n = 1..n_max. Schedules are indexed by n - 1.
/// The Y-norm is the discrete H1 seminorm; distances use the lumped mass.
struct PerturbationScheme {
  SchemeKind kind = SchemeKind::MoreauYosida;
  std::vector<double> gamma;
  std::vector<double> gamma_prime;
  double alpha = 2.0;
  /// GalerkinMY: V_n is the P1 space of hierarchy[n - 1], nested into the
  /// working mesh.
  std::vector<Mesh> hierarchy;

  static PerturbationScheme tikhonov(std::vector<double> gamma_prime, double alpha = 2.0);
  static PerturbationScheme moreau_yosida(std::vector<double> gamma);
  static PerturbationScheme galerkin_my(std::vector<Mesh> hierarchy, std::vector<double> gamma);
  static PerturbationScheme tikhonov_my(std::vector<double> gamma, std::vector<double> gamma_prime, double alpha = 2.0);

  int n_max() const;
  /// Positive, nondecreasing, last >= 1e3 * first; nested hierarchy.
  void validate() const;
};

/// R_n(u); +inf where an indicator part is violated.
double evaluate_Rn(const NodalVector& u, const PerturbationScheme& scheme, int n, const ConstraintSet& K,
                   const DiscreteOperator& mass, const Mesh& mesh);
/// Lower member of the sandwich (the Moreau-Yosida part, or i_K for Tikhonov).
double evaluate_lower_Rn(const NodalVector& u, const PerturbationScheme& scheme, int n, const ConstraintSet& K,
                         const DiscreteOperator& mass, const Mesh& mesh);
/// Upper member: i_K plus the Tikhonov part, or i_{K cap V_n}.
double evaluate_upper_Rn(const NodalVector& u, const PerturbationScheme& scheme, int n, const ConstraintSet& K,
                         const DiscreteOperator& mass, const Mesh& mesh);

/// (gamma / 2) sum_i m_i (u_i - phi_i)_+^2: the lumped-mass Moreau-Yosida term.
double moreau_yosida_penalty(const NodalVector& u, const ConstraintSet& K, const DiscreteOperator& mass, double gamma);
/// F(u) = 1/2 <A u, u> - <f, u> over the free nodes.
double quadratic_energy(const DiscreteOperator& op, const LoadFunctional& f, const NodalVector& u);

struct PerturbedSolution {
  NodalVector y;
  int iterations = 0;
  /// First-order residual of the smooth problem (VI residual for indicator variants).
  double residual = 0.0;
};

/// argmin F + R_n. Smooth variants use semismooth Newton; Tikhonov goes
/// through the obstacle VI solver. alpha must be 2.
PerturbedSolution minimize_perturbed(const DiscreteOperator& op, const LoadFunctional& f,
                                     const PerturbationScheme& scheme, int n, const ConstraintSet& K,
                                     const Mesh& mesh);

struct GammaRecord {
  int n = 0;
  double gamma = 0.0;
  double gamma_prime = 0.0;
  double h = 0.0;
  /// F(u_n) + R_n(u_n)
  double objective = 0.0;
  double err_energy = 0.0;
  double err_sup = 0.0;
  double err_l2 = 0.0;
  double violation = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

struct GammaStudyReport {
  SchemeKind kind = SchemeKind::MoreauYosida;
  std::vector<GammaRecord> records;
  /// F(y*) at the constrained reference solution.
  double reference_objective = 0.0;
  /// Energy distance at n_max is no larger than at n_max / 2.
  bool converged = false;
};

GammaStudyReport gamma_study(const DiscreteOperator& op, const LoadFunctional& f, const ConstraintSet& K,
                             const PerturbationScheme& scheme, const Mesh& mesh);

struct NoRecoveryRecord {
  int n = 0;
  double h = 0.0;
  /// Lower bound on the mass distance from V_n to K cap closed ball(w, rho).
  double distance = 0.0;
  double gamma = 0.0;
  /// F(y_n) + R_n(y_n) - F(w) for y_n the mass projection of w onto V_n.
  double gap = 0.0;
  double distance_to_w = 0.0;
};

struct NoRecoveryReport {
  std::vector<NoRecoveryRecord> records;
  /// Every level reaches K near w: the density property holds and the demo
  /// has nothing to show.
  bool inapplicable = false;
  std::string note;
};

/// Builds a strictly increasing schedule gamma_n with
/// dist(y, K cap B(w, rho))^2 < 1/gamma_n  =>  y not in V_n
/// and reports the objective gap of the best approximant of w in each V_n.
/// K is a nodal obstacle on `mesh`; every hierarchy level nests into it.
NoRecoveryReport no_recovery_demo(const DiscreteOperator& op, const LoadFunctional& f, const ConstraintSet& K,
                                  const Mesh& mesh, const std::vector<Mesh>& hierarchy, double rho,
                                  const NodalVector& w, double tol = 1e-6);

}  // namespace vilab
