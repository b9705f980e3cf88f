#include "vilab/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "vilab/error.hpp"
#include "vilab/simd.hpp"

namespace vilab {
namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void check_nu(double nu) {
  if (!(nu >= 0.0)) throw InvalidArgument("constraint set: nu must be nonnegative");
}

}  // namespace

ConstraintSet ConstraintSet::nodal(const Mesh& mesh, NodalVector phi, bool require_zero_feasible, double nu) {
  require_on_mesh(phi, mesh, "ConstraintSet::nodal");
  check_nu(nu);
  if (require_zero_feasible && phi.values().minCoeff() < 0.0)
    throw InvalidArgument("ConstraintSet::nodal: phi must be >= 0 so that 0 is feasible");
  return ConstraintSet(NodalObstacle{std::move(phi)}, mesh.id(), nu);
}

ConstraintSet ConstraintSet::midpoint(const Mesh& mesh, Eigen::VectorXd phi, bool require_zero_feasible, double nu) {
  if (phi.size() != static_cast<Eigen::Index>(mesh.num_elements()))
    throw InvalidArgument("ConstraintSet::midpoint: need one value per element");
  check_nu(nu);
  if (require_zero_feasible && phi.minCoeff() < 0.0)
    throw InvalidArgument("ConstraintSet::midpoint: phi must be >= 0 so that 0 is feasible");
  return ConstraintSet(MidpointObstacle{std::move(phi)}, mesh.id(), nu);
}

ConstraintSet ConstraintSet::gradient(const Mesh& mesh, Eigen::VectorXd alpha, double p, double nu) {
  if (alpha.size() != static_cast<Eigen::Index>(mesh.num_elements()))
    throw InvalidArgument("ConstraintSet::gradient: need one alpha per element");
  if (!(p >= 1.0)) throw InvalidArgument("ConstraintSet::gradient: p must lie in [1, inf]");
  check_nu(nu);
  if (alpha.minCoeff() < 0.0) throw InvalidArgument("ConstraintSet::gradient: alpha must be nonnegative");
  if (nu > 0.0 && alpha.minCoeff() < nu) throw InvalidArgument("ConstraintSet::gradient: alpha must be >= nu");
  return ConstraintSet(GradientBound{std::move(alpha), p}, mesh.id(), nu);
}

ConstraintSet ConstraintSet::unbounded(const Mesh& mesh) { return ConstraintSet(Unconstrained{}, mesh.id(), 0.0); }

double lp_norm(const Point& g, int dim, double p) {
  if (dim == 1) return std::abs(g[0]);
  const double a = std::abs(g[0]), b = std::abs(g[1]);
  if (std::isinf(p)) return std::max(a, b);
  if (p == 1.0) return a + b;
  if (p == 2.0) return std::hypot(a, b);
  const double m = std::max(a, b);
  if (m == 0.0) return 0.0;
  return m * std::pow(std::pow(a / m, p) + std::pow(b / m, p), 1.0 / p);
}

double constraint_violation(const NodalVector& v, const ConstraintSet& K, const Mesh& mesh) {
  require_on_mesh(v, mesh, "constraint_violation");
  if (K.mesh_id() != mesh.id()) throw MeshMismatch("constraint_violation: set belongs to another mesh");
  return std::visit(
      [&](const auto& set) -> double {
        using T = std::decay_t<decltype(set)>;
        if constexpr (std::is_same_v<T, NodalObstacle>) {
          return std::max(0.0, simd::max_excess(v.span(), set.phi.span()));
        } else if constexpr (std::is_same_v<T, MidpointObstacle>) {
          const Eigen::VectorXd mid = midpoint_values(v, mesh);
          return std::max(0.0, simd::max_excess(as_span(mid), as_span(set.phi)));
        } else if constexpr (std::is_same_v<T, GradientBound>) {
          const auto grads = element_gradients(v, mesh);
          double worst = 0.0;
          for (std::size_t e = 0; e < grads.size(); ++e)
            worst = std::max(worst, lp_norm(grads[e], mesh.dim(), set.p) - set.alpha[static_cast<Eigen::Index>(e)]);
          return worst;
        } else {
          return 0.0;
        }
      },
      K.variant());
}

bool is_feasible(const NodalVector& v, const ConstraintSet& K, const Mesh& mesh, double tol) {
  if (!(tol >= 0.0)) throw InvalidArgument("is_feasible: tol must be nonnegative");
  return constraint_violation(v, K, mesh) <= tol;
}

NodalVector pos_part(const NodalVector& v) {
  NodalVector out = v;
  simd::pos_part(v.span(), out.span());
  return out;
}

NodalVector sup(const NodalVector& v, const NodalVector& w) {
  require_same_mesh(v, w, "sup");
  NodalVector out = v;
  simd::vmax(v.span(), w.span(), out.span());
  return out;
}

NodalVector inf(const NodalVector& v, const NodalVector& w) {
  require_same_mesh(v, w, "inf");
  NodalVector out = v;
  simd::vmin(v.span(), w.span(), out.span());
  return out;
}

double scale_factor(std::span<const double> phi, std::span<const double> phi_n, double nu) {
  if (!(nu > 0.0)) throw InvalidArgument("scale_recovery: nu must be positive");
  return 1.0 / (1.0 + simd::max_abs_diff(phi_n, phi) / nu);
}

NodalVector scale_recovery(const NodalVector& w, std::span<const double> phi, std::span<const double> phi_n, double nu) {
  const double beta = scale_factor(phi, phi_n, nu);
  NodalVector out = w;
  out.values() *= beta;
  return out;
}

NodalVector truncation_recovery(const NodalVector& w, double shift) {
  if (!(shift >= 0.0)) throw InvalidArgument("truncation_recovery: shift must be nonnegative");
  NodalVector out = w;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = std::abs(w[i]);
    out[i] = a == 0.0 ? 0.0 : std::copysign(std::max(a - shift, 0.0), w[i]);
  }
  return out;
}

SingularPerturbationResult singular_perturbation_recovery(const NodalVector& w, const NodalVector& phi_n,
                                                          const DiscreteOperator& Q, const DiscreteOperator& mass) {
  require_same_mesh(w, phi_n, "singular_perturbation_recovery");
  if (Q.mesh_id() != w.mesh_id() || mass.mesh_id() != w.mesh_id())
    throw MeshMismatch("singular_perturbation_recovery: operators belong to another mesh");
  if (mass.size() != Q.size()) throw InvalidArgument("singular_perturbation_recovery: mass and Q sizes differ");
  if (!Q.is_m_matrix()) throw PreconditionError("singular_perturbation_recovery: Q must be a coercive M-matrix");

  const Eigen::VectorXd q_phi = Q.apply_full(phi_n);
  const double scale = q_phi.lpNorm<Eigen::Infinity>();
  if (q_phi.size() > 0 && q_phi.minCoeff() < -1e-10 * scale) {
    std::ostringstream msg;
    msg << "singular_perturbation_recovery: hypothesis Q phi_n >= 0 violated (min entry " << q_phi.minCoeff() << ")";
    throw PreconditionError(msg.str());
  }
  for (std::size_t i = 0; i < phi_n.size(); ++i) {
    if (Q.free_index(static_cast<int>(i)) < 0 && phi_n[i] < 0.0)
      throw PreconditionError("singular_perturbation_recovery: phi_n must be >= 0 on the Dirichlet boundary");
  }

  const NodalVector w_tilde = inf(w, phi_n);
  const Eigen::VectorXd wt = Q.restrict(w_tilde);
  const Eigen::VectorXd diff = wt - Q.restrict(w);
  const double r = std::sqrt(std::max(0.0, diff.dot(mass.matrix() * diff)));

  SingularPerturbationResult result{w, r};
  if (r == 0.0) return result;
  const SparseMatrix system = r * Q.matrix() + mass.matrix();
  const Eigen::VectorXd rhs = mass.matrix() * wt;
  result.w = Q.extend(solve_linear(system, rhs));
  const double excess = simd::max_excess(result.w.span(), phi_n.span());
  if (excess > 1e-9) {
    std::ostringstream msg;
    msg << "singular_perturbation_recovery: output exceeds phi_n by " << excess;
    throw SolverError(msg.str());
  }
  return result;
}

void RecoveryTrace::push(RecoveryStep step) {
  if (!steps_.empty() && step.n <= steps_.back().n) throw InvalidArgument("RecoveryTrace: n must increase strictly");
  steps_.push_back(step);
}

bool RecoveryTrace::all_feasible() const {
  return std::all_of(steps_.begin(), steps_.end(), [](const RecoveryStep& s) { return s.feasible; });
}

}  // namespace vilab
