#include "vilab/vi_solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vilab/error.hpp"
#include "vilab/simd.hpp"

namespace vilab {
namespace {

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

/// Free-node obstacle values; +inf for the unconstrained sentinel.
Eigen::VectorXd free_obstacle(const DiscreteOperator& op, const ConstraintSet& K) {
  if (K.mesh_id() != op.mesh_id() && op.mesh_id() != 0) throw MeshMismatch("VI: constraint set and operator meshes differ");
  if (K.as<Unconstrained>())
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(op.size()), std::numeric_limits<double>::infinity());
  const auto* obstacle = K.as<NodalObstacle>();
  if (!obstacle) throw InvalidArgument("solve_obstacle_vi: constraint set must be a nodal obstacle");
  return op.restrict(obstacle->phi);
}

void check_load(const DiscreteOperator& op, const LoadFunctional& f) {
  if (f.values.size() != static_cast<Eigen::Index>(op.size())) throw InvalidArgument("VI: load length mismatch");
  if (op.mesh_id() != 0 && f.mesh_id != op.mesh_id()) throw MeshMismatch("VI: load and operator meshes differ");
}

double residual_free(const Eigen::VectorXd& y, const Eigen::VectorXd& phi, const Eigen::VectorXd& ay_minus_f) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double gap = std::isinf(phi[i]) ? std::numeric_limits<double>::infinity() : phi[i] - y[i];
    r = std::max(r, std::abs(std::min(gap, -ay_minus_f[i])));
  }
  return r;
}

std::vector<int> active_nodes(const DiscreteOperator& op, const Eigen::VectorXd& y, const Eigen::VectorXd& phi) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (!std::isinf(phi[i]) && y[i] >= phi[i]) out.push_back(op.free_nodes()[static_cast<std::size_t>(i)]);
  return out;
}

struct InnerResult {
  Eigen::VectorXd y;
  int iterations = 0;
  bool converged = false;
};

InnerResult primal_dual_active_set(const DiscreteOperator& op, const Eigen::VectorXd& f, const Eigen::VectorXd& phi,
                                   Eigen::VectorXd y, int max_iter) {
  const RowMatrix a = op.matrix();
  const Eigen::Index n = y.size();
  const Eigen::VectorXd diag = op.matrix().diagonal();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  std::vector<char> active(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) active[i] = !std::isinf(phi[i]) && y[i] > phi[i];

  InnerResult res;
  for (int it = 1; it <= max_iter; ++it) {
    res.iterations = it;
    std::vector<int> index(static_cast<std::size_t>(n), -1);
    int m = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!active[i]) index[i] = m++;
    Eigen::VectorXd rhs(m);
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[i]) {
        y[i] = phi[i];
        continue;
      }
      double r = f[i];
      for (RowMatrix::InnerIterator it2(a, i); it2; ++it2) {
        const auto j = it2.col();
        if (active[j])
          r -= it2.value() * phi[j];
        else
          trip.emplace_back(index[i], index[j], it2.value());
      }
      rhs[index[i]] = r;
    }
    if (m > 0) {
      SparseMatrix sub(m, m);
      sub.setFromTriplets(trip.begin(), trip.end());
      const Eigen::VectorXd yi = solve_linear(sub, rhs);
      for (Eigen::Index i = 0; i < n; ++i)
        if (!active[i]) y[i] = yi[index[i]];
    }
    const Eigen::VectorXd ay = a * y;
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      lambda[i] = active[i] ? f[i] - ay[i] : 0.0;
      const bool next = !std::isinf(phi[i]) && lambda[i] + diag[i] * (y[i] - phi[i]) > 0.0;
      if (next != static_cast<bool>(active[i])) changed = true;
      active[i] = next;
    }
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  res.y = std::move(y);
  return res;
}

InnerResult projected_relaxation(const DiscreteOperator& op, const Eigen::VectorXd& f, const Eigen::VectorXd& phi,
                                 Eigen::VectorXd y, double omega, double tol, int max_sweeps) {
  const RowMatrix a = op.matrix();
  const Eigen::Index n = y.size();
  Eigen::VectorXd diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    diag[i] = a.coeff(i, i);
    if (!(diag[i] > 0.0)) throw SolverError("projected relaxation needs a positive diagonal");
    y[i] = std::min(y[i], phi[i]);
  }
  InnerResult res;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    res.iterations = sweep;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = -f[i];
      for (RowMatrix::InnerIterator it(a, i); it; ++it) r += it.value() * y[it.col()];
      y[i] = std::min(phi[i], y[i] - omega * r / diag[i]);
    }
    if (residual_free(y, phi, a * y - f) <= tol) {
      res.converged = true;
      break;
    }
  }
  res.y = std::move(y);
  return res;
}

}  // namespace

std::string to_string(ViMethod m) { return m == ViMethod::ActiveSet ? "active_set" : "projected_relaxation"; }

VISolution solve_obstacle_vi(const DiscreteOperator& op, const LoadFunctional& f, const ConstraintSet& K,
                             const ViOptions& options) {
  check_load(op, f);
  if (!(options.tol > 0.0)) throw InvalidArgument("solve_obstacle_vi: tol must be positive");
  if (!(options.omega > 0.0 && options.omega < 2.0)) throw InvalidArgument("solve_obstacle_vi: omega must lie in (0, 2)");
  const Eigen::VectorXd phi = free_obstacle(op, K);
  VISolution sol;
  sol.method = to_string(options.method);

  if (K.as<Unconstrained>()) {
    sol.y = op.extend(solve_linear(op.matrix(), f.values));
    sol.iterations = 1;
    sol.residual = (op.matrix() * op.restrict(sol.y) - f.values).lpNorm<Eigen::Infinity>();
    return sol;
  }

  Eigen::VectorXd y0 = options.initial ? op.restrict(*options.initial) : Eigen::VectorXd::Zero(phi.size());
  const int n = static_cast<int>(op.size());
  InnerResult inner;
  ViMethod method = options.method;
  if (method == ViMethod::ActiveSet) {
    if (!op.is_m_matrix())
      sol.warnings.push_back("active_set on a non-M-matrix operator: finite termination not guaranteed");
    const int max_iter = options.max_iter > 0 ? options.max_iter : 10 * n;
    inner = primal_dual_active_set(op, f.values, phi, y0, max_iter);
    if (!inner.converged && !op.is_m_matrix()) {
      sol.warnings.push_back("active_set did not settle; fell back to projected relaxation");
      method = ViMethod::ProjectedRelaxation;
      sol.method = to_string(method);
    }
  }
  if (method == ViMethod::ProjectedRelaxation) {
    const int max_sweeps = options.max_iter > 0 ? options.max_iter : 100000;
    inner = projected_relaxation(op, f.values, phi, y0, options.omega, options.tol, max_sweeps);
  }
  const Eigen::VectorXd r = op.matrix() * inner.y - f.values;
  sol.residual = residual_free(inner.y, phi, r);
  sol.iterations = inner.iterations;
  if (!inner.converged || !(sol.residual <= options.tol * (1.0 + f.values.lpNorm<Eigen::Infinity>()))) {
    std::ostringstream msg;
    msg << "solve_obstacle_vi(" << sol.method << "): no convergence after " << inner.iterations
        << " iterations, residual " << sol.residual;
    throw SolverError(msg.str(), inner.iterations, sol.residual);
  }
  sol.y = op.extend(inner.y);
  sol.active_set = active_nodes(op, inner.y, phi);
  return sol;
}

namespace {

/// D may be singular (more midpoints than free nodes), where projected
/// Gauss-Seidel crawls. Once the support of mu has settled, solve the
/// equations on it directly (least squares) and keep the result if it
/// satisfies the complementarity conditions.
bool polish_dual(const Eigen::MatrixXd& d, const Eigen::VectorXd& q, Eigen::VectorXd& mu, Eigen::VectorXd& w,
                 double tol, double& residual) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0) support.push_back(i);
  if (support.empty()) return false;
  const auto k = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd dss(k, k);
  Eigen::VectorXd rhs(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    rhs[a] = -q[support[a]];
    for (Eigen::Index b = 0; b < k; ++b) dss(a, b) = d(support[a], support[b]);
  }
  const Eigen::VectorXd ms = dss.completeOrthogonalDecomposition().solve(rhs);
  if (ms.minCoeff() < -tol) return false;
  Eigen::VectorXd trial = Eigen::VectorXd::Zero(mu.size());
  for (Eigen::Index a = 0; a < k; ++a) trial[support[a]] = std::max(0.0, ms[a]);
  const Eigen::VectorXd wt = q + d * trial;
  double res = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) res = std::max(res, std::abs(std::min(wt[i], trial[i])));
  if (res > tol) return false;
  mu = trial;
  w = wt;
  residual = res;
  return true;
}

}  // namespace

VISolution solve_midpoint_vi(const DiscreteOperator& op, const LoadFunctional& f, const ConstraintSet& K,
                             const Mesh& mesh, const MidpointOptions& options) {
  check_load(op, f);
  const auto* set = K.as<MidpointObstacle>();
  if (!set) throw InvalidArgument("solve_midpoint_vi: constraint set must be a midpoint obstacle");
  if (K.mesh_id() != mesh.id() || op.mesh_id() != mesh.id()) throw MeshMismatch("solve_midpoint_vi: mesh mismatch");

  const auto m = static_cast<Eigen::Index>(mesh.num_elements());
  const auto n = static_cast<Eigen::Index>(op.size());
  const int nv = mesh.vertices_per_element();
  // C maps free values to barycenter values
  std::vector<Eigen::Triplet<double>> trip;
  const auto els = mesh.elements();
  for (Eigen::Index e = 0; e < m; ++e)
    for (int k = 0; k < nv; ++k) {
      const int j = op.free_index(els[static_cast<std::size_t>(e)][k]);
      if (j >= 0) trip.emplace_back(e, j, 1.0 / nv);
    }
  SparseMatrix c(m, n);
  c.setFromTriplets(trip.begin(), trip.end());

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu(op.matrix());
  if (lu.info() != Eigen::Success) throw SolverError("solve_midpoint_vi: singular operator");
  const Eigen::MatrixXd ct = Eigen::MatrixXd(c.transpose());
  const Eigen::MatrixXd ainv_ct = lu.solve(ct);
  const Eigen::MatrixXd d = c * ainv_ct;
  const Eigen::VectorXd y_free = lu.solve(f.values);
  const Eigen::VectorXd q = set->phi - c * y_free;

  // LCP: mu >= 0, w = q + D mu >= 0, mu . w = 0
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd w = q;
  VISolution sol;
  sol.method = "midpoint_dual_gauss_seidel";
  const double scale = 1.0 + q.lpNorm<Eigen::Infinity>();
  bool converged = false;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    sol.iterations = sweep;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!(d(i, i) > 0.0)) continue;
      const double next = std::max(0.0, mu[i] - w[i] / d(i, i));
      const double delta = next - mu[i];
      if (delta != 0.0) {
        w.noalias() += delta * d.col(i);
        mu[i] = next;
      }
    }
    if (sweep % 8 == 0 || sweep == 1) {
      w = q + d * mu;  // refresh to shed accumulated rounding
      double res = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) res = std::max(res, std::abs(std::min(w[i], mu[i])));
      sol.residual = res;
      if (res <= options.tol * scale) {
        converged = true;
        break;
      }
      if (res <= 1e-4 * scale && polish_dual(d, q, mu, w, options.tol * scale, sol.residual)) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "solve_midpoint_vi: no convergence after " << sol.iterations << " sweeps, residual " << sol.residual;
    throw SolverError(msg.str(), sol.iterations, sol.residual);
  }
  const Eigen::VectorXd y = y_free - ainv_ct * mu;
  sol.y = op.extend(y);
  const Eigen::VectorXd mid = c * y;
  for (Eigen::Index e = 0; e < m; ++e)
    if (mu[e] > 0.0 || mid[e] >= set->phi[e] - options.tol * scale) sol.active_set.push_back(static_cast<int>(e));
  return sol;
}

namespace {

/// Gradient of the element norm and an optional curvature matrix (p = 2, 2D).
struct NormDerivative {
  double r = 0.0;
  Point grad{0.0, 0.0};
  std::array<double, 4> curvature{0.0, 0.0, 0.0, 0.0};
};

NormDerivative norm_derivative(const Point& g, int dim, double p) {
  NormDerivative out;
  out.r = lp_norm(g, dim, p);
  if (out.r == 0.0) return out;
  const auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
  if (dim == 1 || p == 1.0) {
    out.grad = {sgn(g[0]), dim == 1 ? 0.0 : sgn(g[1])};
  } else if (std::isinf(p)) {
    const int k = std::abs(g[0]) >= std::abs(g[1]) ? 0 : 1;
    out.grad[k] = sgn(g[k]);
  } else if (p == 2.0) {
    out.grad = {g[0] / out.r, g[1] / out.r};
    out.curvature = {(1.0 - out.grad[0] * out.grad[0]) / out.r, -out.grad[0] * out.grad[1] / out.r,
                     -out.grad[0] * out.grad[1] / out.r, (1.0 - out.grad[1] * out.grad[1]) / out.r};
  } else {
    for (int k = 0; k < 2; ++k) out.grad[k] = sgn(g[k]) * std::pow(std::abs(g[k]) / out.r, p - 1.0);
  }
  return out;
}

struct PenaltyModel {
  const DiscreteOperator& op;
  const LoadFunctional& f;
  const GradientBound& set;
  const Mesh& mesh;
  // per element: free indices of the vertices (-1 on the boundary)
  std::vector<std::array<int, 3>> dofs;

  PenaltyModel(const DiscreteOperator& o, const LoadFunctional& l, const GradientBound& s, const Mesh& m)
      : op(o), f(l), set(s), mesh(m) {
    const auto els = mesh.elements();
    dofs.resize(els.size());
    for (std::size_t e = 0; e < els.size(); ++e)
      for (int k = 0; k < 3; ++k) dofs[e][k] = k < mesh.vertices_per_element() ? op.free_index(els[e][k]) : -1;
  }

  Point element_gradient(std::size_t e, const Eigen::VectorXd& y) const {
    Point g{0.0, 0.0};
    const auto& bg = mesh.basis_gradients(e);
    for (int k = 0; k < mesh.vertices_per_element(); ++k) {
      if (dofs[e][k] < 0) continue;
      g[0] += y[dofs[e][k]] * bg[k][0];
      g[1] += y[dofs[e][k]] * bg[k][1];
    }
    return g;
  }

  double energy(const Eigen::VectorXd& y, double gamma) const {
    double j = 0.5 * y.dot(op.matrix() * y) - f.values.dot(y);
    for (std::size_t e = 0; e < dofs.size(); ++e) {
      const double excess = lp_norm(element_gradient(e, y), mesh.dim(), set.p) - set.alpha[static_cast<Eigen::Index>(e)];
      if (excess > 0.0) j += 0.5 * gamma * mesh.measure(e) * excess * excess;
    }
    return j;
  }

  double violation(const Eigen::VectorXd& y) const {
    double v = 0.0;
    for (std::size_t e = 0; e < dofs.size(); ++e)
      v = std::max(v, lp_norm(element_gradient(e, y), mesh.dim(), set.p) - set.alpha[static_cast<Eigen::Index>(e)]);
    return v;
  }

  /// Gradient and generalized Hessian of the penalized energy.
  void linearize(const Eigen::VectorXd& y, double gamma, Eigen::VectorXd& grad, SparseMatrix& hess) const {
    const Eigen::VectorXd ay = op.matrix() * y;
    grad = ay - f.values;
    std::vector<Eigen::Triplet<double>> trip;
    const int nv = mesh.vertices_per_element();
    const int dim = mesh.dim();
    for (std::size_t e = 0; e < dofs.size(); ++e) {
      const Point g = element_gradient(e, y);
      const NormDerivative nd = norm_derivative(g, dim, set.p);
      const double excess = nd.r - set.alpha[static_cast<Eigen::Index>(e)];
      if (excess <= 0.0) continue;
      const double w = gamma * mesh.measure(e);
      const auto& bg = mesh.basis_gradients(e);
      std::array<double, 3> dr{};  // d r / d y_k
      for (int k = 0; k < nv; ++k) dr[k] = nd.grad[0] * bg[k][0] + (dim == 2 ? nd.grad[1] * bg[k][1] : 0.0);
      for (int k = 0; k < nv; ++k) {
        if (dofs[e][k] < 0) continue;
        grad[dofs[e][k]] += w * excess * dr[k];
        for (int l = 0; l < nv; ++l) {
          if (dofs[e][l] < 0) continue;
          double h = dr[k] * dr[l];
          if (dim == 2) {
            const auto& cm = nd.curvature;
            h += excess * (bg[k][0] * (cm[0] * bg[l][0] + cm[1] * bg[l][1]) +
                           bg[k][1] * (cm[2] * bg[l][0] + cm[3] * bg[l][1]));
          }
          trip.emplace_back(dofs[e][k], dofs[e][l], w * h);
        }
      }
    }
    SparseMatrix pen(op.matrix().rows(), op.matrix().cols());
    pen.setFromTriplets(trip.begin(), trip.end());
    hess = op.symmetric_part() + pen;
  }
};

}  // namespace

GradientVISolution solve_gradient_vi(const DiscreteOperator& op, const LoadFunctional& f, const ConstraintSet& K,
                                     const Mesh& mesh, const GradientOptions& options) {
  check_load(op, f);
  const auto* set = K.as<GradientBound>();
  if (!set) throw InvalidArgument("solve_gradient_vi: constraint set must be a gradient bound");
  if (K.mesh_id() != mesh.id() || op.mesh_id() != mesh.id()) throw MeshMismatch("solve_gradient_vi: mesh mismatch");
  if (!op.symmetric()) throw PreconditionError("solve_gradient_vi: operator must be symmetric (energy formulation)");
  if (set->alpha.minCoeff() <= 0.0) throw PreconditionError("solve_gradient_vi: alpha must be positive");
  if (options.gamma_schedule.empty()) throw InvalidArgument("solve_gradient_vi: empty gamma schedule");
  for (std::size_t k = 0; k < options.gamma_schedule.size(); ++k) {
    if (!(options.gamma_schedule[k] > 0.0) || (k > 0 && !(options.gamma_schedule[k] > options.gamma_schedule[k - 1])))
      throw InvalidArgument("solve_gradient_vi: gamma schedule must be positive and increasing");
  }

  const PenaltyModel model(op, f, *set, mesh);
  GradientVISolution sol;
  sol.method = "gradient_penalty_newton";
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(op.size()));
  const double fscale = 1.0 + f.values.lpNorm<Eigen::Infinity>();
  Eigen::VectorXd grad;
  SparseMatrix hess;
  for (double gamma : options.gamma_schedule) {
    int newton = 0;
    bool converged = false;
    for (; newton < options.max_newton; ++newton) {
      model.linearize(y, gamma, grad, hess);
      const double gnorm = grad.lpNorm<Eigen::Infinity>();
      if (gnorm <= options.tol * fscale) {
        converged = true;
        break;
      }
      const Eigen::VectorXd step = solve_linear(hess, -grad);
      // at large gamma the gradient bottoms out at rounding level ~ eps |H| |y|,
      // but a negligible Newton step still certifies convergence
      if (step.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + y.lpNorm<Eigen::Infinity>())) {
        converged = true;
        break;
      }
      const double j0 = model.energy(y, gamma);
      const double slope = grad.dot(step);
      double t = 1.0;
      bool accepted = false;
      for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
        const Eigen::VectorXd trial = y + t * step;
        if (model.energy(trial, gamma) <= j0 + 1e-4 * t * slope) {
          y = trial;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // energy can no longer decrease in floating point; accept if the gradient is tiny
        if (gnorm <= 1e3 * options.tol * fscale) {
          converged = true;
          break;
        }
        std::ostringstream msg;
        msg << "solve_gradient_vi: Newton stagnated at gamma " << gamma << " after " << newton
            << " steps, gradient norm " << gnorm;
        throw SolverError(msg.str(), sol.iterations + newton, gnorm);
      }
    }
    if (!converged) {
      model.linearize(y, gamma, grad, hess);
      std::ostringstream msg;
      msg << "solve_gradient_vi: Newton did not converge at gamma " << gamma;
      throw SolverError(msg.str(), sol.iterations + newton, grad.lpNorm<Eigen::Infinity>());
    }
    sol.iterations += newton;
    sol.path.push_back({gamma, model.violation(y), newton});
  }
  sol.y = op.extend(y);
  sol.residual = std::max(0.0, model.violation(y));
  for (std::size_t e = 0; e < model.dofs.size(); ++e)
    if (lp_norm(model.element_gradient(e, y), mesh.dim(), set->p) > set->alpha[static_cast<Eigen::Index>(e)])
      sol.active_set.push_back(static_cast<int>(e));
  return sol;
}

VISolution solve_vi(const DiscreteOperator& op, const LoadFunctional& f, const ConstraintSet& K, const Mesh& mesh) {
  if (K.as<MidpointObstacle>()) return solve_midpoint_vi(op, f, K, mesh);
  if (K.as<GradientBound>()) return solve_gradient_vi(op, f, K, mesh);
  if (K.mesh_id() != mesh.id()) throw MeshMismatch("solve_vi: constraint set belongs to another mesh");
  return solve_obstacle_vi(op, f, K);
}

NodalVector solution_map(const LoadFunctional& f, const ConstraintSet& K, const DiscreteOperator& op, const Mesh& mesh) {
  return solve_vi(op, f, K, mesh).y;
}

ComplementarityResidual complementarity_residual(const NodalVector& y, const DiscreteOperator& op,
                                                 const LoadFunctional& f, const ConstraintSet& K,
                                                 double feasibility_tol) {
  check_load(op, f);
  const Eigen::VectorXd phi = free_obstacle(op, K);
  const Eigen::VectorXd yf = op.restrict(y);
  ComplementarityResidual out;
  out.value = residual_free(yf, phi, op.matrix() * yf - f.values);
  if (!K.as<Unconstrained>()) out.feasible = simd::max_excess(as_span(yf), as_span(phi)) <= feasibility_tol;
  return out;
}

}  // namespace vilab
