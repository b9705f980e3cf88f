#include "vilab/qvi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "vilab/error.hpp"
#include "vilab/parallel.hpp"
#include "vilab/simd.hpp"
#include "vilab/vi_solver.hpp"

namespace vilab {
namespace {

Eigen::VectorXd free_mass(const DiscreteOperator& op, const Mesh& mesh) {
  return op.restrict(NodalVector(mesh.id(), lumped_mass_diagonal(mesh)));
}

SparseMatrix compliant_matrix(const Compliant& c, const Eigen::VectorXd& m) {
  SparseMatrix k = c.B->matrix();
  for (Eigen::Index i = 0; i < m.size(); ++i) k.coeffRef(i, i) += c.g1 * c.l1 * m[i];
  return k;
}

NodalVector eval_superposition(const Superposition& s, const NodalVector& v) {
  NodalVector out = v;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = s.nu + s.c * std::pow(std::max(0.0, v[i]), 1.0 / s.p);
  return out;
}

NodalVector eval_compliant(const Compliant& c, const NodalVector& v, const Mesh& mesh) {
  const DiscreteOperator& b = *c.B;
  const Eigen::VectorXd m = free_mass(b, mesh);
  const Eigen::VectorXd vf = b.restrict(v);
  Eigen::VectorXd rhs = c.g.values;
  for (Eigen::Index i = 0; i < rhs.size(); ++i) rhs[i] -= m[i] * (c.g1 * c.l0 - c.g2 * std::min(vf[i], c.cap));
  const NodalVector z = b.extend(solve_linear(compliant_matrix(c, m), rhs));
  NodalVector out = z;
  out.values() = (c.l0 + c.l1 * z.values().array()).matrix();
  const double low = out.values().minCoeff();
  if (low < c.nu - 1e-12 * (1.0 + std::abs(c.nu))) {
    std::ostringstream msg;
    msg << "compliant obstacle: Phi(v) >= nu violated (min " << low << " < nu " << c.nu << ")";
    throw PreconditionError(msg.str());
  }
  return out;
}

NodalVector eval_impulse(const Impulse& imp, const NodalVector& v, const Mesh& mesh) {
  if (mesh.dim() != 1) throw InvalidArgument("impulse obstacle: only 1D meshes are supported");
  const auto nodes = mesh.nodes();
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nodes[a][0] < nodes[b][0]; });
  const double x_last = nodes[order.back()][0];
  NodalVector out = v;
  for (std::size_t a = 0; a < order.size(); ++a) {
    const std::size_t i = order[a];
    const double xi = nodes[i][0];
    // shifts in increasing order; strict < keeps the smallest shift on ties
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = a; b < order.size(); ++b) {
      const std::size_t j = order[b];
      const double cand = v[j] + imp.k0 + imp.c_lin * (nodes[j][0] - xi);
      if (cand < best) best = cand;
    }
    const double exterior = imp.boundary_value + imp.k0 + imp.c_lin * (x_last - xi);
    if (exterior < best) best = exterior;
    out[i] = best;
  }
  return out;
}

double scale_of(const NodalVector& v) { return 1.0 + sup_norm(v); }

}  // namespace

ObstacleMap ObstacleMap::superposition(double nu, double c, double p) {
  if (!(nu > 0.0)) throw InvalidArgument("superposition map: nu must be positive");
  if (!(c >= 0.0)) throw InvalidArgument("superposition map: c must be nonnegative");
  if (!(p > 0.0)) throw InvalidArgument("superposition map: p must be positive");
  return ObstacleMap(Superposition{nu, c, p});
}

ObstacleMap ObstacleMap::compliant(const Mesh& mesh, Compliant data) {
  if (!data.B) throw InvalidArgument("compliant map: missing operator B");
  if (data.B->mesh_id() != mesh.id() || data.g.mesh_id != mesh.id())
    throw MeshMismatch("compliant map: B and g must live on the mesh");
  if (!(data.g1 >= 0.0) || !(data.g2 >= 0.0))
    throw PreconditionError("compliant map: coupling must be monotone (g1 >= 0, g2 >= 0)");
  if (!(data.l1 > 0.0)) throw PreconditionError("compliant map: L must be increasing (l1 > 0)");
  if (!(data.nu > 0.0) || data.l0 < data.nu) throw PreconditionError("compliant map: need L(0) = l0 >= nu > 0");
  if (!check_m_matrix(compliant_matrix(data, free_mass(*data.B, mesh))))
    throw PreconditionError(
        "compliant map: B + g1 l1 M is not an M-matrix, so z -> G(Lz, v) monotonicity cannot be guaranteed");
  return ObstacleMap(std::move(data));
}

ObstacleMap ObstacleMap::impulse(double k0, double c_lin, double boundary_value) {
  if (!(k0 > 0.0)) throw InvalidArgument("impulse map: k0 must be positive");
  if (!(c_lin >= 0.0)) throw InvalidArgument("impulse map: c_lin must be nonnegative");
  return ObstacleMap(Impulse{k0, c_lin, boundary_value});
}

std::string ObstacleMap::name() const {
  if (as<Superposition>()) return "superposition";
  if (as<Compliant>()) return "compliant";
  return "impulse";
}

NodalVector evaluate_obstacle(const ObstacleMap& map, const NodalVector& v, const Mesh& mesh) {
  require_on_mesh(v, mesh, "evaluate_obstacle");
  if (const auto* s = map.as<Superposition>()) return eval_superposition(*s, v);
  if (const auto* c = map.as<Compliant>()) return eval_compliant(*c, v, mesh);
  return eval_impulse(*map.as<Impulse>(), v, mesh);
}

HypothesisCheck check_increasing(const ObstacleMap& map, const Mesh& mesh, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), step(0.0, 1.0);
  HypothesisCheck out;
  for (int t = 0; t < trials; ++t) {
    NodalVector v(mesh), w(mesh);
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = u(rng);
      w[i] = v[i] + step(rng);
    }
    const NodalVector pv = evaluate_obstacle(map, v, mesh);
    const NodalVector pw = evaluate_obstacle(map, w, mesh);
    const double excess = simd::max_excess(pv.span(), pw.span());
    if (excess > 1e-12 * scale_of(pw)) {
      std::ostringstream msg;
      msg << "obstacle map is not increasing: Phi(v) exceeds Phi(w) by " << excess << " for v <= w (trial " << t << ")";
      return {false, msg.str()};
    }
  }
  return out;
}

HypothesisCheck check_scaling(const ObstacleMap& map, const Mesh& mesh, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int t = 0; t < samples; ++t) {
    NodalVector v(mesh);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = u(rng);
    const NodalVector pv = evaluate_obstacle(map, v, mesh);
    for (double lambda : {1.1, 2.0, 10.0}) {
      NodalVector lv = v;
      lv.values() *= lambda;
      const NodalVector plv = evaluate_obstacle(map, lv, mesh);
      NodalVector lpv = pv;
      lpv.values() *= lambda;
      const double excess = simd::max_excess(plv.span(), lpv.span());
      if (excess > 1e-12 * scale_of(plv)) {
        std::ostringstream msg;
        msg << "scaling condition lambda Phi(v) >= Phi(lambda v) fails at lambda = " << lambda << " by " << excess;
        return {false, msg.str()};
      }
    }
  }
  return {};
}

HypothesisCheck check_q_condition(const DiscreteOperator& Q, const NodalVector& phi) {
  const Eigen::VectorXd q = Q.apply_full(phi);
  const double tol = 1e-10 * q.lpNorm<Eigen::Infinity>();
  const double low = q.size() ? q.minCoeff() : 0.0;
  if (low < -tol) {
    std::ostringstream msg;
    msg << "Q phi >= 0 violated (min " << low << ")";
    return {false, msg.str()};
  }
  return {};
}

std::string to_string(QviKind kind) {
  switch (kind) {
    case QviKind::Minimal: return "minimal";
    case QviKind::Maximal: return "maximal";
    case QviKind::Plain: return "plain";
  }
  return "plain";
}

NodalVector qvi_map(const DiscreteOperator& op, const LoadFunctional& f, const ObstacleMap& map, const Mesh& mesh,
                    const NodalVector& v) {
  const NodalVector phi = evaluate_obstacle(map, v, mesh);
  return solve_obstacle_vi(op, f, ConstraintSet::nodal(mesh, phi)).y;
}

QVISolution qvi_fixed_point(const DiscreteOperator& op, const LoadFunctional& f, const ObstacleMap& map,
                            const Mesh& mesh, QviStart start, const QviOptions& options,
                            const std::optional<NodalVector>& custom, const std::optional<LoadFunctional>& f_max) {
  if (op.mesh_id() != mesh.id() || f.mesh_id != mesh.id()) throw MeshMismatch("qvi_fixed_point: mesh mismatch");
  if (!(options.tol > 0.0) || options.max_iter < 1) throw InvalidArgument("qvi_fixed_point: bad tolerance or max_iter");
  if (!op.is_m_matrix()) throw PreconditionError("qvi_fixed_point: operator must be an M-matrix (T must be increasing)");
  if (f.values.size() && f.values.minCoeff() < 0.0) throw PreconditionError("qvi_fixed_point: need f >= 0");

  QVISolution sol;
  NodalVector y(mesh);
  switch (start) {
    case QviStart::Sub:
      sol.kind = QviKind::Minimal;
      break;
    case QviStart::Super: {
      sol.kind = QviKind::Maximal;
      LoadFunctional cap = f_max ? *f_max : LoadFunctional{1.01 * f.values, f.mesh_id};
      if ((cap.values - f.values).minCoeff() < 0.0) throw PreconditionError("qvi_fixed_point: need f <= f_max");
      y = solve_linear(op, cap);
      break;
    }
    case QviStart::Custom:
      if (!custom) throw InvalidArgument("qvi_fixed_point: custom start needs a vector");
      require_on_mesh(*custom, mesh, "qvi_fixed_point");
      y = *custom;
      break;
  }
  sol.history.push_back(y);
  const double mono_tol = 1e-10;
  for (int k = 1; k <= options.max_iter; ++k) {
    NodalVector next = qvi_map(op, f, map, mesh, y);
    sol.iterations = k;
    const double scale = 1.0 + std::max(sup_norm(next), sup_norm(y));
    if (sol.kind == QviKind::Minimal && simd::max_excess(y.span(), next.span()) > mono_tol * scale)
      throw SolverError("qvi_fixed_point: history from the subsolution is not nondecreasing", k);
    if (sol.kind == QviKind::Maximal && simd::max_excess(next.span(), y.span()) > mono_tol * scale)
      throw SolverError("qvi_fixed_point: history from the supersolution is not nonincreasing", k);
    const double increment = sup_distance(next, y);
    sol.history.push_back(next);
    y = std::move(next);
    if (increment <= options.tol) {
      const NodalVector ty = qvi_map(op, f, map, mesh, y);
      sol.fixed_point_residual = sup_distance(ty, y);
      if (sol.fixed_point_residual <= 10.0 * options.tol) {
        sol.y = y;
        const NodalVector phi = evaluate_obstacle(map, y, mesh);
        sol.vi_residual = complementarity_residual(y, op, f, ConstraintSet::nodal(mesh, phi)).value;
        return sol;
      }
    }
  }
  std::ostringstream msg;
  msg << "qvi_fixed_point: no fixed point within " << options.max_iter << " iterations";
  throw SolverError(msg.str(), options.max_iter, sol.fixed_point_residual);
}

QVISolution minimal_solution(const DiscreteOperator& op, const LoadFunctional& f, const ObstacleMap& map,
                             const Mesh& mesh, const QviOptions& options) {
  return qvi_fixed_point(op, f, map, mesh, QviStart::Sub, options);
}

QVISolution maximal_solution(const DiscreteOperator& op, const LoadFunctional& f, const ObstacleMap& map,
                             const Mesh& mesh, const LoadFunctional& f_max, const QviOptions& options) {
  return qvi_fixed_point(op, f, map, mesh, QviStart::Super, options, std::nullopt, f_max);
}

StabilityReport stability_study(const DiscreteOperator& op, const ObstacleMap& map, const Mesh& mesh,
                                const LoadFunctional& f_star, const LoadFunctional& g,
                                const std::vector<double>& epsilon, double floor, const QviOptions& options) {
  if (epsilon.empty()) throw InvalidArgument("stability_study: empty epsilon schedule");
  if (!(floor > 0.0)) throw InvalidArgument("stability_study: floor must be positive");
  if (g.values.size() != f_star.values.size()) throw InvalidArgument("stability_study: g and f_star differ in size");
  StabilityReport report;
  report.scaling = check_scaling(map, mesh);

  const Eigen::VectorXd m = free_mass(op, mesh);
  std::vector<LoadFunctional> loads;
  Eigen::VectorXd top = f_star.values;
  for (double e : epsilon) {
    LoadFunctional fn{f_star.values + e * g.values, f_star.mesh_id};
    top = top.cwiseMax(fn.values);
    loads.push_back(std::move(fn));
  }
  for (const auto& fn : loads) {
    for (Eigen::Index i = 0; i < m.size(); ++i)
      if (fn.values[i] < floor * m[i])
        throw PreconditionError("stability_study: hypothesis f_n >= c > 0 violated");
  }
  const LoadFunctional f_max{1.01 * top, f_star.mesh_id};

  const QVISolution ref_min = minimal_solution(op, f_star, map, mesh, options);
  const QVISolution ref_max = maximal_solution(op, f_star, map, mesh, f_max, options);
  report.records = parallel_map(loads.size(), [&](std::size_t i) {
    const QVISolution mn = minimal_solution(op, loads[i], map, mesh, options);
    const QVISolution mx = maximal_solution(op, loads[i], map, mesh, f_max, options);
    StabilityRecord r;
    r.n = static_cast<int>(i) + 1;
    r.epsilon = epsilon[i];
    NodalVector d = mn.y;
    d.values() -= ref_min.y.values();
    r.min_err_sup = sup_norm(d);
    r.min_err_l2 = l2_norm(d, mesh);
    d = mx.y;
    d.values() -= ref_max.y.values();
    r.max_err_sup = sup_norm(d);
    r.max_err_l2 = l2_norm(d, mesh);
    r.min_iterations = mn.iterations;
    r.max_iterations = mx.iterations;
    return r;
  });
  auto converged = [&](auto member) {
    const auto& rs = report.records;
    if (rs.size() < 2) return false;
    for (std::size_t i = 2; i < rs.size(); ++i)
      if (rs[i].*member > rs[i - 1].*member * (1.0 + 1e-9) + 1e-14) return false;
    return rs.back().*member <= rs.front().*member / 5.0;
  };
  report.converged_min = converged(&StabilityRecord::min_err_sup);
  report.converged_max = converged(&StabilityRecord::max_err_sup);
  return report;
}

}  // namespace vilab
