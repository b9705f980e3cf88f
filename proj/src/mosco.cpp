#include "vilab/mosco.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vilab/error.hpp"
#include "vilab/parallel.hpp"
#include "vilab/vi_solver.hpp"

namespace vilab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd set_data(const ConstraintSet& K) {
  if (const auto* o = K.as<NodalObstacle>()) return o->phi.values();
  if (const auto* o = K.as<MidpointObstacle>()) return o->phi;
  if (const auto* o = K.as<GradientBound>()) return o->alpha;
  return {};
}

double data_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw InvalidArgument("set sequence: data lengths differ");
  return a.size() == 0 ? 0.0 : (a - b).lpNorm<Eigen::Infinity>();
}

MoscoRecord failed_record(int n, const std::string& what) {
  MoscoRecord r;
  r.n = n;
  r.err_sup = r.err_l2 = r.err_energy = r.violation = r.residual = kNaN;
  r.feasible = false;
  r.iterations = -1;
  r.error = what;
  return r;
}

/// Intercept of the least-squares line through (x_i, y_i).
double ls_intercept(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.empty()) return kNaN;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (x.size() < 2 || std::abs(den) < 1e-300) return sy / n;
  const double b = (n * sxy - sx * sy) / den;
  return (sy - b * sx) / n;
}

void summarize(MoscoReport& report, bool against_h) {
  std::vector<double> x, err, xv, viol;
  const MoscoRecord* first = nullptr;
  const MoscoRecord* last = nullptr;
  for (const auto& r : report.records) {
    if (r.n == 0 || !r.error.empty()) continue;
    if (!first) first = &r;
    last = &r;
    const double xi = against_h ? r.h : r.delta;
    x.push_back(xi);
    err.push_back(r.err_sup);
    if (std::isfinite(xi)) {
      xv.push_back(xi);
      viol.push_back(r.violation);
    }
  }
  report.converged = first && last && first != last && last->err_sup <= first->err_sup / 10.0;
  report.slope = loglog_slope(x, err);
  // extrapolate from the finest records only; the active set still moves at coarse ones
  constexpr std::size_t kTail = 3;
  if (xv.size() > kTail) {
    xv.erase(xv.begin(), xv.end() - kTail);
    viol.erase(viol.begin(), viol.end() - kTail);
  }
  report.limit_violation = std::max(0.0, ls_intercept(xv, viol));
  if (last && !std::isfinite(report.limit_violation)) report.limit_violation = last->violation;
  report.limit_feasible = std::isfinite(report.limit_violation) && report.limit_violation <= 1e-6;
}

}  // namespace

Eigen::VectorXd SetSequence::data(int n) const { return set_data(at(n)); }
Eigen::VectorXd SetSequence::limit_data() const { return set_data(limit); }

std::vector<double> dyadic_schedule(int n_max) {
  if (n_max < 1) throw InvalidArgument("dyadic_schedule: n_max must be >= 1");
  std::vector<double> d(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) d[static_cast<std::size_t>(n - 1)] = std::ldexp(1.0, -n);
  return d;
}

SetSequence SetSequence::shifted_obstacle(const Mesh& mesh, const NodalVector& phi, const NodalVector& g,
                                          std::vector<double> delta) {
  require_on_mesh(phi, mesh, "shifted_obstacle");
  require_on_mesh(g, mesh, "shifted_obstacle");
  SetSequence s{ConstraintSet::nodal(mesh, phi), {}, std::move(delta), "phi_n = phi + delta_n g"};
  // the generator must not keep a reference to the caller's mesh
  const Mesh copy = mesh;
  s.generator = [copy, phi, g, d = s.delta](int n) {
    if (n < 1 || n > static_cast<int>(d.size())) throw InvalidArgument("set sequence: n out of range");
    NodalVector phi_n = phi;
    phi_n.values() += d[static_cast<std::size_t>(n - 1)] * g.values();
    return ConstraintSet::nodal(copy, std::move(phi_n));
  };
  return s;
}

SetSequence SetSequence::shifted_gradient(const Mesh& mesh, const Eigen::VectorXd& alpha, const Eigen::VectorXd& g,
                                          double p, std::vector<double> delta, double nu) {
  if (g.size() != alpha.size()) throw InvalidArgument("shifted_gradient: alpha and g lengths differ");
  SetSequence s{ConstraintSet::gradient(mesh, alpha, p, nu), {}, std::move(delta), "alpha_n = alpha + delta_n g"};
  const Mesh copy = mesh;
  s.generator = [copy, alpha, g, p, nu, d = s.delta](int n) {
    if (n < 1 || n > static_cast<int>(d.size())) throw InvalidArgument("set sequence: n out of range");
    return ConstraintSet::gradient(copy, alpha + d[static_cast<std::size_t>(n - 1)] * g, p, nu);
  };
  return s;
}

SetSequence SetSequence::constant(const ConstraintSet& K, int n_max) {
  if (n_max < 1) throw InvalidArgument("SetSequence::constant: n_max must be >= 1");
  SetSequence s{K, {}, std::vector<double>(static_cast<std::size_t>(n_max), 0.0), "K_n = K"};
  s.generator = [K, n_max](int n) {
    if (n < 1 || n > n_max) throw InvalidArgument("set sequence: n out of range");
    return K;
  };
  return s;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return kNaN;
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double den = n * sxx - sx * sx;
  return std::abs(den) < 1e-300 ? kNaN : (n * sxy - sx * sy) / den;
}

MoscoReport mosco_study(const DiscreteOperator& op, const LoadFunctional& f, const SetSequence& seq, const Mesh& mesh,
                        const std::vector<LoadFunctional>& loads) {
  if (seq.size() < 1) throw InvalidArgument("mosco_study: empty set sequence");
  if (!loads.empty() && static_cast<int>(loads.size()) != seq.size())
    throw InvalidArgument("mosco_study: need one load per sequence index");
  if (op.mesh_id() != mesh.id() || f.mesh_id != mesh.id() || seq.limit.mesh_id() != mesh.id())
    throw MeshMismatch("mosco_study: mesh mismatch");

  MoscoReport report;
  const VISolution limit = solve_vi(op, f, seq.limit, mesh);
  MoscoRecord base;
  base.n = 0;
  base.h = mesh.h();
  base.iterations = limit.iterations;
  base.residual = limit.residual;
  report.records.push_back(base);
  const Eigen::VectorXd limit_data = seq.limit_data();

  auto rows = parallel_map(static_cast<std::size_t>(seq.size()), [&](std::size_t i) {
    const int n = static_cast<int>(i) + 1;
    try {
      const ConstraintSet Kn = seq.at(n);
      const LoadFunctional& fn = loads.empty() ? f : loads[i];
      const VISolution s = solve_vi(op, fn, Kn, mesh);
      MoscoRecord r;
      r.n = n;
      r.h = mesh.h();
      r.delta = seq.delta[i];
      r.data_distance = data_gap(set_data(Kn), limit_data);
      NodalVector diff = s.y;
      diff.values() -= limit.y.values();
      r.err_sup = sup_norm(diff);
      r.err_l2 = l2_norm(diff, mesh);
      r.err_energy = op.energy_norm(diff);
      r.violation = constraint_violation(s.y, seq.limit, mesh);
      r.feasible = is_feasible(s.y, Kn, mesh, Kn.as<GradientBound>() ? 1e-6 : kFeasibilityTol);
      r.iterations = s.iterations;
      r.residual = s.residual;
      return r;
    } catch (const SolverError& e) {
      return failed_record(n, e.what());
    } catch (const PreconditionError& e) {
      return failed_record(n, e.what());
    }
  });
  for (auto& r : rows) report.records.push_back(std::move(r));
  summarize(report, false);
  return report;
}

std::string to_string(RecoveryConstruction c) {
  switch (c) {
    case RecoveryConstruction::Scale: return "scale";
    case RecoveryConstruction::Truncate: return "truncate";
    case RecoveryConstruction::SingularPerturbation: return "singular_perturbation";
  }
  return "unknown";
}

RecoveryReport recovery_study(const NodalVector& w, const SetSequence& seq, RecoveryConstruction construction,
                              const Mesh& mesh, const RecoveryContext& ctx) {
  require_on_mesh(w, mesh, "recovery_study");
  if (!is_feasible(w, seq.limit, mesh)) throw PreconditionError("recovery_study: w must be feasible for the limit set");
  if (construction == RecoveryConstruction::Scale && !(ctx.nu > 0.0))
    throw InvalidArgument("recovery_study: the scale construction needs nu > 0");
  if (construction != RecoveryConstruction::Scale && !seq.limit.as<NodalObstacle>())
    throw InvalidArgument("recovery_study: truncation and singular perturbation act on nodal obstacles");
  if (construction == RecoveryConstruction::SingularPerturbation && (!ctx.q || !ctx.mass))
    throw InvalidArgument("recovery_study: singular perturbation needs Q and a mass operator");

  const Eigen::VectorXd phi = seq.limit_data();
  RecoveryReport report;
  for (int n = 1; n <= seq.size(); ++n) {
    const ConstraintSet Kn = seq.at(n);
    const Eigen::VectorXd phi_n = set_data(Kn);
    std::ostringstream tag;
    tag << "n=" << n << ": ";
    try {
      NodalVector wn;
      switch (construction) {
        case RecoveryConstruction::Scale:
          if (phi_n.minCoeff() < ctx.nu) throw PreconditionError("scale construction needs phi_n >= nu");
          wn = scale_recovery(w, {phi.data(), static_cast<std::size_t>(phi.size())},
                              {phi_n.data(), static_cast<std::size_t>(phi_n.size())}, ctx.nu);
          break;
        case RecoveryConstruction::Truncate:
          if (phi_n.minCoeff() < 0.0) throw PreconditionError("truncation needs phi_n >= 0");
          wn = truncation_recovery(w, data_gap(phi_n, phi));
          break;
        case RecoveryConstruction::SingularPerturbation:
          wn = singular_perturbation_recovery(w, Kn.as<NodalObstacle>()->phi, *ctx.q, *ctx.mass).w;
          break;
      }
      NodalVector diff = wn;
      diff.values() -= w.values();
      RecoveryStep step;
      step.n = n;
      step.distance = ctx.energy ? ctx.energy->energy_norm(diff) : l2_norm(diff, mesh);
      step.feasible = is_feasible(wn, Kn, mesh);
      report.trace.push(step);
    } catch (const PreconditionError& e) {
      report.failures.push_back(tag.str() + e.what());
    } catch (const SolverError& e) {
      report.failures.push_back(tag.str() + e.what());
    }
  }
  const auto& steps = report.trace.steps();
  report.converged = !steps.empty() && report.failures.empty() &&
                     steps.back().distance <= steps.front().distance / 10.0;
  return report;
}

std::string to_string(FemConstraint c) {
  switch (c) {
    case FemConstraint::K1Midpoint: return "K1_midpoint";
    case FemConstraint::K2Nodal: return "K2_nodal";
    case FemConstraint::KiGradient: return "Ki_gradient";
  }
  return "unknown";
}

namespace {

ConstraintSet level_set(const ContinuumProblem& problem, FemConstraint constraint, const Mesh& mesh) {
  switch (constraint) {
    case FemConstraint::K1Midpoint:
      return ConstraintSet::midpoint(mesh, sample_midpoints(problem.obstacle, mesh));
    case FemConstraint::K2Nodal:
      return ConstraintSet::nodal(mesh, interpolate_nodal(problem.obstacle, mesh));
    case FemConstraint::KiGradient: {
      // inf alpha > 0, sampled at midpoints and nodes
      const Eigen::VectorXd alpha = sample_midpoints(problem.alpha, mesh);
      const NodalVector at_nodes = interpolate_nodal(problem.alpha, mesh);
      if (!(alpha.minCoeff() > 0.0) || !(at_nodes.values().minCoeff() > 0.0))
        throw PreconditionError("fem_constraint_study: alpha must satisfy inf alpha > 0");
      return ConstraintSet::gradient(mesh, alpha, problem.p);
    }
  }
  throw InvalidArgument("fem_constraint_study: unknown constraint");
}

}  // namespace

MoscoReport fem_constraint_study(const ContinuumProblem& problem, FemConstraint constraint,
                                 const std::vector<Mesh>& hierarchy) {
  if (hierarchy.empty()) throw InvalidArgument("fem_constraint_study: empty hierarchy");
  for (std::size_t i = 1; i < hierarchy.size(); ++i)
    if (!is_nested(hierarchy[i - 1], hierarchy[i]))
      throw InvalidArgument("fem_constraint_study: hierarchy is not nested");
  if (!problem.load) throw InvalidArgument("fem_constraint_study: missing load");
  if (constraint == FemConstraint::KiGradient ? !problem.alpha : !problem.obstacle)
    throw InvalidArgument("fem_constraint_study: missing constraint data");

  const Mesh reference_mesh = refine(hierarchy.back());
  std::vector<const Mesh*> meshes;
  for (const auto& m : hierarchy) meshes.push_back(&m);
  meshes.push_back(&reference_mesh);

  struct LevelSolution {
    NodalVector y;
    int iterations;
    double residual;
  };
  const auto solutions = parallel_map(meshes.size(), [&](std::size_t i) {
    const Mesh& mesh = *meshes[i];
    const DiscreteOperator op = assemble_operator(mesh, problem.coefficients);
    const LoadFunctional f = assemble_load(mesh, problem.load);
    const ConstraintSet K = level_set(problem, constraint, mesh);
    const VISolution s = solve_vi(op, f, K, mesh);
    return LevelSolution{s.y, s.iterations, s.residual};
  });

  const DiscreteOperator ref_op = assemble_operator(reference_mesh, problem.coefficients);
  const ConstraintSet ref_set = level_set(problem, constraint, reference_mesh);
  const LevelSolution& ref = solutions.back();
  MoscoReport report;
  MoscoRecord base;
  base.n = 0;
  base.h = reference_mesh.h();
  base.delta = kNaN;
  base.iterations = ref.iterations;
  base.residual = ref.residual;
  report.records.push_back(base);
  for (std::size_t i = 0; i < hierarchy.size(); ++i) {
    MoscoRecord r;
    r.n = static_cast<int>(i) + 1;
    r.h = hierarchy[i].h();
    r.delta = kNaN;
    NodalVector diff = prolongate(solutions[i].y, hierarchy[i], reference_mesh);
    r.violation = constraint_violation(diff, ref_set, reference_mesh);
    diff.values() -= ref.y.values();
    r.err_sup = sup_norm(diff);
    r.err_l2 = l2_norm(diff, reference_mesh);
    r.err_energy = ref_op.energy_norm(diff);
    r.iterations = solutions[i].iterations;
    r.residual = solutions[i].residual;
    report.records.push_back(r);
  }
  summarize(report, true);
  return report;
}

}  // namespace vilab
