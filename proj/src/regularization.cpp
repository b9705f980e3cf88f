#include "vilab/regularization.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "vilab/error.hpp"
#include "vilab/parallel.hpp"
#include "vilab/vi_solver.hpp"

namespace vilab {
namespace {

void check_schedule(const std::vector<double>& s, const char* name) {
  if (s.empty()) throw InvalidArgument(std::string("perturbation scheme: empty ") + name + " schedule");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0) || !std::isfinite(s[i]))
      throw InvalidArgument(std::string("perturbation scheme: ") + name + " values must be positive");
    if (i > 0 && s[i] < s[i - 1])
      throw InvalidArgument(std::string("perturbation scheme: ") + name + " schedule must be nondecreasing");
  }
  if (s.size() > 1 && s.back() < 1e3 * s.front())
    throw InvalidArgument(std::string("perturbation scheme: ") + name +
                          " schedule must diverge within the horizon (last >= 1e3 * first)");
}

double gamma_at(const std::vector<double>& s, int n) { return s.empty() ? 0.0 : s[static_cast<std::size_t>(n - 1)]; }

/// Obstacle over all nodes, or nullptr for the unconstrained sentinel.
const NodalVector* nodal_phi(const ConstraintSet& K) {
  if (K.as<Unconstrained>()) return nullptr;
  if (const auto* o = K.as<NodalObstacle>()) return &o->phi;
  throw InvalidArgument("Moreau-Yosida terms need a nodal obstacle (lumped-mass distance)");
}

double seminorm_sq(const NodalVector& u, const Mesh& mesh) {
  const auto grads = element_gradients(u, mesh);
  double s = 0.0;
  for (std::size_t e = 0; e < grads.size(); ++e)
    s += mesh.measure(e) * (grads[e][0] * grads[e][0] + grads[e][1] * grads[e][1]);
  return s;
}

double tikhonov_part(const NodalVector& u, const PerturbationScheme& scheme, int n, const Mesh& mesh) {
  return std::pow(seminorm_sq(u, mesh), 0.5 * scheme.alpha) / (2.0 * gamma_at(scheme.gamma_prime, n));
}

bool in_coarse_space(const NodalVector& u, const Mesh& coarse, const Mesh& mesh) {
  const auto inj = injection_map(coarse, mesh);
  NodalVector c(coarse);
  for (std::size_t i = 0; i < inj.size(); ++i) c[i] = u[static_cast<std::size_t>(inj[i])];
  const NodalVector back = prolongate(c, coarse, mesh);
  return sup_distance(back, u) <= 1e-12 * (1.0 + sup_norm(u));
}

void check_inputs(const NodalVector& u, const PerturbationScheme& scheme, int n, const ConstraintSet& K,
                  const DiscreteOperator& mass, const Mesh& mesh) {
  require_on_mesh(u, mesh, "evaluate_Rn");
  if (K.mesh_id() != mesh.id() || mass.mesh_id() != mesh.id()) throw MeshMismatch("evaluate_Rn: mesh mismatch");
  if (n < 1 || n > scheme.n_max()) throw InvalidArgument("evaluate_Rn: n outside 1..n_max");
}

/// Free-row block of the prolongation from a coarse level (free columns only).
SparseMatrix free_prolongation(const Mesh& coarse, const Mesh& mesh, const DiscreteOperator& op) {
  const SparseMatrix p = prolongation_matrix(coarse, mesh);
  std::vector<int> col(coarse.num_nodes(), -1);
  int nc = 0;
  for (std::size_t j = 0; j < coarse.num_nodes(); ++j)
    if (!coarse.is_boundary(static_cast<int>(j))) col[j] = nc++;
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index k = 0; k < p.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(p, k); it; ++it) {
      const int r = op.free_index(static_cast<int>(it.row()));
      const int c = col[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  SparseMatrix out(static_cast<Eigen::Index>(op.size()), nc);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SparseMatrix free_stiffness(const Mesh& mesh, const DiscreteOperator& op) {
  const DiscreteOperator s = assemble_operator(mesh, Coefficients{});
  if (s.size() != op.size()) throw MeshMismatch("Tikhonov term: operator and mesh disagree on free nodes");
  return s.matrix();
}

/// Semismooth Newton for  P^T (B P z - f + gamma m (P z - phi)_+) = 0.
PerturbedSolution penalty_newton(const DiscreteOperator& op, const SparseMatrix& b, const Eigen::VectorXd& f,
                                 const SparseMatrix& p, const Eigen::VectorXd& m, const Eigen::VectorXd& phi,
                                 double gamma) {
  const SparseMatrix pt = p.transpose();
  const SparseMatrix reduced = pt * b * p;
  const Eigen::VectorXd rf = pt * f;
  Eigen::VectorXd z = solve_linear(reduced, rf);
  PerturbedSolution out;
  const double scale = 1.0 + f.lpNorm<Eigen::Infinity>();
  std::vector<char> active(static_cast<std::size_t>(phi.size()), 0);
  constexpr int kMaxNewton = 200;
  for (int it = 0; it <= kMaxNewton; ++it) {
    const Eigen::VectorXd y = p * z;
    Eigen::VectorXd penalty = Eigen::VectorXd::Zero(y.size());
    bool changed = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const bool a = y[i] > phi[i];
      if (a != static_cast<bool>(active[i])) changed = true;
      active[i] = a;
      if (a) penalty[i] = gamma * m[i] * (y[i] - phi[i]);
    }
    out.residual = (pt * (b * y - f + penalty)).lpNorm<Eigen::Infinity>();
    out.iterations = it;
    if (!changed && out.residual <= 1e-9 * scale) {
      out.y = op.extend(y);
      return out;
    }
    if (it == kMaxNewton) break;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = f;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (active[i]) {
        trip.emplace_back(i, i, gamma * m[i]);
        rhs[i] += gamma * m[i] * phi[i];
      }
    SparseMatrix d(y.size(), y.size());
    d.setFromTriplets(trip.begin(), trip.end());
    z = solve_linear(SparseMatrix(pt * (b + d) * p), pt * rhs);
  }
  std::ostringstream msg;
  msg << "minimize_perturbed: semismooth Newton stalled, residual " << out.residual;
  throw SolverError(msg.str(), out.iterations, out.residual);
}

}  // namespace

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Tikhonov: return "tikhonov";
    case SchemeKind::MoreauYosida: return "moreau_yosida";
    case SchemeKind::GalerkinMY: return "galerkin_my";
    case SchemeKind::TikhonovMY: return "tikhonov_my";
  }
  return "unknown";
}

PerturbationScheme PerturbationScheme::tikhonov(std::vector<double> gamma_prime, double alpha) {
  PerturbationScheme s;
  s.kind = SchemeKind::Tikhonov;
  s.gamma_prime = std::move(gamma_prime);
  s.alpha = alpha;
  s.validate();
  return s;
}

PerturbationScheme PerturbationScheme::moreau_yosida(std::vector<double> gamma) {
  PerturbationScheme s;
  s.kind = SchemeKind::MoreauYosida;
  s.gamma = std::move(gamma);
  s.validate();
  return s;
}

PerturbationScheme PerturbationScheme::galerkin_my(std::vector<Mesh> hierarchy, std::vector<double> gamma) {
  PerturbationScheme s;
  s.kind = SchemeKind::GalerkinMY;
  s.hierarchy = std::move(hierarchy);
  s.gamma = std::move(gamma);
  s.validate();
  return s;
}

PerturbationScheme PerturbationScheme::tikhonov_my(std::vector<double> gamma, std::vector<double> gamma_prime,
                                                   double alpha) {
  PerturbationScheme s;
  s.kind = SchemeKind::TikhonovMY;
  s.gamma = std::move(gamma);
  s.gamma_prime = std::move(gamma_prime);
  s.alpha = alpha;
  s.validate();
  return s;
}

int PerturbationScheme::n_max() const {
  return static_cast<int>(kind == SchemeKind::Tikhonov ? gamma_prime.size() : gamma.size());
}

void PerturbationScheme::validate() const {
  if (!(alpha > 0.0)) throw InvalidArgument("perturbation scheme: alpha must be positive");
  if (kind != SchemeKind::Tikhonov) check_schedule(gamma, "gamma");
  if (kind == SchemeKind::Tikhonov || kind == SchemeKind::TikhonovMY) check_schedule(gamma_prime, "gamma'");
  if (kind == SchemeKind::TikhonovMY && gamma_prime.size() != gamma.size())
    throw InvalidArgument("perturbation scheme: gamma and gamma' schedules differ in length");
  if (kind == SchemeKind::GalerkinMY) {
    if (hierarchy.size() != gamma.size())
      throw InvalidArgument("perturbation scheme: need one mesh level per gamma value");
    for (std::size_t i = 1; i < hierarchy.size(); ++i)
      if (!is_nested(hierarchy[i - 1], hierarchy[i]))
        throw InvalidArgument("perturbation scheme: mesh hierarchy is not nested");
  }
}

double moreau_yosida_penalty(const NodalVector& u, const ConstraintSet& K, const DiscreteOperator& mass, double gamma) {
  const NodalVector* phi = nodal_phi(K);
  if (!phi) return 0.0;
  require_same_mesh(u, *phi, "moreau_yosida_penalty");
  const SparseMatrix& full = mass.full();
  if (full.rows() != static_cast<Eigen::Index>(u.size())) throw MeshMismatch("moreau_yosida_penalty: mass size");
  const Eigen::VectorXd m = full.diagonal();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double e = std::max(0.0, u[i] - (*phi)[i]);
    s += m[static_cast<Eigen::Index>(i)] * e * e;
  }
  return 0.5 * gamma * s;
}

double quadratic_energy(const DiscreteOperator& op, const LoadFunctional& f, const NodalVector& u) {
  const Eigen::VectorXd y = op.restrict(u);
  return 0.5 * y.dot(op.matrix() * y) - f.values.dot(y);
}

double evaluate_Rn(const NodalVector& u, const PerturbationScheme& scheme, int n, const ConstraintSet& K,
                   const DiscreteOperator& mass, const Mesh& mesh) {
  check_inputs(u, scheme, n, K, mass, mesh);
  switch (scheme.kind) {
    case SchemeKind::Tikhonov:
      if (!is_feasible(u, K, mesh)) return kInfinitePenalty;
      return tikhonov_part(u, scheme, n, mesh);
    case SchemeKind::MoreauYosida:
      return moreau_yosida_penalty(u, K, mass, gamma_at(scheme.gamma, n));
    case SchemeKind::GalerkinMY:
      if (!in_coarse_space(u, scheme.hierarchy[static_cast<std::size_t>(n - 1)], mesh)) return kInfinitePenalty;
      return moreau_yosida_penalty(u, K, mass, gamma_at(scheme.gamma, n));
    case SchemeKind::TikhonovMY:
      return moreau_yosida_penalty(u, K, mass, gamma_at(scheme.gamma, n)) + tikhonov_part(u, scheme, n, mesh);
  }
  return kInfinitePenalty;
}

double evaluate_lower_Rn(const NodalVector& u, const PerturbationScheme& scheme, int n, const ConstraintSet& K,
                         const DiscreteOperator& mass, const Mesh& mesh) {
  check_inputs(u, scheme, n, K, mass, mesh);
  if (scheme.kind == SchemeKind::Tikhonov) return is_feasible(u, K, mesh) ? 0.0 : kInfinitePenalty;
  return moreau_yosida_penalty(u, K, mass, gamma_at(scheme.gamma, n));
}

double evaluate_upper_Rn(const NodalVector& u, const PerturbationScheme& scheme, int n, const ConstraintSet& K,
                         const DiscreteOperator& mass, const Mesh& mesh) {
  check_inputs(u, scheme, n, K, mass, mesh);
  if (!is_feasible(u, K, mesh)) return kInfinitePenalty;
  switch (scheme.kind) {
    case SchemeKind::Tikhonov:
    case SchemeKind::TikhonovMY:
      return tikhonov_part(u, scheme, n, mesh);
    case SchemeKind::GalerkinMY:
      return in_coarse_space(u, scheme.hierarchy[static_cast<std::size_t>(n - 1)], mesh) ? 0.0 : kInfinitePenalty;
    case SchemeKind::MoreauYosida:
      return 0.0;
  }
  return kInfinitePenalty;
}

PerturbedSolution minimize_perturbed(const DiscreteOperator& op, const LoadFunctional& f,
                                     const PerturbationScheme& scheme, int n, const ConstraintSet& K,
                                     const Mesh& mesh) {
  scheme.validate();
  if (n < 1 || n > scheme.n_max()) throw InvalidArgument("minimize_perturbed: n outside 1..n_max");
  if (op.mesh_id() != mesh.id() || f.mesh_id != mesh.id() || K.mesh_id() != mesh.id())
    throw MeshMismatch("minimize_perturbed: mesh mismatch");
  if (!op.symmetric()) throw PreconditionError("minimize_perturbed: operator must be symmetric");
  if (scheme.alpha != 2.0 && scheme.kind != SchemeKind::MoreauYosida && scheme.kind != SchemeKind::GalerkinMY)
    throw InvalidArgument("minimize_perturbed: only alpha = 2 (quadratic Tikhonov term) is supported");

  SparseMatrix b = op.matrix();
  if (scheme.kind == SchemeKind::Tikhonov || scheme.kind == SchemeKind::TikhonovMY)
    b += free_stiffness(mesh, op) / gamma_at(scheme.gamma_prime, n);

  if (scheme.kind == SchemeKind::Tikhonov) {
    SparseMatrix full = op.full();
    full += assemble_operator(mesh, Coefficients{}).full() / gamma_at(scheme.gamma_prime, n);
    const DiscreteOperator perturbed(mesh, full);
    PerturbedSolution out;
    if (K.as<NodalObstacle>() || K.as<Unconstrained>()) {
      const VISolution s = solve_obstacle_vi(perturbed, f, K);
      out.y = s.y;
      out.iterations = s.iterations;
      out.residual = s.residual;
    } else {
      out.y = solution_map(f, K, perturbed, mesh);
    }
    return out;
  }

  const NodalVector* phi = nodal_phi(K);
  const Eigen::VectorXd m = op.restrict(NodalVector(mesh.id(), lumped_mass_diagonal(mesh)));
  const Eigen::Index nf = static_cast<Eigen::Index>(op.size());
  const Eigen::VectorXd phif =
      phi ? op.restrict(*phi) : Eigen::VectorXd::Constant(nf, std::numeric_limits<double>::infinity());
  SparseMatrix p;
  if (scheme.kind == SchemeKind::GalerkinMY) {
    const Mesh& coarse = scheme.hierarchy[static_cast<std::size_t>(n - 1)];
    if (!is_nested(coarse, mesh)) throw InvalidArgument("minimize_perturbed: level mesh does not nest into the mesh");
    p = free_prolongation(coarse, mesh, op);
  } else {
    p.resize(nf, nf);
    p.setIdentity();
  }
  return penalty_newton(op, b, f.values, p, m, phif, gamma_at(scheme.gamma, n));
}

GammaStudyReport gamma_study(const DiscreteOperator& op, const LoadFunctional& f, const ConstraintSet& K,
                             const PerturbationScheme& scheme, const Mesh& mesh) {
  scheme.validate();
  GammaStudyReport report;
  report.kind = scheme.kind;
  const NodalVector reference = solution_map(f, K, op, mesh);
  report.reference_objective = quadratic_energy(op, f, reference);
  const DiscreteOperator mass = assemble_lumped_mass(mesh);
  const int n_max = scheme.n_max();
  report.records = parallel_map(static_cast<std::size_t>(n_max), [&](std::size_t i) {
    const int n = static_cast<int>(i) + 1;
    const PerturbedSolution s = minimize_perturbed(op, f, scheme, n, K, mesh);
    GammaRecord r;
    r.n = n;
    r.gamma = gamma_at(scheme.gamma, n);
    r.gamma_prime = gamma_at(scheme.gamma_prime, n);
    r.h = scheme.kind == SchemeKind::GalerkinMY ? scheme.hierarchy[i].h() : mesh.h();
    r.objective = quadratic_energy(op, f, s.y) + evaluate_Rn(s.y, scheme, n, K, mass, mesh);
    NodalVector diff = s.y;
    diff.values() -= reference.values();
    r.err_energy = op.energy_norm(diff);
    r.err_sup = sup_norm(diff);
    r.err_l2 = l2_norm(diff, mesh);
    r.violation = constraint_violation(s.y, K, mesh);
    r.iterations = s.iterations;
    r.residual = s.residual;
    return r;
  });
  const auto& last = report.records.back();
  const auto& mid = report.records[static_cast<std::size_t>(std::max(1, n_max / 2) - 1)];
  report.converged = last.err_energy <= mid.err_energy * (1.0 + 1e-12) + 1e-14;
  return report;
}

namespace {

struct BallProblem {
  SparseMatrix p;      // free fine x free coarse
  Eigen::VectorXd m;   // lumped mass, free nodes
  Eigen::VectorXd w;   // target, free nodes
  Eigen::VectorXd phi; // obstacle, free nodes
};

struct BallValue {
  double g = 0.0;       // dual function value
  double slope = 0.0;   // ||v - w||_M^2 - rho^2
};

/// g(mu) = min_{z, v <= phi} ||P z - v||_M^2 + mu (||v - w||_M^2 - rho^2). For
/// fixed y = P z the optimal v is the clipped nodal average, so only z is left,
/// which a damped Newton method handles.
BallValue ball_dual(const BallProblem& bp, double mu, double rho) {
  const SparseMatrix pt = bp.p.transpose();
  const Eigen::Index nc = bp.p.cols();
  const Eigen::Index nf = bp.p.rows();
  auto inner_v = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd v(nf);
    for (Eigen::Index i = 0; i < nf; ++i) v[i] = std::min(bp.phi[i], (y[i] + mu * bp.w[i]) / (1.0 + mu));
    return v;
  };
  auto value = [&](const Eigen::VectorXd& y, const Eigen::VectorXd& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < nf; ++i)
      s += bp.m[i] * ((y[i] - v[i]) * (y[i] - v[i]) + mu * (v[i] - bp.w[i]) * (v[i] - bp.w[i]));
    return s;
  };
  Eigen::VectorXd z = Eigen::VectorXd::Zero(nc);
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd y = bp.p * z;
    const Eigen::VectorXd v = inner_v(y);
    const Eigen::VectorXd grad = 2.0 * (pt * bp.m.cwiseProduct(y - v));
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-15) break;
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index i = 0; i < nf; ++i) {
      const bool clipped = (y[i] + mu * bp.w[i]) / (1.0 + mu) > bp.phi[i];
      trip.emplace_back(i, i, 2.0 * bp.m[i] * (clipped ? 1.0 : mu / (1.0 + mu)));
    }
    SparseMatrix d(nf, nf);
    d.setFromTriplets(trip.begin(), trip.end());
    const Eigen::MatrixXd h = Eigen::MatrixXd(pt * d * bp.p);
    const Eigen::VectorXd step = h.ldlt().solve(-grad);
    const double j0 = value(y, v);
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 50; ++k, t *= 0.5) {
      const Eigen::VectorXd zt = z + t * step;
      const Eigen::VectorXd yt = bp.p * zt;
      if (value(yt, inner_v(yt)) <= j0 + 1e-4 * t * grad.dot(step)) {
        z = zt;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  const Eigen::VectorXd y = bp.p * z;
  const Eigen::VectorXd v = inner_v(y);
  double ball = 0.0;
  for (Eigen::Index i = 0; i < nf; ++i) ball += bp.m[i] * (v[i] - bp.w[i]) * (v[i] - bp.w[i]);
  BallValue out;
  out.slope = ball - rho * rho;
  out.g = value(y, v) - mu * rho * rho;
  return out;
}

/// Lower bound on min ||y - v||_M over y in V_n, v in K, ||v - w||_M <= rho,
/// by maximizing the concave dual over mu (every dual value is a lower bound).
double level_distance(const BallProblem& bp, double rho) {
  double lo = -10.0, hi = 10.0;  // log10 mu
  double best = 0.0;
  const BallValue at_lo = ball_dual(bp, std::pow(10.0, lo), rho);
  best = std::max(best, at_lo.g);
  if (at_lo.slope <= 0.0) return std::sqrt(best);
  const BallValue at_hi = ball_dual(bp, std::pow(10.0, hi), rho);
  best = std::max(best, at_hi.g);
  if (at_hi.slope >= 0.0) return std::sqrt(best);
  for (int k = 0; k < 80; ++k) {
    const double mid = 0.5 * (lo + hi);
    const BallValue v = ball_dual(bp, std::pow(10.0, mid), rho);
    best = std::max(best, v.g);
    (v.slope > 0.0 ? lo : hi) = mid;
  }
  return std::sqrt(std::max(0.0, best));
}

}  // namespace

NoRecoveryReport no_recovery_demo(const DiscreteOperator& op, const LoadFunctional& f, const ConstraintSet& K,
                                  const Mesh& mesh, const std::vector<Mesh>& hierarchy, double rho,
                                  const NodalVector& w, double tol) {
  if (!(rho > 0.0)) throw InvalidArgument("no_recovery_demo: rho must be positive");
  if (hierarchy.empty()) throw InvalidArgument("no_recovery_demo: empty hierarchy");
  const auto* obstacle = K.as<NodalObstacle>();
  if (!obstacle) throw InvalidArgument("no_recovery_demo: K must be a nodal obstacle");
  if (op.mesh_id() != mesh.id() || K.mesh_id() != mesh.id()) throw MeshMismatch("no_recovery_demo: mesh mismatch");
  require_on_mesh(w, mesh, "no_recovery_demo");
  if (!is_feasible(w, K, mesh)) throw PreconditionError("no_recovery_demo: w must lie in K");
  for (std::size_t i = 0; i < hierarchy.size(); ++i) {
    if (!is_nested(hierarchy[i], mesh)) throw InvalidArgument("no_recovery_demo: level does not nest into the mesh");
    if (i > 0 && !is_nested(hierarchy[i - 1], hierarchy[i]))
      throw InvalidArgument("no_recovery_demo: hierarchy is not nested");
  }

  BallProblem base;
  base.m = op.restrict(NodalVector(mesh.id(), lumped_mass_diagonal(mesh)));
  base.w = op.restrict(w);
  base.phi = op.restrict(obstacle->phi);
  const DiscreteOperator mass = assemble_lumped_mass(mesh);
  const double f_w = quadratic_energy(op, f, w);

  struct Level {
    double distance;
    NodalVector y;
  };
  const auto levels = parallel_map(hierarchy.size(), [&](std::size_t i) {
    BallProblem bp = base;
    bp.p = free_prolongation(hierarchy[i], mesh, op);
    const double d = level_distance(bp, rho);
    // mass projection of w onto V_n
    const SparseMatrix pt = bp.p.transpose();
    const Eigen::MatrixXd gram = Eigen::MatrixXd(pt * bp.m.asDiagonal() * bp.p);
    const Eigen::VectorXd z = gram.ldlt().solve(pt * bp.m.cwiseProduct(bp.w));
    return Level{d, op.extend(bp.p * z)};
  });

  NoRecoveryReport report;
  double gamma = 0.0;
  bool any_gap = false;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    NoRecoveryRecord r;
    r.n = static_cast<int>(i) + 1;
    r.h = hierarchy[i].h();
    r.distance = levels[i].distance;
    const double needed = r.distance > tol ? 2.0 / (r.distance * r.distance) : 0.0;
    gamma = std::max(gamma > 0.0 ? 2.0 * gamma : 1.0, needed);
    r.gamma = gamma;
    NodalVector diff = levels[i].y;
    diff.values() -= w.values();
    r.distance_to_w = l2_norm(diff, mesh);
    r.gap = quadratic_energy(op, f, levels[i].y) + moreau_yosida_penalty(levels[i].y, K, mass, gamma) - f_w;
    any_gap = any_gap || r.distance > tol;
    report.records.push_back(r);
  }
  report.inapplicable = !any_gap;
  report.note = report.inapplicable ? "density holds here: every level reaches K near w, demo inapplicable"
                                    : "levels with positive distance keep a positive objective gap";
  return report;
}

}  // namespace vilab
