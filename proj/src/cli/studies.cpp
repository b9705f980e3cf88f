#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "vilab/cli.hpp"
#include "vilab/error.hpp"
#include "vilab/mosco.hpp"
#include "vilab/qvi.hpp"
#include "vilab/regularization.hpp"
#include "vilab/simd.hpp"
#include "vilab/vi_solver.hpp"

namespace vilab::cli {
namespace {

ScalarField scalar_field(const FieldSpec& f, const char* what) {
  switch (f.kind) {
    case FieldSpec::Kind::Constant: {
      const double c = f.value;
      return [c](const Point&) { return c; };
    }
    case FieldSpec::Kind::Polynomial: {
      const auto terms = f.terms;
      return [terms](const Point& x) {
        double s = 0.0;
        for (const auto& t : terms) s += t[0] * std::pow(x[0], t[1]) * std::pow(x[1], t[2]);
        return s;
      };
    }
    case FieldSpec::Kind::Table: break;
  }
  throw ConfigError(std::string(what) + ": a table field cannot be used on several mesh levels");
}

NodalVector nodal_field(const FieldSpec& f, const Mesh& mesh, const char* what) {
  if (f.kind != FieldSpec::Kind::Table) return interpolate_nodal(scalar_field(f, what), mesh);
  if (f.table.size() != mesh.num_nodes())
    throw ConfigError(std::string(what) + ".table: need " + std::to_string(mesh.num_nodes()) + " node values, got " +
                      std::to_string(f.table.size()));
  return NodalVector(mesh.id(), Eigen::Map<const Eigen::VectorXd>(f.table.data(), static_cast<Eigen::Index>(f.table.size())));
}

Eigen::VectorXd element_field(const FieldSpec& f, const Mesh& mesh, const char* what) {
  if (f.kind != FieldSpec::Kind::Table) return sample_midpoints(scalar_field(f, what), mesh);
  if (f.table.size() != mesh.num_elements())
    throw ConfigError(std::string(what) + ".table: need " + std::to_string(mesh.num_elements()) + " element values");
  return Eigen::Map<const Eigen::VectorXd>(f.table.data(), static_cast<Eigen::Index>(f.table.size()));
}

LoadFunctional load_field(const FieldSpec& f, const Mesh& mesh, const DiscreteOperator& op, const char* what) {
  if (f.kind != FieldSpec::Kind::Table) return assemble_load(mesh, scalar_field(f, what));
  // per-node densities, paired with the lumped mass
  const NodalVector v = nodal_field(f, mesh, what);
  const Eigen::VectorXd m = lumped_mass_diagonal(mesh);
  return load_from_values(op, op.restrict(NodalVector(mesh.id(), v.values().cwiseProduct(m))));
}

Mesh build_mesh(const MeshSpec& spec, int cells = 0) {
  if (!spec.file.empty()) return read_mesh_file(spec.file);
  if (spec.dim == 1) return build_interval_mesh(cells > 0 ? cells : spec.nx, spec.box.x0, spec.box.x1);
  const int nx = cells > 0 ? cells : spec.nx;
  const int ny = cells > 0 ? std::max(1, static_cast<int>(std::lround(static_cast<double>(cells) * spec.ny / spec.nx))) : spec.ny;
  return build_triangle_mesh(nx, ny, spec.box);
}

std::vector<Mesh> build_levels(const StudyConfig& c) {
  std::vector<Mesh> out;
  if (c.levels.empty()) {
    out.push_back(build_mesh(c.mesh));
    return out;
  }
  for (int l : c.levels) out.push_back(build_mesh(c.mesh, l));
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!is_nested(out[i - 1], out[i])) throw ConfigError("levels: mesh levels are not nested (use doubling cell counts)");
  return out;
}

ObstacleMap build_map(const MapSpec& m, const Mesh& mesh) {
  if (m.type == "superposition") return ObstacleMap::superposition(m.nu, m.c, m.p);
  if (m.type == "impulse") return ObstacleMap::impulse(m.k0, m.c_lin, m.boundary_value);
  Coefficients coeff;
  coeff.diffusion = m.diffusion;
  coeff.reaction = m.reaction;
  Compliant data;
  data.B = std::make_shared<const DiscreteOperator>(assemble_operator(mesh, coeff));
  data.g = load_field(m.g, mesh, *data.B, "map.g");
  data.g1 = m.g1;
  data.g2 = m.g2;
  data.cap = m.cap;
  data.l0 = m.l0;
  data.l1 = m.l1;
  data.nu = m.nu;
  return ObstacleMap::compliant(mesh, std::move(data));
}

ReportFlag flag(std::string name, bool passed, std::string detail = {}) {
  return {std::move(name), passed, std::move(detail)};
}

std::string num(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] <= v[i - 1] * (1.0 + 1e-9) + 1e-14)) return false;
  return true;
}

StudyReport run_vi(const StudyConfig& c) {
  StudyReport r{"vi", {}, {}, {}};
  const std::vector<Mesh> levels = build_levels(c);
  ViOptions opt;
  opt.method = c.method == "projected_relaxation" ? ViMethod::ProjectedRelaxation : ViMethod::ActiveSet;
  opt.omega = c.omega;
  if (c.tol > 0) opt.tol = c.tol;
  opt.max_iter = c.max_iter;

  struct Solved {
    NodalVector y;
    VISolution s;
    double violation;
  };
  auto solve_on = [&](const Mesh& mesh) {
    const DiscreteOperator op = assemble_operator(mesh, c.coefficients);
    const LoadFunctional f = load_field(c.load, mesh, op, "load");
    const ConstraintSet K = ConstraintSet::nodal(mesh, nodal_field(*c.obstacle, mesh, "obstacle"));
    VISolution s = solve_obstacle_vi(op, f, K, opt);
    const double viol = constraint_violation(s.y, K, mesh);
    return Solved{s.y, std::move(s), viol};
  };
  const bool refinable = c.mesh.file.empty();
  std::optional<Mesh> ref_mesh;
  std::optional<Solved> ref;
  std::optional<DiscreteOperator> ref_op;
  if (refinable) {
    ref_mesh = refine(levels.back());
    ref = solve_on(*ref_mesh);
    ref_op = assemble_operator(*ref_mesh, c.coefficients);
  }
  std::vector<double> errs;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const Solved s = solve_on(levels[i]);
    ReportRow row;
    row.study = "vi";
    row.n = static_cast<int>(i) + 1;
    row.h = levels[i].h();
    row.violation = s.violation;
    row.iterations = s.s.iterations;
    row.residual = s.s.residual;
    row.flag = s.s.method;
    if (ref) {
      NodalVector d = prolongate(s.y, levels[i], *ref_mesh);
      d.values() -= ref->y.values();
      row.err_sup = sup_norm(d);
      row.err_l2 = l2_norm(d, *ref_mesh);
      row.err_energy = ref_op->energy_norm(d);
      errs.push_back(*row.err_sup);
    }
    for (const auto& w : s.s.warnings) r.notes.push_back("level " + std::to_string(i + 1) + ": " + w);
    r.rows.push_back(row);
  }
  r.flags.push_back(flag("feasible", std::all_of(r.rows.begin(), r.rows.end(),
                                                 [](const ReportRow& x) { return *x.violation <= kFeasibilityTol; })));
  if (errs.size() > 1) r.flags.push_back(flag("errors_nonincreasing", nonincreasing(errs)));
  return r;
}

void add_mosco_rows(StudyReport& r, const MoscoReport& m, const std::string& study) {
  for (const auto& rec : m.records) {
    if (rec.n == 0) continue;
    ReportRow row;
    row.study = study;
    row.n = rec.n;
    row.h = rec.h;
    if (std::isfinite(rec.delta)) row.delta = rec.delta;
    row.err_sup = rec.err_sup;
    row.err_l2 = rec.err_l2;
    row.err_energy = rec.err_energy;
    row.violation = rec.violation;
    if (rec.iterations >= 0) row.iterations = rec.iterations;
    row.residual = rec.residual;
    row.flag = rec.error.empty() ? "" : "solver_failure";
    if (!rec.error.empty()) r.notes.push_back("n=" + std::to_string(rec.n) + ": " + rec.error);
    r.rows.push_back(row);
  }
}

StudyReport run_mosco(const StudyConfig& c) {
  StudyReport r{"mosco", {}, {}, {}};
  const Mesh mesh = build_mesh(c.mesh);
  const DiscreteOperator op = assemble_operator(mesh, c.coefficients);
  const LoadFunctional f = load_field(c.load, mesh, op, "load");
  const NodalVector phi = nodal_field(*c.obstacle, mesh, "obstacle");
  const NodalVector g = c.perturbation ? nodal_field(*c.perturbation, mesh, "perturbation") : NodalVector(mesh, 1.0);
  const SetSequence seq = SetSequence::shifted_obstacle(mesh, phi, g, c.schedule);
  std::vector<LoadFunctional> loads;
  if (c.load_perturbation) {
    const LoadFunctional h = load_field(*c.load_perturbation, mesh, op, "load_perturbation");
    for (double d : c.schedule) loads.push_back({f.values + d * h.values, f.mesh_id});
  }
  const MoscoReport m = mosco_study(op, f, seq, mesh, loads);
  add_mosco_rows(r, m, "mosco");
  const bool solved = std::all_of(m.records.begin(), m.records.end(), [](const MoscoRecord& x) { return x.error.empty(); });
  r.flags.push_back(flag("all_solved", solved));
  r.flags.push_back(flag("converged_10x", m.converged));
  r.flags.push_back(flag("limit_feasible", m.limit_feasible, "extrapolated violation " + num(m.limit_violation)));
  if (c.min_slope) r.flags.push_back(flag("slope", m.slope >= *c.min_slope, "slope " + num(m.slope)));
  r.notes.push_back("log-log slope of sup error vs delta: " + num(m.slope));
  return r;
}

StudyReport run_recovery(const StudyConfig& c) {
  StudyReport r{"recovery", {}, {}, {}};
  const Mesh mesh = build_mesh(c.mesh);
  const DiscreteOperator op = assemble_operator(mesh, c.coefficients);
  const DiscreteOperator mass = assemble_lumped_mass(mesh);
  const NodalVector w = nodal_field(*c.target, mesh, "target");
  std::optional<SetSequence> seq;
  if (c.constraint == "obstacle") {
    const NodalVector phi = nodal_field(*c.obstacle, mesh, "obstacle");
    const NodalVector g = c.perturbation ? nodal_field(*c.perturbation, mesh, "perturbation") : NodalVector(mesh, 1.0);
    seq = SetSequence::shifted_obstacle(mesh, phi, g, c.schedule);
  } else {
    const Eigen::VectorXd alpha = element_field(*c.alpha, mesh, "alpha");
    const Eigen::VectorXd g = c.perturbation ? element_field(*c.perturbation, mesh, "perturbation")
                                             : Eigen::VectorXd::Ones(static_cast<Eigen::Index>(mesh.num_elements()));
    seq = SetSequence::shifted_gradient(mesh, alpha, g, c.p, c.schedule, 0.0);
  }
  RecoveryConstruction kind = RecoveryConstruction::Scale;
  if (c.construction == "truncate") kind = RecoveryConstruction::Truncate;
  if (c.construction == "singular_perturbation") kind = RecoveryConstruction::SingularPerturbation;
  RecoveryContext ctx{&op, &op, &mass, c.nu};
  const RecoveryReport rep = recovery_study(w, *seq, kind, mesh, ctx);
  for (const auto& s : rep.trace.steps()) {
    ReportRow row;
    row.study = "recovery";
    row.n = s.n;
    row.h = mesh.h();
    row.delta = c.schedule[static_cast<std::size_t>(s.n - 1)];
    row.err_energy = s.distance;
    row.flag = s.feasible ? "feasible" : "infeasible";
    r.rows.push_back(row);
  }
  for (const auto& f : rep.failures) r.notes.push_back(f);
  r.flags.push_back(flag("preconditions", rep.failures.empty()));
  r.flags.push_back(flag("all_feasible", rep.trace.all_feasible()));
  r.flags.push_back(flag("converged_10x", rep.converged));
  return r;
}

StudyReport run_gamma(const StudyConfig& c) {
  StudyReport r{"gamma", {}, {}, {}};
  const Mesh mesh = build_mesh(c.mesh);
  const DiscreteOperator op = assemble_operator(mesh, c.coefficients);
  const LoadFunctional f = load_field(c.load, mesh, op, "load");
  const ConstraintSet K = ConstraintSet::nodal(mesh, nodal_field(*c.obstacle, mesh, "obstacle"));
  PerturbationScheme scheme;
  try {
    if (c.scheme == "tikhonov") scheme = PerturbationScheme::tikhonov(c.gamma_prime, c.alpha_exponent);
    if (c.scheme == "moreau_yosida") scheme = PerturbationScheme::moreau_yosida(c.schedule);
    if (c.scheme == "tikhonov_my") scheme = PerturbationScheme::tikhonov_my(c.schedule, c.gamma_prime, c.alpha_exponent);
    if (c.scheme == "galerkin_my") {
      std::vector<Mesh> hierarchy;
      for (int l : c.levels) hierarchy.push_back(build_mesh(c.mesh, l));
      scheme = PerturbationScheme::galerkin_my(std::move(hierarchy), c.schedule);
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("scheme: ") + e.what());
  }
  const GammaStudyReport g = gamma_study(op, f, K, scheme, mesh);
  for (const auto& rec : g.records) {
    ReportRow row;
    row.study = "gamma";
    row.n = rec.n;
    row.h = rec.h;
    row.gamma = scheme.kind == SchemeKind::Tikhonov ? rec.gamma_prime : rec.gamma;
    row.err_sup = rec.err_sup;
    row.err_l2 = rec.err_l2;
    row.err_energy = rec.err_energy;
    row.violation = rec.violation;
    row.iterations = rec.iterations;
    row.residual = rec.residual;
    row.flag = to_string(scheme.kind);
    r.rows.push_back(row);
  }
  r.flags.push_back(flag("converged", g.converged));
  r.notes.push_back("reference objective F(y*) = " + num(g.reference_objective));
  return r;
}

StudyReport run_fem(const StudyConfig& c) {
  StudyReport r{"fem", {}, {}, {}};
  ContinuumProblem problem;
  problem.coefficients = c.coefficients;
  problem.load = scalar_field(c.load, "load");
  if (c.obstacle) problem.obstacle = scalar_field(*c.obstacle, "obstacle");
  if (c.alpha) problem.alpha = scalar_field(*c.alpha, "alpha");
  problem.p = c.p;
  FemConstraint kind = FemConstraint::K2Nodal;
  if (c.constraint == "K1_midpoint") kind = FemConstraint::K1Midpoint;
  if (c.constraint == "Ki_gradient") kind = FemConstraint::KiGradient;
  const MoscoReport m = fem_constraint_study(problem, kind, build_levels(c));
  add_mosco_rows(r, m, "fem");
  std::vector<double> errs;
  for (const auto& row : r.rows) errs.push_back(*row.err_sup);
  r.flags.push_back(flag("errors_nonincreasing", nonincreasing(errs)));
  r.notes.push_back("log-log slope of sup error vs h: " + num(m.slope));
  return r;
}

QviOptions qvi_options(const StudyConfig& c) {
  QviOptions o;
  if (c.tol > 0) o.tol = c.tol;
  if (c.max_iter > 0) o.max_iter = c.max_iter;
  return o;
}

StudyReport run_qvi(const StudyConfig& c, const std::string& study) {
  StudyReport r{study, {}, {}, {}};
  const Mesh mesh = build_mesh(c.mesh);
  const DiscreteOperator op = assemble_operator(mesh, c.coefficients);
  const LoadFunctional f = load_field(c.load, mesh, op, "load");
  const ObstacleMap map = build_map(*c.map, mesh);
  const QviOptions opt = qvi_options(c);
  const HypothesisCheck inc = check_increasing(map, mesh, 50, c.seed);
  r.flags.push_back(flag("map_increasing", inc.passed, inc.message));

  const LoadFunctional f_max{c.f_max_factor * f.values, f.mesh_id};
  const QVISolution mn = minimal_solution(op, f, map, mesh, opt);
  const QVISolution mx = maximal_solution(op, f, map, mesh, f_max, opt);
  NodalVector gap = mx.y;
  gap.values() -= mn.y.values();
  const double spread = sup_norm(gap);
  bool feasible = true, residual_ok = true, comp_ok = true;
  int n = 0;
  for (const QVISolution* s : {&mn, &mx}) {
    const NodalVector phi = evaluate_obstacle(map, s->y, mesh);
    const double viol = std::max(0.0, simd::max_excess(s->y.span(), phi.span()));
    feasible = feasible && viol <= 1e-8;
    residual_ok = residual_ok && s->fixed_point_residual <= 10.0 * opt.tol;
    comp_ok = comp_ok && s->vi_residual <= c.complementarity_tol;
    ReportRow row;
    row.study = study;
    row.n = ++n;
    row.h = mesh.h();
    row.err_sup = spread;
    row.violation = viol;
    row.iterations = s->iterations;
    row.residual = s->fixed_point_residual;
    row.flag = to_string(s->kind);
    r.rows.push_back(row);
    r.notes.push_back(to_string(s->kind) + " complementarity residual " + num(s->vi_residual));
  }
  r.flags.push_back(flag("monotone_histories", true, "checked on every iterate"));
  r.flags.push_back(flag("minimal_le_maximal", gap.values().minCoeff() >= -1e-10));
  r.flags.push_back(flag("feasible", feasible));
  r.flags.push_back(flag("fixed_point_residual", residual_ok));
  if (study == "impulse") r.flags.push_back(flag("complementarity", comp_ok));
  return r;
}

StudyReport run_stability(const StudyConfig& c) {
  StudyReport r{"stability", {}, {}, {}};
  const Mesh mesh = build_mesh(c.mesh);
  const DiscreteOperator op = assemble_operator(mesh, c.coefficients);
  const LoadFunctional f = load_field(c.load, mesh, op, "load");
  const LoadFunctional g = c.perturbation ? load_field(*c.perturbation, mesh, op, "perturbation")
                                          : assemble_load(mesh, [](const Point&) { return 1.0; });
  const ObstacleMap map = build_map(*c.map, mesh);
  const StabilityReport s = stability_study(op, map, mesh, f, g, c.schedule, c.floor, qvi_options(c));
  for (const char* kind : {"minimal", "maximal"}) {
    const bool is_min = kind[1] == 'i';
    for (const auto& rec : s.records) {
      ReportRow row;
      row.study = "stability";
      row.n = rec.n;
      row.h = mesh.h();
      row.delta = rec.epsilon;
      row.err_sup = is_min ? rec.min_err_sup : rec.max_err_sup;
      row.err_l2 = is_min ? rec.min_err_l2 : rec.max_err_l2;
      row.iterations = is_min ? rec.min_iterations : rec.max_iterations;
      row.flag = kind;
      r.rows.push_back(row);
    }
  }
  r.flags.push_back(flag("scaling_hypothesis", s.scaling.passed, s.scaling.message));
  if (s.scaling.passed) {
    r.flags.push_back(flag("minimal_converged", s.converged_min));
    r.flags.push_back(flag("maximal_converged", s.converged_max));
  } else {
    r.notes.push_back("scaling hypothesis failed: convergence not asserted");
  }
  return r;
}

}  // namespace

StudyReport run_study(const StudyConfig& c) {
  if (c.kind == "vi") return run_vi(c);
  if (c.kind == "mosco") return run_mosco(c);
  if (c.kind == "recovery") return run_recovery(c);
  if (c.kind == "gamma") return run_gamma(c);
  if (c.kind == "fem") return run_fem(c);
  if (c.kind == "qvi") return run_qvi(c, "qvi");
  if (c.kind == "impulse") return run_qvi(c, "impulse");
  if (c.kind == "stability") return run_stability(c);
  throw ConfigError("study: unknown kind '" + c.kind + "'");
}

}  // namespace vilab::cli
