#include "vilab/assembly.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "vilab/error.hpp"

namespace vilab {
namespace {

constexpr int kCoercivityTrials = 64;

SparseMatrix extract(const SparseMatrix& full, const std::vector<int>& rows, const std::vector<int>& index) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(full.nonZeros()));
  for (Eigen::Index c = 0; c < full.outerSize(); ++c) {
    const int jc = index[static_cast<std::size_t>(c)];
    if (jc < 0) continue;
    for (SparseMatrix::InnerIterator it(full, c); it; ++it) {
      const int ir = index[static_cast<std::size_t>(it.row())];
      if (ir >= 0) trip.emplace_back(ir, jc, it.value());
    }
  }
  SparseMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace

DiscreteOperator::DiscreteOperator(const Mesh& mesh, SparseMatrix full) : full_(std::move(full)), mesh_id_(mesh.id()) {
  const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
  if (full_.rows() != n || full_.cols() != n) throw InvalidArgument("DiscreteOperator: matrix size != node count");
  free_index_.assign(mesh.num_nodes(), -1);
  for (int i = 0; i < static_cast<int>(n); ++i) {
    if (mesh.is_boundary(i)) continue;
    free_index_[static_cast<std::size_t>(i)] = static_cast<int>(free_nodes_.size());
    free_nodes_.push_back(i);
  }
  if (free_nodes_.empty()) throw InvalidArgument("DiscreteOperator: mesh has no free nodes");
  matrix_ = extract(full_, free_nodes_, free_index_);
  finalize();
}

DiscreteOperator::DiscreteOperator(SparseMatrix matrix) : full_(matrix), matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0)
    throw InvalidArgument("DiscreteOperator: matrix must be square and nonempty");
  free_nodes_.resize(static_cast<std::size_t>(matrix_.rows()));
  for (std::size_t i = 0; i < free_nodes_.size(); ++i) free_nodes_[i] = static_cast<int>(i);
  free_index_ = free_nodes_;
  finalize();
}

void DiscreteOperator::finalize() {
  matrix_.makeCompressed();
  SparseMatrix t = matrix_.transpose();
  sym_ = 0.5 * (matrix_ + t);
  symmetric_ = (matrix_ - t).norm() == 0.0;
  is_m_matrix_ = check_m_matrix(matrix_);
  coercivity_ = estimate_coercivity(matrix_, kCoercivityTrials);
}

Eigen::VectorXd DiscreteOperator::restrict(const NodalVector& v) const {
  if (v.size() != num_nodes() || (mesh_id_ != 0 && v.mesh_id() != mesh_id_))
    throw MeshMismatch("DiscreteOperator::restrict: vector is not on the operator's mesh");
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  for (std::size_t k = 0; k < free_nodes_.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[static_cast<std::size_t>(free_nodes_[k])];
  return out;
}

NodalVector DiscreteOperator::extend(const Eigen::VectorXd& free_values) const {
  if (free_values.size() != static_cast<Eigen::Index>(size())) throw InvalidArgument("extend: wrong length");
  NodalVector out(mesh_id_, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_nodes())));
  for (std::size_t k = 0; k < free_nodes_.size(); ++k) out[static_cast<std::size_t>(free_nodes_[k])] = free_values[static_cast<Eigen::Index>(k)];
  return out;
}

double DiscreteOperator::energy_norm(const Eigen::VectorXd& v) const {
  if (v.size() != static_cast<Eigen::Index>(size())) throw InvalidArgument("energy_norm: wrong length");
  return std::sqrt(std::max(0.0, v.dot(sym_ * v)));
}

double DiscreteOperator::energy_norm(const NodalVector& v) const { return energy_norm(restrict(v)); }

Eigen::VectorXd DiscreteOperator::apply_full(const NodalVector& v) const {
  if (v.size() != num_nodes() || (mesh_id_ != 0 && v.mesh_id() != mesh_id_))
    throw MeshMismatch("apply_full: vector is not on the operator's mesh");
  const Eigen::VectorXd all = full_ * v.values();
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  for (std::size_t k = 0; k < free_nodes_.size(); ++k) out[static_cast<Eigen::Index>(k)] = all[free_nodes_[k]];
  return out;
}

DiscreteOperator assemble_operator(const Mesh& mesh, const Coefficients& c) {
  const bool per_element = !c.diffusion_per_element.empty();
  if (per_element && c.diffusion_per_element.size() != mesh.num_elements())
    throw InvalidArgument("assemble_operator: diffusion_per_element needs one value per element");
  if (!per_element && !(c.diffusion > 0.0)) throw InvalidArgument("assemble_operator: diffusion must be positive");
  for (double k : c.diffusion_per_element)
    if (!(k > 0.0)) throw InvalidArgument("assemble_operator: diffusion must be positive");
  if (!(c.reaction >= 0.0)) throw InvalidArgument("assemble_operator: reaction must be nonnegative");

  const int nv = mesh.vertices_per_element();
  const int dim = mesh.dim();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.num_elements() * static_cast<std::size_t>(nv * nv));
  const auto els = mesh.elements();
  for (std::size_t e = 0; e < els.size(); ++e) {
    const double kappa = per_element ? c.diffusion_per_element[e] : c.diffusion;
    const double area = mesh.measure(e);
    const auto& g = mesh.basis_gradients(e);
    for (int k = 0; k < nv; ++k) {
      for (int l = 0; l < nv; ++l) {
        double gg = 0.0, bg = 0.0;
        for (int d = 0; d < dim; ++d) {
          gg += g[k][d] * g[l][d];
          bg += c.advection[d] * g[l][d];
        }
        double v = kappa * area * gg + bg * area / nv;
        if (k == l) v += c.reaction * area / nv;
        trip.emplace_back(els[e][k], els[e][l], v);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
  SparseMatrix full(n, n);
  full.setFromTriplets(trip.begin(), trip.end());
  return DiscreteOperator(mesh, std::move(full));
}

DiscreteOperator assemble_lumped_mass(const Mesh& mesh) {
  const Eigen::VectorXd m = lumped_mass_diagonal(mesh);
  const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
  SparseMatrix full(n, n);
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, m[i]);
  full.setFromTriplets(trip.begin(), trip.end());
  return DiscreteOperator(mesh, std::move(full));
}

LoadFunctional assemble_load(const Mesh& mesh, const ScalarField& f) {
  const Eigen::VectorXd fm = sample_midpoints(f, mesh);
  const int nv = mesh.vertices_per_element();
  Eigen::VectorXd all = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
  const auto els = mesh.elements();
  for (std::size_t e = 0; e < els.size(); ++e) {
    const double contrib = mesh.measure(e) * fm[static_cast<Eigen::Index>(e)] / nv;
    for (int k = 0; k < nv; ++k) all[els[e][k]] += contrib;
  }
  Eigen::VectorXd free;
  std::vector<double> vals;
  for (int i = 0; i < static_cast<int>(mesh.num_nodes()); ++i)
    if (!mesh.is_boundary(i)) vals.push_back(all[i]);
  free = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return {free, mesh.id()};
}

LoadFunctional load_from_values(const DiscreteOperator& op, Eigen::VectorXd values) {
  if (values.size() != static_cast<Eigen::Index>(op.size())) throw InvalidArgument("load_from_values: wrong length");
  return {std::move(values), op.mesh_id()};
}

Eigen::VectorXd solve_linear(const SparseMatrix& matrix, const Eigen::VectorXd& rhs) {
  if (rhs.size() != matrix.rows()) throw InvalidArgument("solve_linear: rhs length mismatch");
  if (rhs.size() == 0) return rhs;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(matrix);
  if (lu.info() != Eigen::Success)
    throw SolverError("solve_linear: singular system (condition estimate inf): " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(rhs);
  const double res = (matrix * x - rhs).lpNorm<Eigen::Infinity>();
  const double bound = 1e-10 * (1.0 + rhs.lpNorm<Eigen::Infinity>());
  if (!std::isfinite(res) || res > bound) {
    // crude lower bound on cond_1 from the solve we already have
    double anorm = 0.0;
    for (Eigen::Index c = 0; c < matrix.outerSize(); ++c) anorm = std::max(anorm, matrix.col(c).cwiseAbs().sum());
    const double cond = anorm * x.lpNorm<1>() / std::max(rhs.lpNorm<1>(), std::numeric_limits<double>::min());
    std::ostringstream msg;
    msg << "solve_linear: ill-conditioned system, residual " << res << ", condition estimate >= " << cond;
    throw SolverError(msg.str(), 1, res);
  }
  return x;
}

NodalVector solve_linear(const DiscreteOperator& op, const LoadFunctional& load) {
  if (op.mesh_id() != 0 && load.mesh_id != op.mesh_id()) throw MeshMismatch("solve_linear: load and operator meshes differ");
  return op.extend(solve_linear(op.matrix(), load.values));
}

bool check_m_matrix(const SparseMatrix& a) {
  const Eigen::Index n = a.rows();
  if (n != a.cols() || n == 0) return false;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd offsum = Eigen::VectorXd::Zero(n);
  double scale = 0.0;
  for (Eigen::Index c = 0; c < a.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
      if (it.row() == it.col()) {
        diag[it.row()] += it.value();
        scale = std::max(scale, std::abs(it.value()));
      }
    }
  const double tol = 1e-12 * scale;
  for (Eigen::Index c = 0; c < a.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
      if (it.row() == it.col()) continue;
      if (it.value() > tol) return false;
      offsum[it.row()] += std::abs(it.value());
    }
  bool strict = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(diag[i] > 0.0)) return false;
    const double slack = diag[i] - offsum[i];
    if (slack < -tol) return false;
    if (slack > tol) strict = true;
  }
  return strict;
}

bool check_m_matrix(const DiscreteOperator& op) { return check_m_matrix(op.matrix()); }

double estimate_coercivity(const SparseMatrix& a, int trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("estimate_coercivity: trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index n = a.rows();
  if (n == 0) return std::numeric_limits<double>::infinity();
  const SparseMatrix sym = 0.5 * (a + SparseMatrix(a.transpose()));
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = normal(rng);
  x.normalize();
  // inverse iteration drives the Rayleigh quotient down to the smallest eigenvalue
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu(sym);
  double best = x.dot(sym * x);
  if (lu.info() != Eigen::Success) return std::min(best, 0.0);
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd next = lu.solve(x);
    const double nn = next.norm();
    if (!(nn > 0.0) || !std::isfinite(nn)) break;
    x = next / nn;
    best = std::min(best, x.dot(sym * x));
  }
  return best;
}

double estimate_coercivity(const DiscreteOperator& op, int trials, std::uint64_t seed) {
  return estimate_coercivity(op.matrix(), trials, seed);
}

SparseMatrix prolongation_matrix(const Mesh& coarse, const Mesh& fine) {
  if (coarse.dim() != fine.dim()) throw MeshMismatch("prolongation_matrix: dimension mismatch");
  std::vector<double> unit(coarse.num_nodes(), 0.0);
  std::vector<Eigen::Triplet<double>> trip;
  const auto nodes = fine.nodes();
  const auto els = coarse.elements();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto e = coarse.locate(nodes[i]);
    if (!e) throw MeshMismatch("prolongation_matrix: fine node outside the coarse mesh");
    for (int k = 0; k < coarse.vertices_per_element(); ++k) {
      const int j = els[*e][k];
      unit[static_cast<std::size_t>(j)] = 1.0;
      const double w = coarse.evaluate(unit, nodes[i]);
      unit[static_cast<std::size_t>(j)] = 0.0;
      if (std::abs(w) > 1e-14) trip.emplace_back(static_cast<int>(i), j, w);
    }
  }
  SparseMatrix p(static_cast<Eigen::Index>(fine.num_nodes()), static_cast<Eigen::Index>(coarse.num_nodes()));
  p.setFromTriplets(trip.begin(), trip.end());
  return p;
}

std::vector<int> injection_map(const Mesh& coarse, const Mesh& fine) {
  if (coarse.dim() != fine.dim()) throw MeshMismatch("injection_map: dimension mismatch");
  std::vector<int> map(coarse.num_nodes(), -1);
  const auto cn = coarse.nodes();
  const auto fn = fine.nodes();
  const double tol = 1e-10 * std::max(1.0, fine.h());
  for (std::size_t i = 0; i < cn.size(); ++i) {
    const auto e = fine.locate(cn[i]);
    if (e) {
      for (int k = 0; k < fine.vertices_per_element(); ++k) {
        const int j = fine.elements()[*e][k];
        const auto& q = fn[static_cast<std::size_t>(j)];
        if (std::abs(q[0] - cn[i][0]) <= tol && std::abs(q[1] - cn[i][1]) <= tol) map[i] = j;
      }
    }
    if (map[i] < 0) throw MeshMismatch("injection_map: coarse node is not a fine node");
  }
  return map;
}

}  // namespace vilab
