#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "vilab/mesh.hpp"
#include "vilab/nodal.hpp"

namespace vilab {

/// Coefficients of -div(k grad u) + b.grad u + c u.
struct Coefficients {
  double diffusion = 1.0;
  /// Overrides `diffusion` when non-empty; one value per element.
  std::vector<double> diffusion_per_element;
  Point advection{0.0, 0.0};
  double reaction = 0.0;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Sparse operator over the free (non-Dirichlet) nodes of a mesh, with the
/// structural flags the order theory relies on.
class DiscreteOperator {
 public:
  /// Operator on a mesh: `full` is the N x N matrix over all nodes.
  DiscreteOperator(const Mesh& mesh, SparseMatrix full);
  /// Raw operator without a mesh; every index is a free node.
  explicit DiscreteOperator(SparseMatrix matrix);

  std::size_t size() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t num_nodes() const { return free_index_.size(); }
  std::uint64_t mesh_id() const { return mesh_id_; }

  /// Reduced free x free matrix.
  const SparseMatrix& matrix() const { return matrix_; }
  /// Matrix over all nodes, Dirichlet rows included.
  const SparseMatrix& full() const { return full_; }
  /// (A + A^T) / 2 over the free nodes.
  const SparseMatrix& symmetric_part() const { return sym_; }

  std::span<const int> free_nodes() const { return free_nodes_; }
  /// Free-node index of a mesh node, -1 on the Dirichlet boundary.
  int free_index(int node) const { return free_index_[static_cast<std::size_t>(node)]; }

  bool is_m_matrix() const { return is_m_matrix_; }
  bool symmetric() const { return symmetric_; }
  double coercivity_estimate() const { return coercivity_; }

  Eigen::VectorXd restrict(const NodalVector& v) const;
  /// Free values extended by zero Dirichlet data.
  NodalVector extend(const Eigen::VectorXd& free_values) const;

  /// sqrt(v^T A_sym v) over the free nodes.
  double energy_norm(const NodalVector& v) const;
  double energy_norm(const Eigen::VectorXd& free_values) const;

  /// Free rows of the full matrix applied to an all-node vector.
  Eigen::VectorXd apply_full(const NodalVector& v) const;

 private:
  void finalize();

  SparseMatrix full_;
  SparseMatrix matrix_;
  SparseMatrix sym_;
  std::vector<int> free_nodes_;
  std::vector<int> free_index_;
  std::uint64_t mesh_id_ = 0;
  bool is_m_matrix_ = false;
  bool symmetric_ = false;
  double coercivity_ = 0.0;
};

/// Dual-pairing coefficients over the free nodes.
struct LoadFunctional {
  Eigen::VectorXd values;
  std::uint64_t mesh_id = 0;
};

DiscreteOperator assemble_operator(const Mesh& mesh, const Coefficients& coefficients);
/// Lumped mass matrix as an operator over the free nodes.
DiscreteOperator assemble_lumped_mass(const Mesh& mesh);

/// Midpoint-rule load: entry i = sum_T |T| f(x_T) phi_i(x_T).
LoadFunctional assemble_load(const Mesh& mesh, const ScalarField& f);
LoadFunctional load_from_values(const DiscreteOperator& op, Eigen::VectorXd values);

/// Direct sparse solve. Throws SolverError with a condition estimate on
/// singular or inaccurate systems.
NodalVector solve_linear(const DiscreteOperator& op, const LoadFunctional& load);
Eigen::VectorXd solve_linear(const SparseMatrix& matrix, const Eigen::VectorXd& rhs);

/// Sign pattern, positive diagonal and weak diagonal dominance with at least
/// one strictly dominant row.
bool check_m_matrix(const SparseMatrix& matrix);
bool check_m_matrix(const DiscreteOperator& op);

/// Smallest eigenvalue of the symmetric part, estimated by `trials` steps of
/// inverse iteration from a seeded random start (an upper bound on the
/// coercivity constant, tight once the iteration has converged).
double estimate_coercivity(const SparseMatrix& matrix, int trials, std::uint64_t seed = 0x5eed);
double estimate_coercivity(const DiscreteOperator& op, int trials, std::uint64_t seed = 0x5eed);

/// Matrix mapping coarse nodal values to fine nodal values (all nodes).
SparseMatrix prolongation_matrix(const Mesh& coarse, const Mesh& fine);
/// For every coarse node, the index of the coincident fine node. Throws if a
/// coarse node has no match.
std::vector<int> injection_map(const Mesh& coarse, const Mesh& fine);

}  // namespace vilab
