#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>

#include "vilab/mesh.hpp"

namespace vilab {

/// One real per mesh node, tagged with the fingerprint of its mesh.
class NodalVector {
 public:
  NodalVector() = default;
  explicit NodalVector(const Mesh& mesh, double fill = 0.0)
      : values_(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh.num_nodes()), fill)), mesh_id_(mesh.id()) {}
  NodalVector(std::uint64_t mesh_id, Eigen::VectorXd values) : values_(std::move(values)), mesh_id_(mesh_id) {}

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  std::uint64_t mesh_id() const { return mesh_id_; }

  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return values_[static_cast<Eigen::Index>(i)]; }

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  std::span<const double> span() const { return {values_.data(), size()}; }
  std::span<double> span() { return {values_.data(), size()}; }

  bool same_mesh(const NodalVector& other) const { return mesh_id_ == other.mesh_id_ && size() == other.size(); }

 private:
  Eigen::VectorXd values_;
  std::uint64_t mesh_id_ = 0;
};

/// Throws MeshMismatch unless both vectors live on the same mesh.
void require_same_mesh(const NodalVector& a, const NodalVector& b, const char* where);
void require_on_mesh(const NodalVector& v, const Mesh& mesh, const char* where);

/// Nodal interpolant I_h f. Throws if f is not finite at some node.
NodalVector interpolate_nodal(const ScalarField& f, const Mesh& mesh);

/// Per-element values sampled at the barycenters.
Eigen::VectorXd sample_midpoints(const ScalarField& f, const Mesh& mesh);

/// P1 values at the element barycenters.
Eigen::VectorXd midpoint_values(const NodalVector& v, const Mesh& mesh);

/// Per-element gradient of the P1 function (first dim components used).
std::vector<Point> element_gradients(const NodalVector& v, const Mesh& mesh);

/// Diagonal of the lumped mass matrix over all nodes.
Eigen::VectorXd lumped_mass_diagonal(const Mesh& mesh);

double sup_norm(const NodalVector& v);
double sup_distance(const NodalVector& a, const NodalVector& b);
/// Discrete L2 (lumped mass) norm.
double l2_norm(const NodalVector& v, const Mesh& mesh);

/// Coefficients of a coarse P1 function evaluated at the nodes of a finer mesh.
NodalVector prolongate(const NodalVector& coarse, const Mesh& coarse_mesh, const Mesh& fine_mesh);

/// Sup-norm distance between the P1 reconstruction of v and f, sampled on a
/// uniform grid of `samples` points per axis.
double reconstruction_error(const NodalVector& v, const Mesh& mesh, const ScalarField& f, int samples = 10000);

}  // namespace vilab
