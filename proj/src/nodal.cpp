#include "vilab/nodal.hpp"

#include <cmath>
#include <string>

#include "vilab/error.hpp"
#include "vilab/simd.hpp"

namespace vilab {

void require_same_mesh(const NodalVector& a, const NodalVector& b, const char* where) {
  if (!a.same_mesh(b)) throw MeshMismatch(std::string(where) + ": vectors live on different meshes");
}

void require_on_mesh(const NodalVector& v, const Mesh& mesh, const char* where) {
  if (v.mesh_id() != mesh.id() || v.size() != mesh.num_nodes())
    throw MeshMismatch(std::string(where) + ": vector does not belong to this mesh");
}

NodalVector interpolate_nodal(const ScalarField& f, const Mesh& mesh) {
  NodalVector v(mesh);
  const auto nodes = mesh.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double fx = f(nodes[i]);
    if (!std::isfinite(fx)) throw InvalidArgument("interpolate_nodal: non-finite value at node " + std::to_string(i));
    v[i] = fx;
  }
  return v;
}

Eigen::VectorXd sample_midpoints(const ScalarField& f, const Mesh& mesh) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(mesh.num_elements()));
  const auto mids = mesh.midpoints();
  for (std::size_t e = 0; e < mids.size(); ++e) {
    const double v = f(mids[e]);
    if (!std::isfinite(v)) throw InvalidArgument("sample_midpoints: non-finite value at element " + std::to_string(e));
    out[static_cast<Eigen::Index>(e)] = v;
  }
  return out;
}

Eigen::VectorXd midpoint_values(const NodalVector& v, const Mesh& mesh) {
  require_on_mesh(v, mesh, "midpoint_values");
  Eigen::VectorXd out(static_cast<Eigen::Index>(mesh.num_elements()));
  const int nv = mesh.vertices_per_element();
  const auto els = mesh.elements();
  for (std::size_t e = 0; e < els.size(); ++e) {
    double s = 0.0;
    for (int k = 0; k < nv; ++k) s += v[static_cast<std::size_t>(els[e][k])];
    out[static_cast<Eigen::Index>(e)] = s / nv;
  }
  return out;
}

std::vector<Point> element_gradients(const NodalVector& v, const Mesh& mesh) {
  require_on_mesh(v, mesh, "element_gradients");
  std::vector<Point> out(mesh.num_elements(), Point{0.0, 0.0});
  const int nv = mesh.vertices_per_element();
  const auto els = mesh.elements();
  for (std::size_t e = 0; e < els.size(); ++e) {
    const auto& g = mesh.basis_gradients(e);
    for (int k = 0; k < nv; ++k) {
      const double c = v[static_cast<std::size_t>(els[e][k])];
      out[e][0] += c * g[k][0];
      out[e][1] += c * g[k][1];
    }
  }
  return out;
}

Eigen::VectorXd lumped_mass_diagonal(const Mesh& mesh) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
  const int nv = mesh.vertices_per_element();
  const auto els = mesh.elements();
  for (std::size_t e = 0; e < els.size(); ++e)
    for (int k = 0; k < nv; ++k) m[els[e][k]] += mesh.measure(e) / nv;
  return m;
}

double sup_norm(const NodalVector& v) { return simd::max_abs(v.span()); }

double sup_distance(const NodalVector& a, const NodalVector& b) {
  require_same_mesh(a, b, "sup_distance");
  return simd::max_abs_diff(a.span(), b.span());
}

double l2_norm(const NodalVector& v, const Mesh& mesh) {
  require_on_mesh(v, mesh, "l2_norm");
  const Eigen::VectorXd m = lumped_mass_diagonal(mesh);
  return std::sqrt(simd::weighted_dot({m.data(), static_cast<std::size_t>(m.size())}, v.span(), v.span()));
}

NodalVector prolongate(const NodalVector& coarse, const Mesh& coarse_mesh, const Mesh& fine_mesh) {
  require_on_mesh(coarse, coarse_mesh, "prolongate");
  NodalVector out(fine_mesh);
  const auto nodes = fine_mesh.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = coarse_mesh.evaluate(coarse.span(), nodes[i]);
  return out;
}

double reconstruction_error(const NodalVector& v, const Mesh& mesh, const ScalarField& f, int samples) {
  require_on_mesh(v, mesh, "reconstruction_error");
  double err = 0.0;
  const auto& layout = mesh.layout();
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (layout) {
    x0 = layout->box.x0;
    x1 = layout->box.x1;
    y0 = layout->box.y0;
    y1 = layout->box.y1;
  } else {
    x0 = x1 = mesh.nodes()[0][0];
    y0 = y1 = mesh.nodes()[0][1];
    for (const auto& p : mesh.nodes()) {
      x0 = std::min(x0, p[0]);
      x1 = std::max(x1, p[0]);
      y0 = std::min(y0, p[1]);
      y1 = std::max(y1, p[1]);
    }
  }
  if (mesh.dim() == 1) {
    for (int s = 0; s < samples; ++s) {
      const Point p{x0 + (x1 - x0) * s / (samples - 1.0), 0.0};
      err = std::max(err, std::abs(mesh.evaluate(v.span(), p) - f(p)));
    }
  } else {
    const int per_axis = std::max(2, static_cast<int>(std::sqrt(static_cast<double>(samples))));
    for (int j = 0; j < per_axis; ++j)
      for (int i = 0; i < per_axis; ++i) {
        const Point p{x0 + (x1 - x0) * i / (per_axis - 1.0), y0 + (y1 - y0) * j / (per_axis - 1.0)};
        if (!mesh.locate(p)) continue;
        err = std::max(err, std::abs(mesh.evaluate(v.span(), p) - f(p)));
      }
  }
  return err;
}

}  // namespace vilab
