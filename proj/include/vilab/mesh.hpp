#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace vilab {

/// Point in the plane; 1D meshes leave the second coordinate at zero.
using Point = std::array<double, 2>;

/// Simplex as node indices; 1D segments leave the last slot at -1.
using Element = std::array<int, 3>;

using ScalarField = std::function<double(const Point&)>;

struct Rectangle {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

/// Parameters of a built-in uniform generator, kept so the mesh can be refined
/// and points located without a search.
struct StructuredLayout {
  int nx = 1;
  int ny = 0;  // 0 for interval meshes
  Rectangle box;
};

/// Simplicial mesh in 1D or 2D. Immutable after construction.
class Mesh {
 public:
  /// Validates indices and derives h, midpoints and the fingerprint.
  Mesh(int dim, std::vector<Point> nodes, std::vector<Element> elements, std::vector<int> boundary_nodes,
       std::optional<StructuredLayout> layout = std::nullopt);

  int dim() const { return dim_; }
  int vertices_per_element() const { return dim_ + 1; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_elements() const { return elements_.size(); }

  std::span<const Point> nodes() const { return nodes_; }
  std::span<const Element> elements() const { return elements_; }
  std::span<const int> boundary_nodes() const { return boundary_; }
  bool is_boundary(int node) const { return boundary_flag_[static_cast<std::size_t>(node)] != 0; }
  /// Barycenters x_T, one per element.
  std::span<const Point> midpoints() const { return midpoints_; }

  double h() const { return h_; }
  double measure(std::size_t e) const { return measure_[e]; }
  double diameter(std::size_t e) const;
  /// Diameter of the largest inscribed ball; equals the diameter in 1D.
  double inball_diameter(std::size_t e) const;

  /// Gradients of the local barycentric basis functions of element e
  /// (only the first dim components and dim+1 entries are meaningful).
  const std::array<Point, 3>& basis_gradients(std::size_t e) const { return grads_[e]; }

  /// Structural fingerprint; equal meshes share an id.
  std::uint64_t id() const { return id_; }

  const std::optional<StructuredLayout>& layout() const { return layout_; }

  /// Element containing p, or nullopt if p lies outside the mesh.
  std::optional<std::size_t> locate(const Point& p) const;

  /// Value of the P1 function with the given nodal coefficients at p.
  double evaluate(std::span<const double> nodal, const Point& p) const;

 private:
  std::array<double, 3> barycentric(std::size_t e, const Point& p) const;

  int dim_;
  std::vector<Point> nodes_;
  std::vector<Element> elements_;
  std::vector<int> boundary_;
  std::vector<char> boundary_flag_;
  std::vector<Point> midpoints_;
  std::vector<double> measure_;
  std::vector<std::array<Point, 3>> grads_;
  std::optional<StructuredLayout> layout_;
  double h_ = 0.0;
  std::uint64_t id_ = 0;
};

Mesh build_interval_mesh(int n_cells, double a, double b);

/// Uniform grid on the rectangle, each cell split along its lower-left to
/// upper-right diagonal into two right triangles.
Mesh build_triangle_mesh(int nx, int ny, const Rectangle& box = {});

/// Uniform refinement of a generator-built mesh (halves h).
Mesh refine(const Mesh& mesh);

/// True when every node of `coarse` is a node of `fine` and both cover the
/// same domain with nested structured layouts.
bool is_nested(const Mesh& coarse, const Mesh& fine);

double mesh_size(const Mesh& mesh);
double shape_regularity(const Mesh& mesh);

/// Plain-text mesh I/O: header `dim n_nodes n_elems`, node lines, 0-based
/// element lines, then a single line of boundary node indices.
Mesh read_mesh_file(const std::filesystem::path& path);
void write_mesh_file(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace vilab
