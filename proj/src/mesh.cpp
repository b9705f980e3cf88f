#include "vilab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "vilab/error.hpp"
#include "vilab/hash.hpp"

namespace vilab {
namespace {

double distance(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

}  // namespace

Mesh::Mesh(int dim, std::vector<Point> nodes, std::vector<Element> elements, std::vector<int> boundary_nodes,
           std::optional<StructuredLayout> layout)
    : dim_(dim),
      nodes_(std::move(nodes)),
      elements_(std::move(elements)),
      boundary_(std::move(boundary_nodes)),
      layout_(layout) {
  if (dim_ != 1 && dim_ != 2) throw InvalidArgument("mesh: dim must be 1 or 2");
  if (nodes_.empty() || elements_.empty()) throw InvalidArgument("mesh: no nodes or no elements");
  const int n_nodes = static_cast<int>(nodes_.size());
  const int nv = dim_ + 1;

  for (const auto& el : elements_) {
    for (int k = 0; k < nv; ++k) {
      if (el[k] < 0 || el[k] >= n_nodes) throw InvalidArgument("mesh: element node index out of range");
      for (int l = 0; l < k; ++l)
        if (el[k] == el[l]) throw InvalidArgument("mesh: repeated node in element");
    }
  }
  boundary_flag_.assign(nodes_.size(), 0);
  for (int b : boundary_) {
    if (b < 0 || b >= n_nodes) throw InvalidArgument("mesh: boundary index out of range");
    boundary_flag_[static_cast<std::size_t>(b)] = 1;
  }
  std::sort(boundary_.begin(), boundary_.end());
  boundary_.erase(std::unique(boundary_.begin(), boundary_.end()), boundary_.end());

  midpoints_.resize(elements_.size());
  measure_.resize(elements_.size());
  grads_.resize(elements_.size());
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& el = elements_[e];
    Point c{0.0, 0.0};
    for (int k = 0; k < nv; ++k) {
      c[0] += nodes_[el[k]][0] / nv;
      c[1] += nodes_[el[k]][1] / nv;
    }
    midpoints_[e] = c;
    std::array<Point, 3> g{};
    if (dim_ == 1) {
      const double len = nodes_[el[1]][0] - nodes_[el[0]][0];
      if (!(std::abs(len) > 0.0)) throw InvalidArgument("mesh: degenerate segment");
      measure_[e] = std::abs(len);
      g[0] = {-1.0 / len, 0.0};
      g[1] = {1.0 / len, 0.0};
    } else {
      const Point& p0 = nodes_[el[0]];
      const double a = nodes_[el[1]][0] - p0[0], b = nodes_[el[2]][0] - p0[0];
      const double c2 = nodes_[el[1]][1] - p0[1], d = nodes_[el[2]][1] - p0[1];
      const double det = a * d - b * c2;
      if (!(std::abs(det) > 0.0)) throw InvalidArgument("mesh: degenerate triangle");
      measure_[e] = 0.5 * std::abs(det);
      // rows of J^{-T} with J = [[a, b], [c2, d]]
      g[1] = {d / det, -b / det};
      g[2] = {-c2 / det, a / det};
      g[0] = {-g[1][0] - g[2][0], -g[1][1] - g[2][1]};
    }
    grads_[e] = g;
    h_ = std::max(h_, diameter(e));
  }

  Fnv1a hash;
  hash.value(dim_);
  for (const auto& p : nodes_) hash.value(p);
  for (const auto& el : elements_) hash.value(el);
  for (int b : boundary_) hash.value(b);
  id_ = hash.digest();
}

double Mesh::diameter(std::size_t e) const {
  const auto& el = elements_[e];
  if (dim_ == 1) return distance(nodes_[el[0]], nodes_[el[1]]);
  return std::max({distance(nodes_[el[0]], nodes_[el[1]]), distance(nodes_[el[1]], nodes_[el[2]]),
                   distance(nodes_[el[0]], nodes_[el[2]])});
}

double Mesh::inball_diameter(std::size_t e) const {
  if (dim_ == 1) return diameter(e);
  const auto& el = elements_[e];
  const double perimeter = distance(nodes_[el[0]], nodes_[el[1]]) + distance(nodes_[el[1]], nodes_[el[2]]) +
                           distance(nodes_[el[0]], nodes_[el[2]]);
  return 2.0 * (2.0 * measure_[e] / perimeter);
}

std::array<double, 3> Mesh::barycentric(std::size_t e, const Point& p) const {
  const auto& el = elements_[e];
  const auto& g = grads_[e];
  const Point& p0 = nodes_[el[0]];
  std::array<double, 3> lam{};
  if (dim_ == 1) {
    lam[1] = g[1][0] * (p[0] - p0[0]);
    lam[0] = 1.0 - lam[1];
  } else {
    lam[1] = g[1][0] * (p[0] - p0[0]) + g[1][1] * (p[1] - p0[1]);
    lam[2] = g[2][0] * (p[0] - p0[0]) + g[2][1] * (p[1] - p0[1]);
    lam[0] = 1.0 - lam[1] - lam[2];
  }
  return lam;
}

std::optional<std::size_t> Mesh::locate(const Point& p) const {
  constexpr double tol = 1e-12;
  if (layout_) {
    const auto& L = *layout_;
    const double sx = (p[0] - L.box.x0) / (L.box.x1 - L.box.x0) * L.nx;
    if (sx < -tol * L.nx || sx > L.nx * (1 + tol)) return std::nullopt;
    const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, L.nx - 1);
    if (dim_ == 1) return static_cast<std::size_t>(i);
    const double sy = (p[1] - L.box.y0) / (L.box.y1 - L.box.y0) * L.ny;
    if (sy < -tol * L.ny || sy > L.ny * (1 + tol)) return std::nullopt;
    const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, L.ny - 1);
    const double s = sx - i, t = sy - j;
    const std::size_t cell = static_cast<std::size_t>(j) * L.nx + static_cast<std::size_t>(i);
    return 2 * cell + (s >= t ? 0 : 1);
  }
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto lam = barycentric(e, p);
    bool inside = true;
    for (int k = 0; k <= dim_; ++k) inside = inside && lam[k] >= -1e-12;
    if (inside) return e;
  }
  return std::nullopt;
}

double Mesh::evaluate(std::span<const double> nodal, const Point& p) const {
  if (nodal.size() != nodes_.size()) throw InvalidArgument("mesh::evaluate: coefficient count mismatch");
  const auto e = locate(p);
  if (!e) throw InvalidArgument("mesh::evaluate: point outside mesh");
  const auto lam = barycentric(*e, p);
  const auto& el = elements_[*e];
  double v = 0.0;
  for (int k = 0; k <= dim_; ++k) v += lam[k] * nodal[static_cast<std::size_t>(el[k])];
  return v;
}

Mesh build_interval_mesh(int n_cells, double a, double b) {
  if (n_cells < 1) throw InvalidArgument("build_interval_mesh: n_cells must be >= 1");
  if (!(a < b)) throw InvalidArgument("build_interval_mesh: need a < b");
  std::vector<Point> nodes(static_cast<std::size_t>(n_cells) + 1);
  for (int i = 0; i <= n_cells; ++i) {
    // endpoints exactly, interior by the same affine formula so refinements nest bitwise
    nodes[i] = {i == n_cells ? b : a + (b - a) * (static_cast<double>(i) / n_cells), 0.0};
  }
  std::vector<Element> elements(static_cast<std::size_t>(n_cells));
  for (int i = 0; i < n_cells; ++i) elements[i] = {i, i + 1, -1};
  return Mesh(1, std::move(nodes), std::move(elements), {0, n_cells}, StructuredLayout{n_cells, 0, {a, b, 0.0, 0.0}});
}

Mesh build_triangle_mesh(int nx, int ny, const Rectangle& box) {
  if (nx < 1 || ny < 1) throw InvalidArgument("build_triangle_mesh: nx and ny must be >= 1");
  if (!(box.x0 < box.x1) || !(box.y0 < box.y1)) throw InvalidArgument("build_triangle_mesh: empty rectangle");
  std::vector<Point> nodes;
  nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  std::vector<int> boundary;
  for (int j = 0; j <= ny; ++j) {
    const double y = j == ny ? box.y1 : box.y0 + (box.y1 - box.y0) * (static_cast<double>(j) / ny);
    for (int i = 0; i <= nx; ++i) {
      const double x = i == nx ? box.x1 : box.x0 + (box.x1 - box.x0) * (static_cast<double>(i) / nx);
      if (i == 0 || j == 0 || i == nx || j == ny) boundary.push_back(static_cast<int>(nodes.size()));
      nodes.push_back({x, y});
    }
  }
  std::vector<Element> elements;
  elements.reserve(static_cast<std::size_t>(2 * nx * ny));
  const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int ll = id(i, j), lr = id(i + 1, j), ur = id(i + 1, j + 1), ul = id(i, j + 1);
      elements.push_back({ll, lr, ur});
      elements.push_back({ll, ur, ul});
    }
  }
  return Mesh(2, std::move(nodes), std::move(elements), std::move(boundary), StructuredLayout{nx, ny, box});
}

Mesh refine(const Mesh& mesh) {
  if (!mesh.layout()) throw InvalidArgument("refine: only generator-built meshes can be refined");
  const auto& L = *mesh.layout();
  if (mesh.dim() == 1) return build_interval_mesh(2 * L.nx, L.box.x0, L.box.x1);
  return build_triangle_mesh(2 * L.nx, 2 * L.ny, L.box);
}

bool is_nested(const Mesh& coarse, const Mesh& fine) {
  if (coarse.dim() != fine.dim() || !coarse.layout() || !fine.layout()) return false;
  const auto& c = *coarse.layout();
  const auto& f = *fine.layout();
  const bool same_box = c.box.x0 == f.box.x0 && c.box.x1 == f.box.x1 && c.box.y0 == f.box.y0 && c.box.y1 == f.box.y1;
  if (!same_box || f.nx % c.nx != 0) return false;
  if (coarse.dim() == 2 && (f.ny % c.ny != 0 || f.nx / c.nx != f.ny / c.ny)) return false;
  return true;
}

double mesh_size(const Mesh& mesh) { return mesh.h(); }

double shape_regularity(const Mesh& mesh) {
  double worst = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    worst = std::max(worst, mesh.diameter(e) / mesh.inball_diameter(e));
  return worst;
}

Mesh read_mesh_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("read_mesh_file: cannot open " + path.string());
  int dim = 0;
  long n_nodes = 0, n_elems = 0;
  if (!(in >> dim >> n_nodes >> n_elems) || n_nodes <= 0 || n_elems <= 0)
    throw InvalidArgument("read_mesh_file: bad header");
  if (dim != 1 && dim != 2) throw InvalidArgument("read_mesh_file: dim must be 1 or 2");
  std::vector<Point> nodes(static_cast<std::size_t>(n_nodes), Point{0.0, 0.0});
  for (auto& p : nodes) {
    for (int k = 0; k < dim; ++k)
      if (!(in >> p[k])) throw InvalidArgument("read_mesh_file: truncated node list");
  }
  std::vector<Element> elements(static_cast<std::size_t>(n_elems), Element{-1, -1, -1});
  for (auto& el : elements) {
    for (int k = 0; k <= dim; ++k)
      if (!(in >> el[k])) throw InvalidArgument("read_mesh_file: truncated element list");
  }
  std::string line;
  std::getline(in, line);  // rest of last element line
  std::vector<int> boundary;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    int b = 0;
    while (ls >> b) boundary.push_back(b);
    break;
  }
  return Mesh(dim, std::move(nodes), std::move(elements), std::move(boundary));
}

void write_mesh_file(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_mesh_file: cannot open " + path.string());
  out.precision(17);
  out << mesh.dim() << ' ' << mesh.num_nodes() << ' ' << mesh.num_elements() << '\n';
  for (const auto& p : mesh.nodes()) {
    out << p[0];
    if (mesh.dim() == 2) out << ' ' << p[1];
    out << '\n';
  }
  for (const auto& el : mesh.elements()) {
    for (int k = 0; k <= mesh.dim(); ++k) out << (k ? " " : "") << el[k];
    out << '\n';
  }
  const auto b = mesh.boundary_nodes();
  for (std::size_t i = 0; i < b.size(); ++i) out << (i ? " " : "") << b[i];
  out << '\n';
}

}  // namespace vilab
