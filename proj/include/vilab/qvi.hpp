#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vilab/assembly.hpp"
#include "vilab/constraints.hpp"
#include "vilab/mesh.hpp"

namespace vilab {

/// Phi(v) = nu + c (v^+)^{1/p}
struct Superposition {
  double nu = 1.0;
  double c = 1.0;
  double p = 1.0;
};

/// Phi(v) = l0 + l1 z where z solves  B z + M (g1 (l0 + l1 z) - g2 min(v, cap)) = g
/// with M the lumped mass. Increasing in v for g1, g2 >= 0, l1 > 0.
struct Compliant {
  std::shared_ptr<const DiscreteOperator> B;
  LoadFunctional g;
  double g1 = 0.0;
  double g2 = 0.0;
  double cap = 1.0;
  double l0 = 1.0;
  double l1 = 1.0;
  /// Claimed lower bound; every evaluation checks Phi(v) >= nu.
  double nu = 0.0;
};

/// Intervention operator on a 1D grid:
/// Phi(v)(x_i) = min over x_j >= x_i of v(x_j) + k0 + c_lin (x_j - x_i), with
/// the exterior candidate boundary_value + k0 + c_lin (x_last - x_i).
struct Impulse {
  double k0 = 1.0;
  double c_lin = 0.0;
  double boundary_value = 0.0;
};

class ObstacleMap {
 public:
  using Variant = std::variant<Superposition, Compliant, Impulse>;

  /// p > 0; p < 1 gives maps that break the scaling condition (useful as a
  /// negative control).
  static ObstacleMap superposition(double nu, double c, double p);
  /// Checks the sign hypotheses and that B + g1 l1 M is an M-matrix.
  static ObstacleMap compliant(const Mesh& mesh, Compliant data);
  static ObstacleMap impulse(double k0, double c_lin, double boundary_value);

  const Variant& variant() const { return variant_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&variant_);
  }
  std::string name() const;

 private:
  explicit ObstacleMap(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

NodalVector evaluate_obstacle(const ObstacleMap& map, const NodalVector& v, const Mesh& mesh);

struct HypothesisCheck {
  bool passed = true;
  /// Names the violated hypothesis and where.
  std::string message;
};

/// v <= w => Phi(v) <= Phi(w) on random ordered pairs.
HypothesisCheck check_increasing(const ObstacleMap& map, const Mesh& mesh, int trials = 50, std::uint64_t seed = 1);
/// lambda Phi(v) >= Phi(lambda v) for lambda in {1.1, 2, 10} on random v >= 0.
HypothesisCheck check_scaling(const ObstacleMap& map, const Mesh& mesh, int samples = 20, std::uint64_t seed = 2);
/// Q phi >= -1e-10 ||Q phi||_inf on free rows.
HypothesisCheck check_q_condition(const DiscreteOperator& Q, const NodalVector& phi);

enum class QviKind { Minimal, Maximal, Plain };
std::string to_string(QviKind kind);

struct QviOptions {
  double tol = 1e-8;
  int max_iter = 1000;
};

struct QVISolution {
  NodalVector y;
  std::vector<NodalVector> history;
  QviKind kind = QviKind::Plain;
  /// ||T(y) - y||_inf
  double fixed_point_residual = 0.0;
  /// Complementarity residual of y against K(Phi(y)).
  double vi_residual = 0.0;
  int iterations = 0;
};

enum class QviStart { Sub, Super, Custom };

/// Plain iteration y_{k+1} = S(f, K(Phi(y_k))). Stops once the increment is
/// <= tol and ||T(y) - y|| <= 10 tol. Histories from Sub must be
/// nondecreasing and from Super nonincreasing; a violation throws SolverError.
/// f_max defaults to 1.01 f.
QVISolution qvi_fixed_point(const DiscreteOperator& op, const LoadFunctional& f, const ObstacleMap& map,
                            const Mesh& mesh, QviStart start, const QviOptions& options = {},
                            const std::optional<NodalVector>& custom = std::nullopt,
                            const std::optional<LoadFunctional>& f_max = std::nullopt);

QVISolution minimal_solution(const DiscreteOperator& op, const LoadFunctional& f, const ObstacleMap& map,
                             const Mesh& mesh, const QviOptions& options = {});
QVISolution maximal_solution(const DiscreteOperator& op, const LoadFunctional& f, const ObstacleMap& map,
                             const Mesh& mesh, const LoadFunctional& f_max, const QviOptions& options = {});

/// T(v) = S(f, K(Phi(v))).
NodalVector qvi_map(const DiscreteOperator& op, const LoadFunctional& f, const ObstacleMap& map, const Mesh& mesh,
                    const NodalVector& v);

struct StabilityRecord {
  int n = 0;
  double epsilon = 0.0;
  double min_err_sup = 0.0;
  double min_err_l2 = 0.0;
  double max_err_sup = 0.0;
  double max_err_l2 = 0.0;
  int min_iterations = 0;
  int max_iterations = 0;
};

struct StabilityReport {
  std::vector<StabilityRecord> records;
  HypothesisCheck scaling;
  /// Final error <= first / 5 and nonincreasing after n = 2 (minimal solutions).
  bool converged_min = false;
  bool converged_max = false;
};

/// f_n = f_star + epsilon_n g. Requires f_n / m_i >= floor > 0 at every free
/// node (m the lumped mass). A failing scaling check is reported, not thrown.
StabilityReport stability_study(const DiscreteOperator& op, const ObstacleMap& map, const Mesh& mesh,
                                const LoadFunctional& f_star, const LoadFunctional& g,
                                const std::vector<double>& epsilon, double floor, const QviOptions& options = {});

}  // namespace vilab
