#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vilab/assembly.hpp"
#include "vilab/mesh.hpp"
#include "vilab/report.hpp"

namespace vilab::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Bad configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  std::string name;
  bool required = false;
  std::string help;
};

struct StudyKind {
  std::string kind;
  std::string summary;
  std::vector<KeySpec> keys;
};

/// The eight study kinds and their accepted keys.
const std::vector<StudyKind>& catalog();
std::string list_studies();
/// Schema text for one kind; throws ConfigError naming the valid kinds.
std::string describe(const std::string& kind);

/// constant, polynomial sum c x^i y^j, or per-node table
struct FieldSpec {
  enum class Kind { Constant, Polynomial, Table } kind = Kind::Constant;
  double value = 0.0;
  std::vector<std::array<double, 3>> terms;
  std::vector<double> table;
};

struct MeshSpec {
  int dim = 1;
  int nx = 8;
  int ny = 8;
  Rectangle box;
  std::filesystem::path file;
};

struct MapSpec {
  std::string type;
  double nu = 1.0, c = 1.0, p = 1.0;
  double g1 = 0.0, g2 = 0.0, cap = 1.0, l0 = 1.0, l1 = 1.0, diffusion = 1.0, reaction = 0.0;
  FieldSpec g;
  double k0 = 1.0, c_lin = 0.0, boundary_value = 0.0;
};

/// Validated, typed form of a study configuration.
struct StudyConfig {
  std::string kind;
  std::string name;
  std::uint64_t hash = 0;
  std::uint64_t seed = 0;
  MeshSpec mesh;
  Coefficients coefficients;
  FieldSpec load;
  std::optional<FieldSpec> obstacle, perturbation, load_perturbation, target, alpha;
  std::optional<MapSpec> map;
  std::vector<int> levels;
  std::vector<double> schedule;
  std::vector<double> gamma_prime;
  std::string method = "active_set";
  std::string construction;
  std::string constraint;
  std::string scheme;
  double omega = 1.5;
  double tol = 0.0;  // 0: module default
  int max_iter = 0;
  double nu = 0.0;
  double p = 2.0;
  double alpha_exponent = 2.0;
  double floor = 0.0;
  double f_max_factor = 1.01;
  double complementarity_tol = 1e-6;
  std::optional<double> min_slope;
};

/// Schema validation (unknown keys rejected) and conversion.
StudyConfig parse_config(const nlohmann::json& j, const std::string& default_name = "study",
                         const std::filesystem::path& base_dir = {});
StudyConfig load_config(const std::filesystem::path& path);
/// Human-readable resolved plan (for --dry-run).
std::string describe_plan(const StudyConfig& config);

/// Runs the configured study. Solver failures propagate as SolverError /
/// PreconditionError.
StudyReport run_study(const StudyConfig& config);

/// Log-log chart of the error columns against h, delta or gamma.
std::string render_svg(const StudyReport& report);

struct RunOptions {
  bool dry_run = false;
  std::filesystem::path out_dir = "results";
  bool plot = false;
};

/// Exit codes: 0 all flags pass, 1 a flag failed, 2 config error, 3 solver failure.
int run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace vilab::cli
