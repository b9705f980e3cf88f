#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "vilab/cli.hpp"
#include "vilab/hash.hpp"

namespace vilab::cli {
namespace {

using json = nlohmann::json;

const KeySpec kName{"name", false, "output file stem (default: config file stem)"};
const KeySpec kSeed{"seed", false, "seed for randomized hypothesis checks (default 0)"};
const KeySpec kMesh{"mesh", true, "{\"dim\":1,\"n\":N,\"box\":[a,b]} | {\"dim\":2,\"nx\":..,\"ny\":..,\"box\":[x0,x1,y0,y1]} | {\"file\":path}"};
const KeySpec kOperator{"operator", false, "{\"diffusion\":k,\"advection\":[bx,by],\"reaction\":c} (default -laplace)"};
const KeySpec kLoad{"load", true, "field: number | {\"constant\":c} | {\"polynomial\":[[c,i,j],..]} | {\"table\":[..]}"};
const KeySpec kObstacle{"obstacle", true, "field giving the upper obstacle phi"};
const KeySpec kTol{"tol", false, "solver tolerance (> 0)"};
const KeySpec kMaxIter{"max_iter", false, "iteration cap (>= 1)"};
const KeySpec kMap{"map", true,
                   "{\"type\":\"superposition\",\"nu\",\"c\",\"p\"} | {\"type\":\"compliant\",\"nu\",\"g1\",\"g2\",\"cap\",\"l0\",\"l1\",\"g\",\"diffusion\",\"reaction\"} | {\"type\":\"impulse\",\"k0\",\"c_lin\",\"boundary_value\"}"};
const KeySpec kSchedule{"schedule", false,
                        "list of delta_n, or {\"type\":\"dyadic\"|\"harmonic\",\"count\":N} or {\"type\":\"geometric\",\"start\",\"factor\",\"count\"} (default dyadic, 10)"};

KeySpec req(KeySpec k, bool required) {
  k.required = required;
  return k;
}

std::vector<StudyKind> build_catalog() {
  const std::vector<KeySpec> common{{"study", true, "study kind"}, kName, kSeed, kMesh, kOperator};
  auto with = [&](std::vector<KeySpec> extra) {
    std::vector<KeySpec> keys = common;
    keys.insert(keys.end(), extra.begin(), extra.end());
    return keys;
  };
  return {
      {"vi", "obstacle VI on a sequence of mesh levels, errors against one refinement beyond the last",
       with({kLoad, kObstacle, {"levels", false, "cells per axis for each level (default: the mesh size)"},
             {"method", false, "active_set | projected_relaxation"}, {"omega", false, "relaxation factor in (0,2)"},
             kTol, kMaxIter})},
      {"qvi", "minimal and maximal QVI solutions by ordered fixed-point iteration",
       with({kLoad, kMap, {"f_max_factor", false, "supersolution load factor (default 1.01)"}, kTol, kMaxIter})},
      {"mosco", "solution stability S(f_n, K_n) -> S(f, K) for phi_n = phi + delta_n g",
       with({kLoad, kObstacle, req(kSchedule, false), {"perturbation", false, "field g (default 1)"},
             {"load_perturbation", false, "field h with f_n = f + delta_n h"},
             {"min_slope", false, "asserted lower bound on the log-log slope"}})},
      {"recovery", "recovery sequences w_n in K_n for a fixed target w",
       with({{"construction", true, "scale | truncate | singular_perturbation"},
             {"constraint", true, "obstacle | gradient"}, {"target", true, "field w, feasible for the limit set"},
             {"obstacle", false, "field phi (constraint = obstacle)"},
             {"alpha", false, "field alpha (constraint = gradient)"}, {"p", false, "gradient norm exponent (default 2)"},
             {"nu", false, "lower bound for the scale construction"}, {"perturbation", false, "field g (default 1)"},
             kSchedule})},
      {"gamma", "minimizers of F + R_n for a perturbation scheme against the constrained minimizer",
       with({kLoad, kObstacle, {"scheme", true, "tikhonov | moreau_yosida | galerkin_my | tikhonov_my"},
             {"gamma", false, "schedule of gamma_n (list or {\"type\":\"geometric\",...})"},
             {"gamma_prime", false, "schedule of gamma'_n"}, {"alpha_exponent", false, "Tikhonov exponent (2)"},
             {"levels", false, "galerkin_my: cells per axis of V_n; the finest level is the working mesh"}})},
      {"fem", "discrete constraint sets K1 (midpoints), K2 (nodes), Ki (gradients) under refinement",
       with({kLoad, {"constraint", true, "K1_midpoint | K2_nodal | Ki_gradient"},
             {"levels", true, "cells per axis for each level (nested)"}, {"obstacle", false, "field phi (K1, K2)"},
             {"alpha", false, "field alpha (Ki)"}, {"p", false, "gradient norm exponent (default 2)"}})},
      {"stability", "minimal/maximal QVI solutions under f_n = f* + epsilon_n g",
       with({kLoad, kMap, {"epsilon", true, "schedule epsilon_n (list or {\"type\":\"harmonic\",\"count\":N})"},
             {"perturbation", false, "field g (default 1)"}, {"floor", false, "c > 0 with f_n >= c (default 1e-3)"},
             kTol, kMaxIter})},
      {"impulse", "1D impulse-control QVI with the intervention obstacle",
       with({kLoad, kMap, {"f_max_factor", false, "supersolution load factor (default 1.01)"},
             {"complementarity_tol", false, "asserted bound on the complementarity residual (1e-6)"}, kTol,
             kMaxIter})},
  };
}

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void check_keys(const json& obj, const std::string& path, const std::vector<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(path.empty() ? k : path + "." + k, "unknown key (allowed: " + list + ")");
    }
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
  return obj.contains(key) ? number(obj.at(key), path + "." + key) : fallback;
}

double positive(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x > 0.0)) fail(path, "must be positive");
  return x;
}

int integer(const json& v, const std::string& path, int min) {
  if (!v.is_number_integer()) fail(path, "must be an integer");
  const auto x = v.get<long long>();
  if (x < min) fail(path, "must be >= " + std::to_string(min));
  if (x > 1000000000LL) fail(path, "too large");
  return static_cast<int>(x);
}

std::string text(const json& v, const std::string& path, const std::vector<std::string>& choices) {
  if (!v.is_string()) fail(path, "must be a string");
  const auto s = v.get<std::string>();
  if (!choices.empty() && std::find(choices.begin(), choices.end(), s) == choices.end()) {
    std::string list;
    for (const auto& c : choices) list += (list.empty() ? "" : " | ") + c;
    fail(path, "must be one of " + list);
  }
  return s;
}

FieldSpec field(const json& v, const std::string& path) {
  FieldSpec f;
  if (v.is_number()) {
    f.value = number(v, path);
    return f;
  }
  if (!v.is_object() || v.size() != 1) fail(path, "field must be a number or an object with one of constant, polynomial, table");
  check_keys(v, path, {"constant", "polynomial", "table"});
  if (v.contains("constant")) {
    f.value = number(v.at("constant"), path + ".constant");
  } else if (v.contains("polynomial")) {
    f.kind = FieldSpec::Kind::Polynomial;
    const auto& terms = v.at("polynomial");
    if (!terms.is_array() || terms.empty()) fail(path + ".polynomial", "must be a nonempty list of [c, i, j] terms");
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string tp = path + ".polynomial[" + std::to_string(t) + "]";
      const auto& term = terms[t];
      if (!term.is_array() || term.size() < 2 || term.size() > 3) fail(tp, "must be [c, i] or [c, i, j]");
      std::array<double, 3> a{number(term[0], tp), static_cast<double>(integer(term[1], tp + "[1]", 0)),
                              term.size() == 3 ? static_cast<double>(integer(term[2], tp + "[2]", 0)) : 0.0};
      f.terms.push_back(a);
    }
  } else {
    f.kind = FieldSpec::Kind::Table;
    const auto& t = v.at("table");
    if (!t.is_array() || t.empty()) fail(path + ".table", "must be a nonempty list of node values");
    for (std::size_t i = 0; i < t.size(); ++i) f.table.push_back(number(t[i], path + ".table[" + std::to_string(i) + "]"));
  }
  return f;
}

std::vector<double> schedule(const json& v, const std::string& path) {
  std::vector<double> s;
  if (v.is_array()) {
    if (v.empty()) fail(path, "must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) s.push_back(positive(v[i], path + "[" + std::to_string(i) + "]"));
    return s;
  }
  if (!v.is_object()) fail(path, "must be a list or a schedule object");
  const std::string type = v.contains("type") ? text(v.at("type"), path + ".type", {"dyadic", "harmonic", "geometric"}) : "";
  if (type.empty()) fail(path + ".type", "missing");
  if (type == "geometric") {
    check_keys(v, path, {"type", "start", "factor", "count"});
    if (!v.contains("start") || !v.contains("factor") || !v.contains("count")) fail(path, "geometric needs start, factor, count");
    const double start = positive(v.at("start"), path + ".start");
    const double factor = positive(v.at("factor"), path + ".factor");
    const int count = integer(v.at("count"), path + ".count", 1);
    for (int i = 0; i < count; ++i) s.push_back(start * std::pow(factor, i));
    return s;
  }
  check_keys(v, path, {"type", "count"});
  if (!v.contains("count")) fail(path + ".count", "missing");
  const int count = integer(v.at("count"), path + ".count", 1);
  for (int n = 1; n <= count; ++n) s.push_back(type == "dyadic" ? std::ldexp(1.0, -n) : 1.0 / n);
  return s;
}

MeshSpec mesh_spec(const json& v, const std::string& path, const std::filesystem::path& base) {
  MeshSpec m;
  if (!v.is_object()) fail(path, "must be an object");
  if (v.contains("file")) {
    check_keys(v, path, {"file"});
    if (!v.at("file").is_string()) fail(path + ".file", "must be a string");
    m.file = base / v.at("file").get<std::string>();
    return m;
  }
  if (!v.contains("dim")) fail(path + ".dim", "missing");
  m.dim = integer(v.at("dim"), path + ".dim", 1);
  if (m.dim == 1) {
    check_keys(v, path, {"dim", "n", "box"});
    m.nx = v.contains("n") ? integer(v.at("n"), path + ".n", 1) : 8;
    m.box = {0.0, 1.0, 0.0, 0.0};
    if (v.contains("box")) {
      const auto& b = v.at("box");
      if (!b.is_array() || b.size() != 2) fail(path + ".box", "must be [a, b]");
      m.box.x0 = number(b[0], path + ".box[0]");
      m.box.x1 = number(b[1], path + ".box[1]");
    }
    if (!(m.box.x0 < m.box.x1)) fail(path + ".box", "need a < b");
  } else if (m.dim == 2) {
    check_keys(v, path, {"dim", "nx", "ny", "box"});
    m.nx = v.contains("nx") ? integer(v.at("nx"), path + ".nx", 1) : 8;
    m.ny = v.contains("ny") ? integer(v.at("ny"), path + ".ny", 1) : m.nx;
    if (v.contains("box")) {
      const auto& b = v.at("box");
      if (!b.is_array() || b.size() != 4) fail(path + ".box", "must be [x0, x1, y0, y1]");
      m.box = {number(b[0], path + ".box[0]"), number(b[1], path + ".box[1]"), number(b[2], path + ".box[2]"),
               number(b[3], path + ".box[3]")};
    }
    if (!(m.box.x0 < m.box.x1) || !(m.box.y0 < m.box.y1)) fail(path + ".box", "empty rectangle");
  } else {
    fail(path + ".dim", "must be 1 or 2");
  }
  return m;
}

Coefficients operator_spec(const json& v, const std::string& path) {
  check_keys(v, path, {"diffusion", "advection", "reaction"});
  Coefficients c;
  if (v.contains("diffusion")) c.diffusion = positive(v.at("diffusion"), path + ".diffusion");
  if (v.contains("reaction")) {
    c.reaction = number(v.at("reaction"), path + ".reaction");
    if (c.reaction < 0.0) fail(path + ".reaction", "must be nonnegative");
  }
  if (v.contains("advection")) {
    const auto& a = v.at("advection");
    if (!a.is_array() || a.empty() || a.size() > 2) fail(path + ".advection", "must be [bx] or [bx, by]");
    c.advection[0] = number(a[0], path + ".advection[0]");
    if (a.size() == 2) c.advection[1] = number(a[1], path + ".advection[1]");
  }
  return c;
}

MapSpec map_spec(const json& v, const std::string& path) {
  if (!v.is_object() || !v.contains("type")) fail(path + ".type", "missing");
  MapSpec m;
  m.type = text(v.at("type"), path + ".type", {"superposition", "compliant", "impulse"});
  if (m.type == "superposition") {
    check_keys(v, path, {"type", "nu", "c", "p"});
    m.nu = v.contains("nu") ? positive(v.at("nu"), path + ".nu") : 1.0;
    m.c = number_or(v, "c", path, 1.0);
    if (m.c < 0.0) fail(path + ".c", "must be nonnegative");
    m.p = v.contains("p") ? positive(v.at("p"), path + ".p") : 1.0;
  } else if (m.type == "compliant") {
    check_keys(v, path, {"type", "nu", "g1", "g2", "cap", "l0", "l1", "g", "diffusion", "reaction"});
    m.nu = v.contains("nu") ? positive(v.at("nu"), path + ".nu") : 1.0;
    m.g1 = number_or(v, "g1", path, 0.0);
    m.g2 = number_or(v, "g2", path, 0.0);
    if (m.g1 < 0.0) fail(path + ".g1", "must be nonnegative");
    if (m.g2 < 0.0) fail(path + ".g2", "must be nonnegative");
    m.cap = number_or(v, "cap", path, 1.0);
    m.l0 = number_or(v, "l0", path, m.nu);
    m.l1 = v.contains("l1") ? positive(v.at("l1"), path + ".l1") : 1.0;
    if (m.l0 < m.nu) fail(path + ".l0", "must be >= nu");
    m.diffusion = v.contains("diffusion") ? positive(v.at("diffusion"), path + ".diffusion") : 1.0;
    m.reaction = number_or(v, "reaction", path, 0.0);
    if (m.reaction < 0.0) fail(path + ".reaction", "must be nonnegative");
    if (v.contains("g")) m.g = field(v.at("g"), path + ".g");
  } else {
    check_keys(v, path, {"type", "k0", "c_lin", "boundary_value"});
    m.k0 = v.contains("k0") ? positive(v.at("k0"), path + ".k0") : 1.0;
    m.c_lin = number_or(v, "c_lin", path, 0.0);
    if (m.c_lin < 0.0) fail(path + ".c_lin", "must be nonnegative");
    m.boundary_value = number_or(v, "boundary_value", path, 0.0);
  }
  return m;
}

std::vector<int> levels(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "must be a nonempty list of cell counts");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(integer(v[i], path + "[" + std::to_string(i) + "]", 1));
    if (i > 0 && out[i] <= out[i - 1]) fail(path, "cell counts must increase");
  }
  return out;
}

}  // namespace

const std::vector<StudyKind>& catalog() {
  static const std::vector<StudyKind> kinds = build_catalog();
  return kinds;
}

std::string list_studies() {
  std::ostringstream out;
  for (const auto& k : catalog()) out << k.kind << "\t" << k.summary << "\n";
  return out.str();
}

std::string describe(const std::string& kind) {
  for (const auto& k : catalog()) {
    if (k.kind != kind) continue;
    std::ostringstream out;
    out << k.kind << ": " << k.summary << "\n";
    out << "required keys:\n";
    for (const auto& key : k.keys)
      if (key.required) out << "  " << key.name << "  " << key.help << "\n";
    out << "optional keys:\n";
    for (const auto& key : k.keys)
      if (!key.required) out << "  " << key.name << "  " << key.help << "\n";
    return out.str();
  }
  std::string valid;
  for (const auto& k : catalog()) valid += (valid.empty() ? "" : ", ") + k.kind;
  throw ConfigError("unknown study kind '" + kind + "' (valid kinds: " + valid + ")");
}

StudyConfig parse_config(const json& j, const std::string& default_name, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  if (!j.contains("study")) throw ConfigError("study: missing");
  StudyConfig c;
  std::vector<std::string> kinds;
  for (const auto& k : catalog()) kinds.push_back(k.kind);
  c.kind = text(j.at("study"), "study", kinds);
  const auto& spec = *std::find_if(catalog().begin(), catalog().end(), [&](const StudyKind& k) { return k.kind == c.kind; });
  std::vector<std::string> allowed;
  for (const auto& key : spec.keys) {
    allowed.push_back(key.name);
    if (key.required && !j.contains(key.name)) fail(key.name, "missing (required for study '" + c.kind + "')");
  }
  check_keys(j, "", allowed);

  c.name = j.contains("name") ? text(j.at("name"), "name", {}) : default_name;
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos) fail("name", "must be a plain file stem");
  if (j.contains("seed")) c.seed = static_cast<std::uint64_t>(integer(j.at("seed"), "seed", 0));
  c.mesh = mesh_spec(j.at("mesh"), "mesh", base_dir);
  if (j.contains("operator")) c.coefficients = operator_spec(j.at("operator"), "operator");
  if (j.contains("load")) c.load = field(j.at("load"), "load");
  if (j.contains("obstacle")) c.obstacle = field(j.at("obstacle"), "obstacle");
  if (j.contains("perturbation")) c.perturbation = field(j.at("perturbation"), "perturbation");
  if (j.contains("load_perturbation")) c.load_perturbation = field(j.at("load_perturbation"), "load_perturbation");
  if (j.contains("target")) c.target = field(j.at("target"), "target");
  if (j.contains("alpha")) c.alpha = field(j.at("alpha"), "alpha");
  if (j.contains("map")) c.map = map_spec(j.at("map"), "map");
  if (j.contains("levels")) c.levels = levels(j.at("levels"), "levels");
  if (j.contains("tol")) c.tol = positive(j.at("tol"), "tol");
  if (j.contains("max_iter")) c.max_iter = integer(j.at("max_iter"), "max_iter", 1);
  if (j.contains("method")) c.method = text(j.at("method"), "method", {"active_set", "projected_relaxation"});
  if (j.contains("omega")) {
    c.omega = number(j.at("omega"), "omega");
    if (!(c.omega > 0.0 && c.omega < 2.0)) fail("omega", "must lie in (0, 2)");
  }
  if (j.contains("p")) {
    c.p = number(j.at("p"), "p");
    if (!(c.p >= 1.0)) fail("p", "must be >= 1");
  }
  if (j.contains("nu")) c.nu = positive(j.at("nu"), "nu");
  if (j.contains("floor")) c.floor = positive(j.at("floor"), "floor");
  if (j.contains("f_max_factor")) {
    c.f_max_factor = number(j.at("f_max_factor"), "f_max_factor");
    if (!(c.f_max_factor >= 1.0)) fail("f_max_factor", "must be >= 1");
  }
  if (j.contains("complementarity_tol")) c.complementarity_tol = positive(j.at("complementarity_tol"), "complementarity_tol");
  if (j.contains("alpha_exponent")) c.alpha_exponent = positive(j.at("alpha_exponent"), "alpha_exponent");
  if (j.contains("min_slope")) c.min_slope = number(j.at("min_slope"), "min_slope");
  if (j.contains("construction"))
    c.construction = text(j.at("construction"), "construction", {"scale", "truncate", "singular_perturbation"});
  if (j.contains("scheme"))
    c.scheme = text(j.at("scheme"), "scheme", {"tikhonov", "moreau_yosida", "galerkin_my", "tikhonov_my"});
  if (j.contains("constraint")) {
    if (c.kind == "fem")
      c.constraint = text(j.at("constraint"), "constraint", {"K1_midpoint", "K2_nodal", "Ki_gradient"});
    else
      c.constraint = text(j.at("constraint"), "constraint", {"obstacle", "gradient"});
  }

  // kind-specific schedules and cross-field rules
  if (c.kind == "mosco" || c.kind == "recovery")
    c.schedule = j.contains("schedule") ? schedule(j.at("schedule"), "schedule") : std::vector<double>{};
  if ((c.kind == "mosco" || c.kind == "recovery") && c.schedule.empty())
    for (int n = 1; n <= 10; ++n) c.schedule.push_back(std::ldexp(1.0, -n));
  if (c.kind == "stability") {
    c.schedule = schedule(j.at("epsilon"), "epsilon");
    if (c.floor == 0.0) c.floor = 1e-3;
  }
  if (c.kind == "gamma") {
    if (j.contains("gamma")) c.schedule = schedule(j.at("gamma"), "gamma");
    if (j.contains("gamma_prime")) c.gamma_prime = schedule(j.at("gamma_prime"), "gamma_prime");
    const bool needs_gamma = c.scheme != "tikhonov";
    const bool needs_prime = c.scheme == "tikhonov" || c.scheme == "tikhonov_my";
    if (needs_gamma && c.schedule.empty()) fail("gamma", "required for scheme " + c.scheme);
    if (needs_prime && c.gamma_prime.empty()) fail("gamma_prime", "required for scheme " + c.scheme);
    if (c.scheme == "galerkin_my" && c.levels.size() != c.schedule.size())
      fail("levels", "galerkin_my needs one level per gamma value");
  }
  if ((c.kind == "qvi" || c.kind == "stability") && c.mesh.dim != 1 && c.map && c.map->type == "impulse")
    fail("map.type", "impulse maps need a 1D mesh");
  if (c.kind == "impulse") {
    if (c.map->type != "impulse") fail("map.type", "study 'impulse' needs map.type = impulse");
    if (c.mesh.dim != 1 || !c.mesh.file.empty()) fail("mesh", "study 'impulse' needs a generated 1D mesh");
  }
  if (c.kind == "recovery") {
    if (c.constraint == "obstacle" && !c.obstacle) fail("obstacle", "required for constraint = obstacle");
    if (c.constraint == "gradient" && !c.alpha) fail("alpha", "required for constraint = gradient");
    if (c.construction == "scale" && c.nu <= 0.0) fail("nu", "required (> 0) for the scale construction");
    if (c.construction != "scale" && c.constraint != "obstacle")
      fail("constraint", "truncate and singular_perturbation act on obstacle constraints");
  }
  if (c.kind == "fem") {
    if (c.constraint == "Ki_gradient" ? !c.alpha : !c.obstacle)
      fail(c.constraint == "Ki_gradient" ? "alpha" : "obstacle", "required for constraint " + c.constraint);
    if (!c.mesh.file.empty()) fail("mesh", "study 'fem' needs a generated mesh");
  }
  if (c.kind == "vi" && !c.mesh.file.empty() && !c.levels.empty()) fail("levels", "cannot refine a mesh read from file");

  Fnv1a h;
  h.text(j.dump());
  c.hash = h.digest();
  return c;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot read config");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": not valid JSON: " + e.what());
  }
  return parse_config(j, path.stem().string(), path.parent_path());
}

std::string describe_plan(const StudyConfig& c) {
  std::ostringstream out;
  out << "study: " << c.kind << "\n";
  out << "name: " << c.name << "\n";
  if (!c.mesh.file.empty())
    out << "mesh: file " << c.mesh.file.string() << "\n";
  else if (c.mesh.dim == 1)
    out << "mesh: interval [" << c.mesh.box.x0 << ", " << c.mesh.box.x1 << "], " << c.mesh.nx << " cells\n";
  else
    out << "mesh: rectangle [" << c.mesh.box.x0 << ", " << c.mesh.box.x1 << "] x [" << c.mesh.box.y0 << ", "
        << c.mesh.box.y1 << "], " << c.mesh.nx << " x " << c.mesh.ny << " cells\n";
  out << "operator: diffusion " << c.coefficients.diffusion << ", advection (" << c.coefficients.advection[0] << ", "
      << c.coefficients.advection[1] << "), reaction " << c.coefficients.reaction << "\n";
  if (!c.levels.empty()) {
    out << "levels:";
    for (int l : c.levels) out << " " << l;
    out << "\n";
  }
  if (!c.schedule.empty()) out << "schedule: " << c.schedule.size() << " values, " << c.schedule.front() << " .. " << c.schedule.back() << "\n";
  if (c.map) out << "map: " << c.map->type << "\n";
  if (!c.scheme.empty()) out << "scheme: " << c.scheme << "\n";
  if (!c.construction.empty()) out << "construction: " << c.construction << "\n";
  if (!c.constraint.empty()) out << "constraint: " << c.constraint << "\n";
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(c.hash));
  out << "config hash: " << hash << "\n";
  return out.str();
}

}  // namespace vilab::cli
