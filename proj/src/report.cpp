#include "vilab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "vilab/error.hpp"

namespace vilab {

bool StudyReport::all_passed() const {
  for (const auto& f : flags)
    if (!f.passed) return false;
  return true;
}

std::string format_number(double x) {
  if (!std::isfinite(x)) return "";
  char buf[40];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

namespace {

std::string field(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_csv(const StudyReport& report) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << quoted(r.study) << ',' << r.n << ',' << field(r.h) << ',' << field(r.gamma) << ',' << field(r.delta) << ','
        << field(r.err_sup) << ',' << field(r.err_l2) << ',' << field(r.err_energy) << ',' << field(r.violation)
        << ',' << (r.iterations ? std::to_string(*r.iterations) : "") << ',' << field(r.residual) << ','
        << quoted(r.flag) << '\n';
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::string metadata_json(const StudyReport& report, const RunMetadata& meta) {
  nlohmann::ordered_json j;
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(meta.config_hash));
  j["study"] = report.study;
  j["config_hash"] = hash;
  j["version"] = meta.version;
  j["wall_seconds"] = meta.wall_seconds;
  j["simd"] = meta.simd;
  j["threads"] = meta.threads;
  j["rows"] = report.rows.size();
  auto flags = nlohmann::ordered_json::array();
  for (const auto& f : report.flags) flags.push_back({{"name", f.name}, {"passed", f.passed}, {"detail", f.detail}});
  j["flags"] = flags;
  j["notes"] = report.notes;
  return j.dump(2) + "\n";
}

}  // namespace vilab
