#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vilab {

/// One CSV row. Unset quantities are written as empty fields.
struct ReportRow {
  std::string study;
  int n = 0;
  std::optional<double> h, gamma, delta, err_sup, err_l2, err_energy, violation;
  std::optional<int> iterations;
  std::optional<double> residual;
  std::string flag;
};

/// A named pass/fail assertion of a study run.
struct ReportFlag {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct StudyReport {
  std::string study;
  std::vector<ReportRow> rows;
  std::vector<ReportFlag> flags;
  std::vector<std::string> notes;

  bool all_passed() const;
};

inline constexpr const char* kCsvHeader =
    "study,n,h,gamma,delta,err_sup,err_l2,err_energy,violation,iterations,residual,flag";

/// Shortest round-trip decimal form; nonfinite values become empty fields.
std::string format_number(double x);
std::string to_csv(const StudyReport& report);
void write_text(const std::filesystem::path& path, const std::string& text);

struct RunMetadata {
  std::uint64_t config_hash = 0;
  std::string version;
  double wall_seconds = 0.0;
  std::string simd;
  int threads = 1;
};

/// Metadata block kept out of the CSV so that CSV bodies stay reproducible.
std::string metadata_json(const StudyReport& report, const RunMetadata& meta);

}  // namespace vilab
