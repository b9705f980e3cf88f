#include <chrono>
#include <ostream>

#include "vilab/cli.hpp"
#include "vilab/error.hpp"
#include "vilab/parallel.hpp"
#include "vilab/simd.hpp"

namespace vilab::cli {

int run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& out, std::ostream& err) {
  StudyConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  if (options.dry_run) {
    out << describe_plan(config);
    return 0;
  }

  const auto start = std::chrono::steady_clock::now();
  StudyReport report;
  try {
    report = run_study(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    err << "hypothesis violated: " << e.what() << '\n';
    return 3;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return 3;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunMetadata meta;
  meta.config_hash = config.hash;
  meta.version = kVersion;
  meta.wall_seconds = wall;
  meta.simd = std::string(simd::isa_name(simd::active_isa()));
  meta.threads = thread_count();

  std::filesystem::create_directories(options.out_dir);
  const std::filesystem::path base = options.out_dir / config.name;
  write_text(base.string() + ".csv", to_csv(report));
  write_text(base.string() + ".meta.json", metadata_json(report, meta));
  if (options.plot) write_text(base.string() + ".svg", render_svg(report));

  for (const auto& note : report.notes) out << "note: " << note << '\n';
  for (const auto& f : report.flags)
    out << (f.passed ? "PASS " : "FAIL ") << f.name << (f.detail.empty() ? "" : "  (" + f.detail + ")") << '\n';
  out << "wrote " << base.string() << ".csv\n";
  return report.all_passed() ? 0 : 1;
}

}  // namespace vilab::cli
