#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "vilab/simd.hpp"

namespace vilab::simd {
namespace {

Isa detect_default() {
  if (const char* env = std::getenv("VILAB_SIMD")) {
    if (std::string(env) == "scalar") return Isa::Scalar;
  }
  return cpu_supports(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect_default()};
  return isa;
}

void require_same(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("simd kernel: length mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool cpu_supports(Isa isa) {
  if (isa == Isa::Scalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) {
  if (!cpu_supports(isa)) return false;
  selected().store(isa, std::memory_order_relaxed);
  return true;
}

const KernelTable& active_kernels() {
  return active_isa() == Isa::Avx2 ? avx2_kernels() : scalar_kernels();
}

double dot(std::span<const double> x, std::span<const double> y) {
  require_same(x.size(), y.size());
  return active_kernels().dot(x.data(), y.data(), x.size());
}

double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y) {
  require_same(w.size(), x.size());
  require_same(x.size(), y.size());
  return active_kernels().weighted_dot(w.data(), x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  require_same(x.size(), y.size());
  active_kernels().axpy(a, x.data(), y.data(), x.size());
}

double max_abs(std::span<const double> x) { return active_kernels().max_abs(x.data(), x.size()); }

double max_abs_diff(std::span<const double> x, std::span<const double> y) {
  require_same(x.size(), y.size());
  return active_kernels().max_abs_diff(x.data(), y.data(), x.size());
}

double max_excess(std::span<const double> x, std::span<const double> y) {
  require_same(x.size(), y.size());
  return active_kernels().max_excess(x.data(), y.data(), x.size());
}

void pos_part(std::span<const double> x, std::span<double> out) {
  require_same(x.size(), out.size());
  active_kernels().pos_part(x.data(), out.data(), x.size());
}

void vmax(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  require_same(x.size(), y.size());
  require_same(x.size(), out.size());
  active_kernels().vmax(x.data(), y.data(), out.data(), x.size());
}

void vmin(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  require_same(x.size(), y.size());
  require_same(x.size(), out.size());
  active_kernels().vmin(x.data(), y.data(), out.data(), x.size());
}

}  // namespace vilab::simd
