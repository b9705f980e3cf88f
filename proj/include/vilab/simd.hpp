#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace vilab::simd {

/// Instruction set used by the nodal-vector kernels.
enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// Raw kernel table. Every entry has a scalar reference implementation; the
/// AVX2 table is only handed out when the CPU reports support.
struct KernelTable {
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*weighted_dot)(const double* w, const double* x, const double* y, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  double (*max_abs_diff)(const double* x, const double* y, std::size_t n);
  // max_i (x_i - y_i); -inf for n == 0
  double (*max_excess)(const double* x, const double* y, std::size_t n);
  void (*pos_part)(const double* x, double* out, std::size_t n);
  void (*vmax)(const double* x, const double* y, double* out, std::size_t n);
  void (*vmin)(const double* x, const double* y, double* out, std::size_t n);
};

const KernelTable& scalar_kernels();
const KernelTable& avx2_kernels();

bool cpu_supports(Isa isa);

/// Currently selected ISA. Chosen once at startup (best supported unless the
/// VILAB_SIMD environment variable says "scalar").
Isa active_isa();

/// Force an ISA; returns false (and changes nothing) if the CPU lacks it.
bool set_active_isa(Isa isa);

const KernelTable& active_kernels();

// Span front-ends over the active table. Lengths must match.
double dot(std::span<const double> x, std::span<const double> y);
double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
double max_abs(std::span<const double> x);
double max_abs_diff(std::span<const double> x, std::span<const double> y);
double max_excess(std::span<const double> x, std::span<const double> y);
void pos_part(std::span<const double> x, std::span<double> out);
void vmax(std::span<const double> x, std::span<const double> y, std::span<double> out);
void vmin(std::span<const double> x, std::span<const double> y, std::span<double> out);

}  // namespace vilab::simd
