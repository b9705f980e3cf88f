#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "vilab/simd.hpp"

using namespace vilab::simd;

namespace {

std::vector<double> sample(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!cpu_supports(Isa::Avx2)) {
    MESSAGE("CPU without AVX2; only the scalar table is exercised");
    return;
  }
  const KernelTable& s = scalar_kernels();
  const KernelTable& v = avx2_kernels();
  std::mt19937_64 rng(7);
  // lengths around the vector width and its remainders
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 63u, 64u, 65u, 1000u, 1027u}) {
    CAPTURE(n);
    const auto x = sample(rng, n), y = sample(rng, n), w = sample(rng, n);
    const double scale = static_cast<double>(n) * 9.0 + 1.0;
    CHECK(std::abs(s.dot(x.data(), y.data(), n) - v.dot(x.data(), y.data(), n)) <= 1e-13 * scale);
    CHECK(std::abs(s.weighted_dot(w.data(), x.data(), y.data(), n) - v.weighted_dot(w.data(), x.data(), y.data(), n)) <=
          1e-13 * scale * 3);
    // max-type reductions are order independent, so they must agree exactly
    CHECK(s.max_abs(x.data(), n) == v.max_abs(x.data(), n));
    CHECK(s.max_abs_diff(x.data(), y.data(), n) == v.max_abs_diff(x.data(), y.data(), n));
    CHECK(s.max_excess(x.data(), y.data(), n) == v.max_excess(x.data(), y.data(), n));

    std::vector<double> a(n), b(n);
    s.pos_part(x.data(), a.data(), n);
    v.pos_part(x.data(), b.data(), n);
    CHECK(a == b);
    s.vmax(x.data(), y.data(), a.data(), n);
    v.vmax(x.data(), y.data(), b.data(), n);
    CHECK(a == b);
    s.vmin(x.data(), y.data(), a.data(), n);
    v.vmin(x.data(), y.data(), b.data(), n);
    CHECK(a == b);
    a = y;
    b = y;
    s.axpy(0.37, x.data(), a.data(), n);
    v.axpy(0.37, x.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
  }
}

TEST_CASE("scalar kernels against direct loops") {
  const std::vector<double> x{1.0, -2.0, 3.0}, y{0.5, 0.5, 4.0};
  CHECK(scalar_kernels().dot(x.data(), y.data(), 3) == doctest::Approx(0.5 - 1.0 + 12.0));
  CHECK(scalar_kernels().max_excess(x.data(), y.data(), 3) == doctest::Approx(0.5));
  CHECK(scalar_kernels().max_excess(x.data(), y.data(), 0) == -std::numeric_limits<double>::infinity());
  CHECK(scalar_kernels().max_abs(x.data(), 3) == 3.0);
}

TEST_CASE("isa selection") {
  const Isa before = active_isa();
  CHECK(set_active_isa(Isa::Scalar));
  CHECK(active_isa() == Isa::Scalar);
  CHECK(isa_name(Isa::Scalar) == "scalar");
  set_active_isa(before);
}
