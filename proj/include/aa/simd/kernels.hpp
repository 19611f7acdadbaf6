#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Inner-loop arithmetic for distance and similarity computations.
//
// Every kernel has a portable scalar reference and, where the target allows,
// AVX2 (x86-64) or NEON (aarch64) variants. The variant is chosen once at
// startup from CPU features; AA_SIMD=scalar in the environment forces the
// reference path. All variants accumulate in four interleaved lanes and reduce
// them in the same order, so their results are bit-identical.
namespace aa::simd {

enum class Isa { kScalar, kAvx2, kNeon };

const char* isa_name(Isa isa);

struct KernelTable {
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
};

namespace scalar {
double squared_distance(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace scalar

namespace avx2 {
double squared_distance(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace avx2

namespace neon {
double squared_distance(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace neon

// Variants compiled in and supported by the running CPU, scalar first.
std::vector<Isa> available_isas();

const KernelTable& table_for(Isa isa);

Isa active_isa();

// Overrides the dispatch decision. Intended for tests and benchmarks; not
// thread-safe with concurrent kernel calls.
void set_active_isa(Isa isa);

extern const KernelTable* g_active;

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return g_active->squared_distance(a.data(), b.data(), a.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return g_active->dot(a.data(), b.data(), a.size());
}

struct Nearest {
  std::size_t index = 0;
  double squared_distance = 0.0;
};

// Nearest row of `rows` (row-major, `dim` columns) to x; the lowest index wins
// exact ties.
Nearest nearest_row(std::span<const double> x, std::span<const double> rows, std::size_t dim);

}  // namespace aa::simd
