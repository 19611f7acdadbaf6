#include <cstdlib>
#include <string_view>

#include "aa/simd/kernels.hpp"

namespace aa::simd {

namespace {

constexpr KernelTable kScalar{&scalar::squared_distance, &scalar::dot};
#if defined(AA_HAVE_AVX2)
constexpr KernelTable kAvx2{&avx2::squared_distance, &avx2::dot};
#endif
#if defined(AA_HAVE_NEON)
constexpr KernelTable kNeon{&neon::squared_distance, &neon::dot};
#endif

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(AA_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(AA_HAVE_NEON)
      return true;  // mandatory on aarch64
#else
      return false;
#endif
  }
  return false;
}

Isa detect() {
  if (const char* env = std::getenv("AA_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
    return Isa::kScalar;
  }
  if (cpu_supports(Isa::kAvx2)) return Isa::kAvx2;
  if (cpu_supports(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

Isa g_active_isa = detect();

}  // namespace

const KernelTable* g_active = &table_for(g_active_isa);

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (cpu_supports(isa)) out.push_back(isa);
  }
  return out;
}

const KernelTable& table_for(Isa isa) {
  switch (isa) {
#if defined(AA_HAVE_AVX2)
    case Isa::kAvx2:
      if (cpu_supports(isa)) return kAvx2;
      break;
#endif
#if defined(AA_HAVE_NEON)
    case Isa::kNeon:
      return kNeon;
#endif
    default:
      break;
  }
  return kScalar;
}

Isa active_isa() { return g_active_isa; }

void set_active_isa(Isa isa) {
  g_active_isa = cpu_supports(isa) ? isa : Isa::kScalar;
  g_active = &table_for(g_active_isa);
}

Nearest nearest_row(std::span<const double> x, std::span<const double> rows, std::size_t dim) {
  Nearest best;
  const std::size_t n = dim == 0 ? 0 : rows.size() / dim;
  for (std::size_t r = 0; r < n; ++r) {
    const double d = g_active->squared_distance(x.data(), rows.data() + r * dim, dim);
    if (r == 0 || d < best.squared_distance) {
      best.index = r;
      best.squared_distance = d;
    }
  }
  return best;
}

}  // namespace aa::simd
