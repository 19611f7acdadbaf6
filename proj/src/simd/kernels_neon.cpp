#include <arm_neon.h>

#include "aa/simd/kernels.hpp"

// Two 128-bit registers hold lanes (l0, l1) and (l2, l3). vmlaq is avoided
// because it may fuse on some targets.
namespace aa::simd::neon {

namespace {

inline double reduce(float64x2_t lo, float64x2_t hi) {
  const float64x2_t pair = vaddq_f64(lo, hi);  // (l0 + l2, l1 + l3)
  return vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
}

}  // namespace

double squared_distance(const double* a, const double* b, std::size_t n) {
  float64x2_t acc_lo = vdupq_n_f64(0.0);
  float64x2_t acc_hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d_lo = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    const float64x2_t d_hi = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc_lo = vaddq_f64(acc_lo, vmulq_f64(d_lo, d_lo));
    acc_hi = vaddq_f64(acc_hi, vmulq_f64(d_hi, d_hi));
  }
  double sum = reduce(acc_lo, acc_hi);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc_lo = vdupq_n_f64(0.0);
  float64x2_t acc_hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc_lo = vaddq_f64(acc_lo, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc_hi = vaddq_f64(acc_hi, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double sum = reduce(acc_lo, acc_hi);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace aa::simd::neon
