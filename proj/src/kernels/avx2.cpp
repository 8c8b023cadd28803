// AVX2 + FMA variants.  This translation unit is compiled with -mavx2 -mfma
// and only entered after a runtime CPU check.

#include <immintrin.h>

#include <array>
#include <cmath>
#include <limits>

#include "iptvq/kernels/kernels.hpp"

namespace iptvq::kernels::avx2 {

namespace {

constexpr int kLanes = 4;

// Round-to-nearest double -> int64 for |x| < 2^51.
inline __m256i to_int64(__m256d x) {
  const __m256d magic = _mm256_set1_pd(0x1.8p52);
  return _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(x, magic)),
                          _mm256_castpd_si256(magic));
}

inline __m256d to_double(__m256i x) {
  const __m256d magic = _mm256_set1_pd(0x1.8p52);
  return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_add_epi64(x, _mm256_castpd_si256(magic))),
                       magic);
}

// exp(x) with Cody-Waite reduction and a degree-13 Taylor polynomial on
// |r| <= ln2/2.  Results below ~1e-308 flush to zero.
inline __m256d exp_pd(__m256d x) {
  const __m256d nan_mask = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(-708.0), _CMP_LT_OQ);
  const __m256d overflow = _mm256_cmp_pd(x, _mm256_set1_pd(709.0), _CMP_GT_OQ);
  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(709.0));

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), xc);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);

  static constexpr std::array<double, 14> kInverseFactorial = {
      1.0,
      1.0,
      1.0 / 2,
      1.0 / 6,
      1.0 / 24,
      1.0 / 120,
      1.0 / 720,
      1.0 / 5040,
      1.0 / 40320,
      1.0 / 362880,
      1.0 / 3628800,
      1.0 / 39916800,
      1.0 / 479001600,
      1.0 / 6227020800.0,
  };
  __m256d p = _mm256_set1_pd(kInverseFactorial[13]);
  for (int k = 12; k >= 0; --k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInverseFactorial[k]));

  const __m256i biased = _mm256_add_epi64(to_int64(n), _mm256_set1_epi64x(1023));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(biased, 52));
  __m256d result = _mm256_mul_pd(p, scale);
  result = _mm256_blendv_pd(result, _mm256_setzero_pd(), underflow);
  result = _mm256_blendv_pd(result, _mm256_set1_pd(std::numeric_limits<double>::infinity()), overflow);
  return _mm256_blendv_pd(result, x, nan_mask);
}

// log(x) for positive normal x via log(m) = 2 atanh((m-1)/(m+1)) with
// m in [sqrt(1/2), sqrt(2)).  x == 0 gives -inf, x < 0 or NaN gives NaN.
inline __m256d log_pd(__m256d x) {
  const __m256d zero_mask = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_EQ_OQ);
  const __m256d invalid = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_NGE_UQ);  // x < 0 or NaN
  const __m256d inf_mask = _mm256_cmp_pd(x, _mm256_set1_pd(std::numeric_limits<double>::infinity()), _CMP_EQ_OQ);

  const __m256i bits = _mm256_castpd_si256(x);
  __m256i exponent = _mm256_sub_epi64(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(1023));
  const __m256i mantissa_bits =
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                      _mm256_set1_epi64x(0x3FF0000000000000LL));
  __m256d m = _mm256_castsi256_pd(mantissa_bits);
  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  exponent = _mm256_add_epi64(exponent, _mm256_and_si256(_mm256_castpd_si256(big), _mm256_set1_epi64x(1)));
  const __m256d e = to_double(exponent);

  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, _mm256_set1_pd(1.0)), _mm256_add_pd(m, _mm256_set1_pd(1.0)));
  const __m256d s2 = _mm256_mul_pd(s, s);
  // 1 + s2/3 + s2^2/5 + ... + s2^10/21
  __m256d p = _mm256_set1_pd(1.0 / 21);
  for (int k = 19; k >= 3; k -= 2) p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / k));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0));
  const __m256d log_m = _mm256_mul_pd(_mm256_add_pd(s, s), p);

  __m256d result = _mm256_fmadd_pd(e, _mm256_set1_pd(1.90821492927058770002e-10), log_m);
  result = _mm256_fmadd_pd(e, _mm256_set1_pd(6.93147180369123816490e-01), result);

  result = _mm256_blendv_pd(result, _mm256_set1_pd(-std::numeric_limits<double>::infinity()), zero_mask);
  result = _mm256_blendv_pd(result, x, inf_mask);
  return _mm256_blendv_pd(result, _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN()), invalid);
}

inline __m256d lane_indices(std::size_t k) {
  const double base = static_cast<double>(k);
  return _mm256_setr_pd(base, base + 1, base + 2, base + 3);
}

}  // namespace

void exact_run(double base, double log_ratio, std::span<const double> log_factorial,
               std::span<double> out) {
  const std::size_t length = out.size();
  if (length == 0) return;
  const __m256d vbase = _mm256_set1_pd(base);
  const __m256d vratio = _mm256_set1_pd(log_ratio);
  std::size_t k = 0;
  for (; k + kLanes <= length; k += kLanes) {
    const __m256d v = _mm256_sub_pd(_mm256_fmadd_pd(lane_indices(k), vratio, vbase),
                                    _mm256_loadu_pd(log_factorial.data() + k));
    _mm256_storeu_pd(out.data() + k, v);
  }
  for (; k < length; ++k) out[k] = base + static_cast<double>(k) * log_ratio - log_factorial[k];
  out[0] = base;
}

void mobility_run(const MobilityTerms& t, std::span<const int> prefix,
                  std::span<const double> log_factorial, std::span<double> out) {
  const int zones = t.zones;
  const int last = zones - 1;
  const std::size_t length = out.size();

  double prefix_log_factorial = 0;
  double prefix_departure = t.lambda_total;
  for (int i = 0; i < last; ++i) {
    prefix_log_factorial += log_factorial[prefix[i]];
    prefix_departure += prefix[i] * t.departure[i];
  }

  // Per-zone pieces of f_i that do not depend on the last count; the terms
  // involving n_last enter as coefficient * k.
  struct ZoneTerms {
    double inflow0, inflow_k;  // sum_j (n_j+1) v_ji lambda_j = inflow0 + inflow_k * k
    double back0, back_k;      // sum_j v_ij (n_j+1) v_ji
    double cross0, cross_k;    // sum_j n_j v_ij
  };
  std::array<ZoneTerms, 64> pieces{};
  for (int i = 0; i < zones; ++i) {
    ZoneTerms z{};
    for (int j = 0; j < zones; ++j) {
      if (j == i) continue;
      const double v_ij = t.rate(i, j);
      const double v_ji = t.rate(j, i);
      if (j == last) {
        z.inflow0 += v_ji * t.lambda[j];
        z.inflow_k += v_ji * t.lambda[j];
        z.back0 += v_ij * v_ji;
        z.back_k += v_ij * v_ji;
        z.cross_k += v_ij;
      } else {
        z.inflow0 += (prefix[j] + 1) * v_ji * t.lambda[j];
        z.back0 += v_ij * (prefix[j] + 1) * v_ji;
        z.cross0 += prefix[j] * v_ij;
      }
    }
    pieces[i] = z;
  }

  const __m256d alpha = _mm256_set1_pd(t.alpha);
  const __m256d one_minus_alpha = _mm256_set1_pd(1 - t.alpha);
  const __m256d mu = _mm256_set1_pd(t.mu);
  const __m256d one = _mm256_set1_pd(1.0);

  auto factor = [&](int i, __m256d kv, __m256d total_departure) {
    const ZoneTerms& z = pieces[i];
    const __m256d without_i = _mm256_sub_pd(total_departure, _mm256_set1_pd(t.departure[i]));
    const __m256d inflow = _mm256_fmadd_pd(kv, _mm256_set1_pd(z.inflow_k), _mm256_set1_pd(z.inflow0));
    const __m256d back = _mm256_fmadd_pd(kv, _mm256_set1_pd(z.back_k), _mm256_set1_pd(z.back0));
    const __m256d cross = _mm256_fmadd_pd(kv, _mm256_set1_pd(z.cross_k), _mm256_set1_pd(z.cross0));
    const __m256d lambda_i = _mm256_set1_pd(t.lambda[i]);

    const __m256d has_inflow = _mm256_cmp_pd(inflow, _mm256_setzero_pd(), _CMP_NEQ_OQ);
    const __m256d inflow_term = _mm256_and_pd(_mm256_div_pd(inflow, without_i), has_inflow);
    const __m256d arriving = _mm256_add_pd(lambda_i, inflow_term);
    const __m256d first_den = _mm256_sub_pd(_mm256_add_pd(mu, _mm256_set1_pd(t.outflow[i])),
                                            _mm256_div_pd(back, total_departure));
    const __m256d first = _mm256_div_pd(arriving, first_den);
    const __m256d second_den = _mm256_mul_pd(mu, _mm256_add_pd(one, _mm256_div_pd(cross, total_departure)));
    const __m256d second = _mm256_div_pd(lambda_i, second_den);
    return _mm256_fmadd_pd(alpha, first, _mm256_mul_pd(one_minus_alpha, second));
  };

  auto chunk = [&](std::size_t k, __m256d log_factorial_k) {
    const __m256d kv = lane_indices(k);
    const __m256d total_departure =
        _mm256_fmadd_pd(kv, _mm256_set1_pd(t.departure[last]), _mm256_set1_pd(prefix_departure));
    __m256d lw = _mm256_sub_pd(_mm256_set1_pd(-prefix_log_factorial), log_factorial_k);
    for (int i = 0; i < last; ++i) {
      if (prefix[i] == 0) continue;
      const __m256d f = factor(i, kv, total_departure);
      lw = _mm256_fmadd_pd(_mm256_set1_pd(prefix[i]), log_pd(f), lw);
    }
    const __m256d f_last = factor(last, kv, total_departure);
    const __m256d occupied = _mm256_cmp_pd(kv, _mm256_setzero_pd(), _CMP_GT_OQ);
    return _mm256_add_pd(lw, _mm256_and_pd(_mm256_mul_pd(kv, log_pd(f_last)), occupied));
  };

  std::size_t k = 0;
  for (; k + kLanes <= length; k += kLanes) {
    _mm256_storeu_pd(out.data() + k, chunk(k, _mm256_loadu_pd(log_factorial.data() + k)));
  }
  if (k < length) {
    std::array<double, kLanes> factorials{};
    for (std::size_t r = k; r < length; ++r) factorials[r - k] = log_factorial[r];
    std::array<double, kLanes> result;
    _mm256_storeu_pd(result.data(), chunk(k, _mm256_loadu_pd(factorials.data())));
    for (std::size_t r = k; r < length; ++r) out[r] = result[r - k];
  }
}

void exp_shifted(std::span<const double> in, double shift, std::span<double> out) {
  const std::size_t length = in.size();
  const __m256d vshift = _mm256_set1_pd(shift);
  std::size_t k = 0;
  for (; k + kLanes <= length; k += kLanes) {
    _mm256_storeu_pd(out.data() + k, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(in.data() + k), vshift)));
  }
  if (k < length) {
    std::array<double, kLanes> buffer;
    buffer.fill(-std::numeric_limits<double>::infinity());
    for (std::size_t r = k; r < length; ++r) buffer[r - k] = in[r];
    std::array<double, kLanes> result;
    _mm256_storeu_pd(result.data(), exp_pd(_mm256_sub_pd(_mm256_loadu_pd(buffer.data()), vshift)));
    for (std::size_t r = k; r < length; ++r) out[r] = result[r - k];
  }
}

double max_value(std::span<const double> in) {
  const std::size_t length = in.size();
  __m256d best = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t k = 0;
  for (; k + kLanes <= length; k += kLanes) {
    // max_pd returns the second operand when either is NaN, so NaN lanes
    // never replace the running maximum.
    best = _mm256_max_pd(_mm256_loadu_pd(in.data() + k), best);
  }
  std::array<double, kLanes> lanes;
  _mm256_storeu_pd(lanes.data(), best);
  double result = lanes[0];
  for (int i = 1; i < kLanes; ++i) result = lanes[i] > result ? lanes[i] : result;
  for (; k < length; ++k) result = in[k] > result ? in[k] : result;
  return result;
}

}  // namespace iptvq::kernels::avx2
