// Copyright 2026 The segqual Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kernels.hpp"

#if SEGQUAL_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

// Four pixels per iteration, one double lane each. Functions carry a target
// attribute instead of a per-file -mavx2 so no AVX2 code leaks into inline
// functions shared with the rest of the program.
#define SEGQUAL_AVX2 __attribute__((target("avx2")))

namespace segqual::simd::detail {

namespace {

SEGQUAL_AVX2 inline __m256d gather_pixels(const float* base, __m128i offsets) {
  return _mm256_cvtps_pd(_mm_i32gather_ps(base, offsets, 4));
}

// Natural log for x in [kLogClamp, 1]: x = m * 2^e with m in [sqrt(1/2),
// sqrt(2)), log m = 2 atanh(s), s = (m - 1) / (m + 1), |s| <= 0.1716; the
// odd series through s^21 is accurate to ~1e-17.
SEGQUAL_AVX2 inline __m256d log_avx2(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i mantissa_mask = _mm256_set1_epi64x(0x000fffffffffffffLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3ff0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mantissa_mask), one_bits));

  // Biased exponent of each lane, packed into four 32-bit ints.
  const __m256i exp64 = _mm256_srli_epi64(bits, 52);
  const __m256i packed = _mm256_permutevar8x32_epi32(exp64, _mm256_setr_epi32(0, 2, 4, 6, 1, 3, 5, 7));
  __m256d e = _mm256_sub_pd(_mm256_cvtepi32_pd(_mm256_castsi256_si128(packed)), _mm256_set1_pd(1023.0));

  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(std::numbers::sqrt2), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d t = _mm256_mul_pd(s, s);
  __m256d poly = _mm256_set1_pd(1.0 / 21.0);
  for (int n = 9; n >= 0; --n) {
    poly = _mm256_add_pd(_mm256_mul_pd(poly, t), _mm256_set1_pd(1.0 / (2.0 * n + 1.0)));
  }
  const __m256d log_m = _mm256_mul_pd(_mm256_add_pd(s, s), poly);
  return _mm256_add_pd(_mm256_mul_pd(e, _mm256_set1_pd(std::numbers::ln2)), log_m);
}

}  // namespace

SEGQUAL_AVX2 void softmax_measures_avx2(const float* probs, std::size_t pixels, std::size_t num_classes,
                                        double* one_minus_max, double* entropy, double* margin) {
  const double inv_log_n = 1.0 / std::log(static_cast<double>(num_classes));
  const int stride = static_cast<int>(num_classes);
  const __m128i offsets = _mm_setr_epi32(0, stride, 2 * stride, 3 * stride);
  const __m256d clamp = _mm256_set1_pd(kLogClamp);
  const __m256d one = _mm256_set1_pd(1.0);

  std::size_t i = 0;
  for (; i + 4 <= pixels; i += 4) {
    const float* base = probs + i * num_classes;
    __m256d top1 = gather_pixels(base, offsets);
    __m256d top2 = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    __m256d plogp = _mm256_mul_pd(top1, log_avx2(_mm256_max_pd(top1, clamp)));
    for (std::size_t k = 1; k < num_classes; ++k) {
      const __m256d v = gather_pixels(base + k, offsets);
      top2 = _mm256_max_pd(top2, _mm256_min_pd(top1, v));
      top1 = _mm256_max_pd(top1, v);
      plogp = _mm256_add_pd(plogp, _mm256_mul_pd(v, log_avx2(_mm256_max_pd(v, clamp))));
    }
    _mm256_storeu_pd(one_minus_max + i, _mm256_sub_pd(one, top1));
    _mm256_storeu_pd(margin + i, _mm256_sub_pd(top1, top2));
    alignas(32) double sums[4];
    _mm256_store_pd(sums, plogp);
    for (int j = 0; j < 4; ++j) entropy[i + j] = finish_entropy(sums[j], inv_log_n);
  }
  if (i < pixels) {
    softmax_measures_scalar(probs + i * num_classes, pixels - i, num_classes, one_minus_max + i, entropy + i,
                            margin + i);
  }
}

SEGQUAL_AVX2 void gradient_norms_avx2(const float* probs, std::size_t pixels, std::size_t num_classes,
                                      const float* features, std::size_t channels, double* out) {
  const int stride = static_cast<int>(num_classes);
  const int fstride = static_cast<int>(channels);
  const __m128i offsets = _mm_setr_epi32(0, stride, 2 * stride, 3 * stride);
  const __m128i foffsets = _mm_setr_epi32(0, fstride, 2 * fstride, 3 * fstride);

  std::size_t i = 0;
  for (; i + 4 <= pixels; i += 4) {
    const float* base = probs + i * num_classes;
    __m256d top = gather_pixels(base, offsets);
    for (std::size_t k = 1; k < num_classes; ++k) top = _mm256_max_pd(top, gather_pixels(base + k, offsets));

    // Skip exactly one class per lane: the first one attaining the maximum.
    __m256d excluded = _mm256_setzero_pd();
    __m256d class_sq = _mm256_setzero_pd();
    for (std::size_t k = 0; k < num_classes; ++k) {
      const __m256d v = gather_pixels(base + k, offsets);
      const __m256d hit = _mm256_andnot_pd(excluded, _mm256_cmp_pd(v, top, _CMP_EQ_OQ));
      excluded = _mm256_or_pd(excluded, hit);
      class_sq = _mm256_add_pd(class_sq, _mm256_andnot_pd(hit, _mm256_mul_pd(v, v)));
    }

    const float* fbase = features + i * channels;
    __m256d feature_sq = _mm256_setzero_pd();
    for (std::size_t c = 0; c < channels; ++c) {
      const __m256d v = gather_pixels(fbase + c, foffsets);
      feature_sq = _mm256_add_pd(feature_sq, _mm256_mul_pd(v, v));
    }
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_sqrt_pd(class_sq), _mm256_sqrt_pd(feature_sq)));
  }
  if (i < pixels) {
    gradient_norms_scalar(probs + i * num_classes, pixels - i, num_classes, features + i * channels, channels,
                          out + i);
  }
}

}  // namespace segqual::simd::detail

#endif
