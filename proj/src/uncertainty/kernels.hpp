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

#pragma once

// Internal kernel entry points. Each variant processes a run of consecutive
// pixels; the scalar versions are the reference the SIMD ones are tested
// against.

#include <cstddef>

namespace segqual::simd::detail {

inline constexpr double kLogClamp = 1e-12;

void softmax_measures_scalar(const float* probs, std::size_t pixels, std::size_t num_classes,
                             double* one_minus_max, double* entropy, double* margin);
void gradient_norms_scalar(const float* probs, std::size_t pixels, std::size_t num_classes,
                           const float* features, std::size_t channels, double* out);

#if defined(__x86_64__) || defined(_M_X64)
#define SEGQUAL_HAVE_AVX2_KERNELS 1
void softmax_measures_avx2(const float* probs, std::size_t pixels, std::size_t num_classes,
                           double* one_minus_max, double* entropy, double* margin);
void gradient_norms_avx2(const float* probs, std::size_t pixels, std::size_t num_classes,
                         const float* features, std::size_t channels, double* out);
#else
#define SEGQUAL_HAVE_AVX2_KERNELS 0
#endif

/// Final entropy normalisation shared by every variant: -sum / log N clamped
/// into [0, 1] (also maps -0 to +0).
inline double finish_entropy(double plogp_sum, double inv_log_n) {
  const double e = -plogp_sum * inv_log_n;
  if (!(e > 0.0)) return 0.0;
  return e > 1.0 ? 1.0 : e;
}

}  // namespace segqual::simd::detail
