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

#include <cstdlib>
#include <string>

#include "kernels.hpp"
#include "segqual/uncertainty.hpp"

namespace segqual::simd {

std::string_view to_string(Level level) {
  switch (level) {
    case Level::scalar:
      return "scalar";
    case Level::avx2:
      return "avx2";
  }
  return "unknown";
}

Level detected_level() {
#if SEGQUAL_HAVE_AVX2_KERNELS
  static const bool has_avx2 = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") != 0;
  }();
  return has_avx2 ? Level::avx2 : Level::scalar;
#else
  return Level::scalar;
#endif
}

Level active_level() {
  if (const char* forced = std::getenv("SEGQUAL_SIMD"); forced != nullptr && std::string(forced) == "scalar") {
    return Level::scalar;
  }
  return detected_level();
}

namespace {

void require_supported(Level level) {
  if (level == Level::avx2 && detected_level() != Level::avx2) {
    throw ConfigError("AVX2 kernels requested on a CPU without AVX2");
  }
}

}  // namespace

void softmax_measures(Level level, std::span<const float> probs, std::size_t num_classes,
                      std::span<double> one_minus_max, std::span<double> entropy, std::span<double> margin) {
  if (num_classes < 2 || probs.size() % num_classes != 0) {
    throw ValidationError("softmax_measures: payload is not a whole number of pixels");
  }
  const std::size_t pixels = probs.size() / num_classes;
  if (one_minus_max.size() != pixels || entropy.size() != pixels || margin.size() != pixels) {
    throw ValidationError("softmax_measures: output size mismatch");
  }
  require_supported(level);
#if SEGQUAL_HAVE_AVX2_KERNELS
  if (level == Level::avx2) {
    detail::softmax_measures_avx2(probs.data(), pixels, num_classes, one_minus_max.data(), entropy.data(),
                                  margin.data());
    return;
  }
#endif
  detail::softmax_measures_scalar(probs.data(), pixels, num_classes, one_minus_max.data(), entropy.data(),
                                  margin.data());
}

void gradient_norms(Level level, std::span<const float> probs, std::size_t num_classes,
                    std::span<const float> features, std::size_t channels, std::span<double> out) {
  if (num_classes < 2 || probs.size() % num_classes != 0) {
    throw ValidationError("gradient_norms: payload is not a whole number of pixels");
  }
  const std::size_t pixels = probs.size() / num_classes;
  if (features.size() != pixels * channels || out.size() != pixels) {
    throw ValidationError("gradient_norms: feature tensor does not match the probability map");
  }
  require_supported(level);
#if SEGQUAL_HAVE_AVX2_KERNELS
  if (level == Level::avx2) {
    detail::gradient_norms_avx2(probs.data(), pixels, num_classes, features.data(), channels, out.data());
    return;
  }
#endif
  detail::gradient_norms_scalar(probs.data(), pixels, num_classes, features.data(), channels, out.data());
}

}  // namespace segqual::simd
