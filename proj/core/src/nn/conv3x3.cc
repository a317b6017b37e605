/*
 * Copyright 2026 The CasNN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "conv3x3.h"

#include <algorithm>
#include <cstring>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace casnn::nn::detail {
namespace {

constexpr std::size_t kBlock = 8;   // output channels per register block
constexpr std::size_t kLanes = 16;  // floats per vector
constexpr std::size_t kChunk = 2 * kLanes;
constexpr std::size_t kMinWidth = 24;

}  // namespace

std::vector<float> pack_conv3x3(const float* weight, std::size_t cout, std::size_t cin,
                                bool adjoint) {
  // The packed operator maps `in` channels to `out` channels.
  const std::size_t out = adjoint ? cin : cout;
  const std::size_t in = adjoint ? cout : cin;
  const std::size_t blocks = (out + kBlock - 1) / kBlock;
  std::vector<float> packed(blocks * in * 9 * kBlock, 0.0f);
  for (std::size_t o = 0; o < out; ++o) {
    const std::size_t b = o / kBlock;
    const std::size_t j = o % kBlock;
    for (std::size_t i = 0; i < in; ++i) {
      for (std::size_t tap = 0; tap < 9; ++tap) {
        const float v =
            adjoint ? weight[(i * cin + o) * 9 + (8 - tap)] : weight[(o * cin + i) * 9 + tap];
        packed[((b * in + i) * 9 + tap) * kBlock + j] = v;
      }
    }
  }
  return packed;
}

#if defined(__AVX512F__)

bool conv3x3_direct_available(std::size_t output_width) { return output_width >= kMinWidth; }

namespace {

inline __mmask16 lane_mask(std::size_t count) {
  return count >= kLanes ? __mmask16(0xFFFF) : static_cast<__mmask16>((1u << count) - 1u);
}

// Row layout of the padded input: `stride` phase planes of `wq` floats, where
// plane p holds padded columns p, p + stride, p + 2 * stride, ...
template <std::size_t Stride>
void direct_kernel(const float* x, std::size_t cin, std::size_t h, std::size_t w,
                   const float* packed, std::size_t cout, float* y,
                   std::vector<float>& scratch) {
  const std::size_t oh = (h - 1) / Stride + 1;
  const std::size_t ow = (w - 1) / Stride + 1;
  const std::size_t chunks = (ow + kChunk - 1) / kChunk;
  const std::size_t wq = chunks * kChunk + (Stride == 1 ? 2 : 1);
  const std::size_t row_len = Stride * wq;
  const std::size_t hp = h + 2;
  scratch.assign(cin * hp * row_len, 0.0f);
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t r = 0; r < h; ++r) {
      const float* src = x + (c * h + r) * w;
      float* dst = &scratch[(c * hp + r + 1) * row_len];
      if constexpr (Stride == 1) {
        std::memcpy(dst + 1, src, w * sizeof(float));
      } else {
        for (std::size_t col = 0; col < w; ++col) {
          const std::size_t q = col + 1;
          dst[(q % Stride) * wq + q / Stride] = src[col];
        }
      }
    }
  }
  const float* xp = scratch.data();
  const std::size_t blocks = (cout + kBlock - 1) / kBlock;
  const std::size_t tail = ow - (chunks - 1) * kChunk;
  const __mmask16 tail0 = lane_mask(tail);
  const __mmask16 tail1 = tail > kLanes ? lane_mask(tail - kLanes) : __mmask16(0);

  for (std::size_t oy = 0; oy < oh; ++oy) {
    for (std::size_t b = 0; b < blocks; ++b) {
      const float* wb = packed + b * cin * 9 * kBlock;
      const std::size_t valid = std::min(kBlock, cout - b * kBlock);
      for (std::size_t ch = 0; ch < chunks; ++ch) {
        __m512 acc0[kBlock];
        __m512 acc1[kBlock];
        for (std::size_t j = 0; j < kBlock; ++j) {
          acc0[j] = _mm512_setzero_ps();
          acc1[j] = _mm512_setzero_ps();
        }
        const float* base = xp + oy * Stride * row_len + ch * kChunk;
        for (std::size_t c = 0; c < cin; ++c) {
          const float* rc = base + c * hp * row_len;
          const float* wc = wb + c * 9 * kBlock;
          for (std::size_t ky = 0; ky < 3; ++ky) {
            const float* row = rc + ky * row_len;
#pragma GCC unroll 3
            for (std::size_t kx = 0; kx < 3; ++kx) {
              const float* src = row + (kx % Stride) * wq + kx / Stride;
              const __m512 v0 = _mm512_loadu_ps(src);
              const __m512 v1 = _mm512_loadu_ps(src + kLanes);
              const float* wt = wc + (ky * 3 + kx) * kBlock;
#pragma GCC unroll 8
              for (std::size_t j = 0; j < kBlock; ++j) {
                const __m512 s = _mm512_set1_ps(wt[j]);
                acc0[j] = _mm512_fmadd_ps(s, v0, acc0[j]);
                acc1[j] = _mm512_fmadd_ps(s, v1, acc1[j]);
              }
            }
          }
        }
        const bool last = ch + 1 == chunks;
        for (std::size_t j = 0; j < valid; ++j) {
          float* dst = y + ((b * kBlock + j) * oh + oy) * ow + ch * kChunk;
          if (!last) {
            _mm512_storeu_ps(dst, acc0[j]);
            _mm512_storeu_ps(dst + kLanes, acc1[j]);
          } else {
            _mm512_mask_storeu_ps(dst, tail0, acc0[j]);
            if (tail1) _mm512_mask_storeu_ps(dst + kLanes, tail1, acc1[j]);
          }
        }
      }
    }
  }
}

}  // namespace

void conv3x3_direct(const float* x, std::size_t cin, std::size_t h, std::size_t w,
                    std::size_t stride, const float* packed, std::size_t cout, float* y,
                    std::vector<float>& scratch) {
  if (stride == 1) {
    direct_kernel<1>(x, cin, h, w, packed, cout, y, scratch);
  } else {
    direct_kernel<2>(x, cin, h, w, packed, cout, y, scratch);
  }
}

void conv3x3_weight_grad(const float* x, std::size_t cin, std::size_t h, std::size_t w,
                         const float* dy, std::size_t cout, float* dw,
                         std::vector<float>& scratch) {
  const std::size_t vecs = (w + kLanes - 1) / kLanes;
  const std::size_t wd = vecs * kLanes;
  const std::size_t wp = wd + 2;
  const std::size_t hp = h + 2;
  // Zero-padded input followed by width-padded output gradient; the padding
  // lanes of dy are zero, so over-reading x past the row end adds nothing.
  scratch.assign(cin * hp * wp + cout * h * wd, 0.0f);
  float* xp = scratch.data();
  float* dyp = xp + cin * hp * wp;
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t r = 0; r < h; ++r) {
      std::memcpy(xp + (c * hp + r + 1) * wp + 1, x + (c * h + r) * w, w * sizeof(float));
    }
  }
  for (std::size_t c = 0; c < cout; ++c) {
    for (std::size_t r = 0; r < h; ++r) {
      std::memcpy(dyp + (c * h + r) * wd, dy + (c * h + r) * w, w * sizeof(float));
    }
  }
  for (std::size_t ci = 0; ci < cin; ++ci) {
    const float* xc = xp + ci * hp * wp;
    for (std::size_t co = 0; co < cout; co += 2) {
      const bool pair = co + 1 < cout;
      const float* d0p = dyp + co * h * wd;
      const float* d1p = pair ? d0p + h * wd : d0p;
      __m512 a0[9];
      __m512 a1[9];
      for (std::size_t t = 0; t < 9; ++t) {
        a0[t] = _mm512_setzero_ps();
        a1[t] = _mm512_setzero_ps();
      }
      for (std::size_t oy = 0; oy < h; ++oy) {
        for (std::size_t v = 0; v < vecs; ++v) {
          const __m512 d0 = _mm512_loadu_ps(d0p + oy * wd + v * kLanes);
          const __m512 d1 = _mm512_loadu_ps(d1p + oy * wd + v * kLanes);
          const float* src = xc + oy * wp + v * kLanes;
#pragma GCC unroll 9
          for (std::size_t t = 0; t < 9; ++t) {
            const __m512 xv = _mm512_loadu_ps(src + (t / 3) * wp + t % 3);
            a0[t] = _mm512_fmadd_ps(d0, xv, a0[t]);
            a1[t] = _mm512_fmadd_ps(d1, xv, a1[t]);
          }
        }
      }
      for (std::size_t t = 0; t < 9; ++t) {
        dw[(co * cin + ci) * 9 + t] += _mm512_reduce_add_ps(a0[t]);
        if (pair) dw[((co + 1) * cin + ci) * 9 + t] += _mm512_reduce_add_ps(a1[t]);
      }
    }
  }
}

#else

bool conv3x3_direct_available(std::size_t) { return false; }

void conv3x3_direct(const float*, std::size_t, std::size_t, std::size_t, std::size_t,
                    const float*, std::size_t, float*, std::vector<float>&) {}

void conv3x3_weight_grad(const float*, std::size_t, std::size_t, std::size_t, const float*,
                         std::size_t, float*, std::vector<float>&) {}

#endif

}  // namespace casnn::nn::detail
