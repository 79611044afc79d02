// Copyright 2026 The aqs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "core/mat.hpp"
#include "tensornet/tensor.hpp"

namespace aqs::tensornet {

struct ConvGeom {
  int h_out = 0;
  int w_out = 0;
  int positions() const { return h_out * w_out; }
};

inline ConvGeom conv_out_shape(int h, int w, int kernel, int stride, int pad) {
  ConvGeom g;
  g.h_out = (h + 2 * pad - kernel) / stride + 1;
  g.w_out = (w + 2 * pad - kernel) / stride + 1;
  return g;
}

// Patch expansion for standard convolution: one row per (sample, spatial
// position), columns ordered kernel-position-major, channel-minor; padded
// positions read as zero. Shape M*|T| x |D|*J.
inline core::Mat im2col(const Tensor& input, int kernel, int stride, int pad) {
  const int m = input.shape[0], h = input.shape[1], w = input.shape[2],
            c = input.shape[3];
  const ConvGeom g = conv_out_shape(h, w, kernel, stride, pad);
  core::Mat cols(static_cast<std::size_t>(m) * g.positions(),
                 static_cast<std::size_t>(kernel) * kernel * c);
  std::size_t row = 0;
  for (int mi = 0; mi < m; ++mi) {
    const double* img = input.item(mi);
    for (int oy = 0; oy < g.h_out; ++oy) {
      for (int ox = 0; ox < g.w_out; ++ox, ++row) {
        double* dst = cols.data() + row * cols.cols();
        std::size_t k = 0;
        for (int dy = 0; dy < kernel; ++dy) {
          const int iy = oy * stride + dy - pad;
          for (int dx = 0; dx < kernel; ++dx) {
            const int ix = ox * stride + dx - pad;
            if (iy < 0 || iy >= h || ix < 0 || ix >= w) {
              for (int ci = 0; ci < c; ++ci) dst[k++] = 0.0;
            } else {
              const double* px = img + (static_cast<std::size_t>(iy) * w + ix) * c;
              for (int ci = 0; ci < c; ++ci) dst[k++] = px[ci];
            }
          }
        }
      }
    }
  }
  return cols;
}

// Depthwise variant: one row per (sample, spatial position, channel),
// columns over kernel positions. Shape M*|T|*J x |D|.
inline core::Mat im2col_depthwise(const Tensor& input, int kernel, int stride,
                                  int pad) {
  const int m = input.shape[0], h = input.shape[1], w = input.shape[2],
            c = input.shape[3];
  const ConvGeom g = conv_out_shape(h, w, kernel, stride, pad);
  core::Mat cols(static_cast<std::size_t>(m) * g.positions() * c,
                 static_cast<std::size_t>(kernel) * kernel);
  std::size_t row = 0;
  for (int mi = 0; mi < m; ++mi) {
    const double* img = input.item(mi);
    for (int oy = 0; oy < g.h_out; ++oy)
      for (int ox = 0; ox < g.w_out; ++ox)
        for (int ci = 0; ci < c; ++ci, ++row) {
          double* dst = cols.data() + row * cols.cols();
          std::size_t k = 0;
          for (int dy = 0; dy < kernel; ++dy) {
            const int iy = oy * stride + dy - pad;
            for (int dx = 0; dx < kernel; ++dx) {
              const int ix = ox * stride + dx - pad;
              dst[k++] = (iy < 0 || iy >= h || ix < 0 || ix >= w)
                             ? 0.0
                             : img[(static_cast<std::size_t>(iy) * w + ix) * c + ci];
            }
          }
        }
  }
  return cols;
}

// Scatters per-patch gradients back into an input-shaped tensor
// (the adjoint of im2col). cols is M*|T| x |D|*C.
inline void col2im_add(const core::Mat& cols, int kernel, int stride, int pad,
                       Tensor& out) {
  const int m = out.shape[0], h = out.shape[1], w = out.shape[2],
            c = out.shape[3];
  const ConvGeom g = conv_out_shape(h, w, kernel, stride, pad);
  std::size_t row = 0;
  for (int mi = 0; mi < m; ++mi) {
    double* img = out.item(mi);
    for (int oy = 0; oy < g.h_out; ++oy) {
      for (int ox = 0; ox < g.w_out; ++ox, ++row) {
        const double* src = cols.data() + row * cols.cols();
        std::size_t k = 0;
        for (int dy = 0; dy < kernel; ++dy) {
          const int iy = oy * stride + dy - pad;
          for (int dx = 0; dx < kernel; ++dx) {
            const int ix = ox * stride + dx - pad;
            if (iy < 0 || iy >= h || ix < 0 || ix >= w) {
              k += c;
            } else {
              double* px = img + (static_cast<std::size_t>(iy) * w + ix) * c;
              for (int ci = 0; ci < c; ++ci) px[ci] += src[k++];
            }
          }
        }
      }
    }
  }
}

inline void col2im_depthwise_add(const core::Mat& cols, int kernel, int stride,
                                 int pad, Tensor& out) {
  const int m = out.shape[0], h = out.shape[1], w = out.shape[2],
            c = out.shape[3];
  const ConvGeom g = conv_out_shape(h, w, kernel, stride, pad);
  std::size_t row = 0;
  for (int mi = 0; mi < m; ++mi) {
    double* img = out.item(mi);
    for (int oy = 0; oy < g.h_out; ++oy)
      for (int ox = 0; ox < g.w_out; ++ox)
        for (int ci = 0; ci < c; ++ci, ++row) {
          const double* src = cols.data() + row * cols.cols();
          std::size_t k = 0;
          for (int dy = 0; dy < kernel; ++dy) {
            const int iy = oy * stride + dy - pad;
            for (int dx = 0; dx < kernel; ++dx) {
              const int ix = ox * stride + dx - pad;
              if (!(iy < 0 || iy >= h || ix < 0 || ix >= w))
                img[(static_cast<std::size_t>(iy) * w + ix) * c + ci] += src[k];
              ++k;
            }
          }
        }
  }
}

}  // namespace aqs::tensornet
