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

#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace aqs::tensornet {

// Batch-major dense tensor, channels-last for images: [M, D] or [M, H, W, C].
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(count(), 0.0);
  }

  std::size_t count() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }

  int batch() const { return shape.empty() ? 0 : shape[0]; }

  // Elements per batch item.
  std::size_t item_size() const { return batch() ? count() / batch() : 0; }

  double* item(int m) { return data.data() + item_size() * m; }
  const double* item(int m) const { return data.data() + item_size() * m; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

}  // namespace aqs::tensornet
