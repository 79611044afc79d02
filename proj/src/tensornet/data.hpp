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

#include <cstdint>
#include <string>
#include <vector>

#include "tensornet/tensor.hpp"

namespace aqs::tensornet {

struct Dataset {
  Tensor train_x;
  Tensor val_x;
  std::vector<int> train_y;
  std::vector<int> val_y;
  int num_classes = 0;
};

// 8-d Gaussian-mixture classification: `components` clusters per class with
// seeded centers, unit within-cluster noise, balanced splits, features
// standardized by the train statistics.
Dataset make_blobs(std::uint64_t seed, int n_train = 2000, int n_val = 500,
                   int dim = 8, int classes = 4, int components = 2);

// 8x8 single-channel texture classification: oriented sinusoidal gratings
// (one orientation per class) with random phase and additive noise.
Dataset make_tiles(std::uint64_t seed, int n_train = 2000, int n_val = 500,
                   int classes = 4);

// IDX image+label pair (big-endian magic and dimensions), downsampled to
// 8x8 by block averaging. Throws on malformed files.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 int n_train, int n_val);

// CSV rows "label,p0,p1,...", square image per row, downsampled to 8x8.
Dataset load_csv(const std::string& path, int n_train, int n_val);

}  // namespace aqs::tensornet
