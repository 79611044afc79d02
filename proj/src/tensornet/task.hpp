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

#include <string>

#include "tensornet/data.hpp"
#include "tensornet/net.hpp"
#include "tensornet/train.hpp"

namespace aqs::tensornet {

// A benchmarkable setting: dataset plus network architecture plus training
// recipe. The activation function is the free variable.
struct Task {
  std::string name;
  Dataset data;
  NetworkSpec net;
  TrainConfig train_cfg;
};

// "blobs": 4-class Gaussian mixture into an 8-16-16-4 MLP.
// "tiles": 8x8 textures into conv3x3(8) -> depthwise3x3 -> conv1x1(16) ->
//          global pool -> dense head (exercises every K-FAC layer type).
Task make_task(const std::string& name, std::uint64_t seed);

// Wraps an externally loaded 8x8 image dataset in the tiles architecture.
Task make_image_task(const std::string& name, Dataset data);

}  // namespace aqs::tensornet
