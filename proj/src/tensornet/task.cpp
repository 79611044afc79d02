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

#include "tensornet/task.hpp"

#include <stdexcept>

namespace aqs::tensornet {

namespace {

NetworkSpec mlp_spec(int in, int hidden, int classes) {
  NetworkSpec spec;
  spec.layers = {DenseSpec{in, hidden, true}, DenseSpec{hidden, hidden, true},
                 DenseSpec{hidden, classes, true}, SoftmaxHeadSpec{}};
  return spec;
}

NetworkSpec cnn_spec(int classes) {
  NetworkSpec spec;
  spec.layers = {Conv2dSpec{1, 8, 3, 1, 1, true},
                 Depthwise2dSpec{8, 3, 1, 1, true},
                 Conv2dSpec{8, 16, 1, 1, 0, true},
                 GlobalAvgPoolSpec{},
                 DenseSpec{16, classes, true},
                 SoftmaxHeadSpec{}};
  return spec;
}

}  // namespace

Task make_task(const std::string& name, std::uint64_t seed) {
  Task task;
  task.name = name;
  task.train_cfg = TrainConfig{};
  task.train_cfg.seed = seed;
  if (name == "blobs") {
    task.data = make_blobs(seed);
    task.net = mlp_spec(8, 16, task.data.num_classes);
    task.net.check({1, 8});
    return task;
  }
  if (name == "tiles") {
    task.data = make_tiles(seed);
    task.net = cnn_spec(task.data.num_classes);
    task.net.check({1, 8, 8, 1});
    return task;
  }
  throw std::invalid_argument("unknown task '" + name + "' (expected blobs|tiles)");
}

Task make_image_task(const std::string& name, Dataset data) {
  Task task;
  task.name = name;
  task.train_cfg = TrainConfig{};
  task.net = cnn_spec(data.num_classes);
  task.net.check({1, 8, 8, 1});
  task.data = std::move(data);
  return task;
}

}  // namespace aqs::tensornet
