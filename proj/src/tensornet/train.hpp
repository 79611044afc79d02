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

#include "tensornet/data.hpp"
#include "tensornet/net.hpp"

namespace aqs::tensornet {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 128;
  double momentum = 0.9;
  double peak_lr = 0.1;
  int warmup_epochs = 3;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainResult {
  double best_val_accuracy = 0.0;
  bool failed = false;  // non-finite loss at some step
  std::vector<double> epoch_val_accuracy;
};

// SGD with momentum under a linear-warmup + linear-decay schedule; returns
// the best validation accuracy seen. A non-finite loss marks the run failed
// and the accuracy is recorded at chance level (1/num_classes).
TrainResult train(Network& net, const Dataset& data, const TrainConfig& cfg);

double evaluate_accuracy(const Network& net, const Tensor& x,
                         const std::vector<int>& y);

}  // namespace aqs::tensornet
