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
#include <vector>

#include "bench/bench.hpp"
#include "pipeline/artifacts.hpp"

namespace aqs::pipeline {

// Embedding scatter colored by benchmark accuracy (grey when a function has
// no table row). Deterministic bytes for fixed inputs.
std::string scatter_svg(const std::vector<AtlasFileRow>& atlas,
                        const bench::BenchmarkTable* table,
                        const std::string& title);

// Best-so-far curves with shaded confidence bands, one polyline per config.
std::string curves_svg(const std::vector<bench::AggregateCurve>& curves,
                       const std::string& title);

}  // namespace aqs::pipeline
