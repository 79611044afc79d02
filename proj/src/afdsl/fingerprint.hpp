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
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "afdsl/space.hpp"

namespace aqs::afdsl {

inline constexpr std::uint64_t kDefaultProbeSeed = 42;
inline constexpr std::size_t kNumProbes = 1000;

// The shared probe inputs: N(0,1) samples truncated to [-5,5]. Every
// fingerprint and output feature in a run uses one probe vector.
std::vector<double> make_probes(std::uint64_t seed, std::size_t n = kNumProbes);

struct OutputFingerprint {
  std::vector<double> values;
  std::uint64_t digest = 0;
};

OutputFingerprint fingerprint(const ActivationGraph& graph,
                              std::span<const double> probes);

// One unique activation function: the first-enumerated graph producing its
// output vector.
struct UniqueEntry {
  std::string canonical;
  std::uint64_t digest = 0;
  std::uint64_t first_index = 0;
};

// Duplicate-free function table. Two graphs are duplicates iff their probe
// output vectors are identical element-wise (NaN equal to NaN, -0 to +0);
// digests only shortlist candidates, equality is always verified.
class UniqueTable {
 public:
  UniqueTable(std::vector<double> probes) : probes_(std::move(probes)) {}

  // Returns the entry index if the vector is already present, else nullopt.
  std::optional<std::size_t> find(std::span<const double> values,
                                  std::uint64_t digest) const;

  // Adds a representative; caller guarantees it is not present.
  void add(std::string canonical, std::uint64_t digest, std::uint64_t index);

  // find + add in one step; returns (entry index, inserted?).
  std::pair<std::size_t, bool> insert(const ActivationGraph& graph,
                                      std::span<const double> values,
                                      std::uint64_t digest,
                                      std::uint64_t index);

  // Maps any graph (e.g. a named baseline) to its representative.
  std::optional<std::size_t> find_graph(const ActivationGraph& graph) const;

  const std::vector<UniqueEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::span<const double> probes() const { return probes_; }

 private:
  std::vector<double> probes_;
  std::vector<UniqueEntry> entries_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_digest_;
};

// Exhaustively fingerprints a space and keeps the first representative per
// distinct output vector. progress (optional) is called with graphs seen.
UniqueTable dedup_space(SpaceId id, std::vector<double> probes,
                        const std::function<void(std::uint64_t)>& progress = {});

// Generic dedup over an explicit graph list (order defines representatives).
UniqueTable dedup_graphs(const std::vector<ActivationGraph>& graphs,
                         std::vector<double> probes);

}  // namespace aqs::afdsl
