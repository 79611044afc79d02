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
#include <cstring>
#include <span>
#include <string_view>

namespace aqs::core {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(s.data(), s.size());
}

// Canonical bit pattern of a double: all NaNs map to one quiet NaN and
// -0.0 maps to +0.0, so bit equality matches element-wise value equality
// (with NaN treated as equal to NaN).
inline std::uint64_t canonical_bits(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  if (v != v) return 0x7ff8000000000000ull;
  if (bits == 0x8000000000000000ull) return 0;
  return bits;
}

// 64-bit digest over the little-endian byte concatenation of the values.
inline std::uint64_t digest_doubles(std::span<const double> values) {
  std::uint64_t h = kFnvOffset;
  for (double v : values) {
    std::uint64_t bits = canonical_bits(v);
    for (int i = 0; i < 8; ++i) {
      h ^= static_cast<unsigned char>(bits >> (8 * i));
      h *= kFnvPrime;
    }
  }
  return h;
}

inline bool doubles_equal(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (canonical_bits(a[i]) != canonical_bits(b[i])) return false;
  }
  return true;
}

}  // namespace aqs::core
