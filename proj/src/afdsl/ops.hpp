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
#include <string_view>

namespace aqs::afdsl {

// Value plus first derivative for forward-mode evaluation.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};

// The operator table: 27 unary, 7 binary, 4 n-ary scalar operators.
// Every operator is total over the extended reals; singular inputs give
// non-finite outputs rather than errors.
enum class UnaryOp : std::uint8_t {
  kZero,
  kOne,
  kIdentity,
  kNeg,
  kAbs,
  kInv,
  kSquare,
  kExp,
  kSigmoid,
  kErf,
  kErfc,
  kSinh,
  kCosh,
  kTanh,
  kArcsinh,
  kArctan,
  kExpm1,
  kLogSigmoid,
  kRelu,
  kElu,
  kSelu,
  kSwish,
  kSoftplus,
  kSoftsign,
  kHardSigmoid,
  kBesselI0e,
  kBesselI1e,
};

enum class BinaryOp : std::uint8_t { kAdd, kSub, kMul, kDiv, kPow, kMax, kMin };

enum class NaryOp : std::uint8_t { kSum, kProduct, kMaximum, kMinimum };

inline constexpr int kNumUnary = 27;
inline constexpr int kNumBinary = 7;
inline constexpr int kNumNary = 4;

double apply(UnaryOp op, double x);
double apply(BinaryOp op, double a, double b);
double apply(NaryOp op, double a, double b, double c);

// Forward-mode rules. At non-differentiable points the derivative of the
// first argument achieving a max/min tie is taken (for unary kinks, the
// right-hand derivative).
Dual apply(UnaryOp op, Dual x);
Dual apply(BinaryOp op, Dual a, Dual b);
Dual apply(NaryOp op, Dual a, Dual b, Dual c);

std::string_view name(UnaryOp op);
std::string_view name(BinaryOp op);
std::string_view name(NaryOp op);

bool unary_from_name(std::string_view s, UnaryOp* out);
bool binary_from_name(std::string_view s, BinaryOp* out);
bool nary_from_name(std::string_view s, NaryOp* out);

// Exponentially scaled modified Bessel functions of the first kind,
// e^{-|x|} I0(x) and e^{-|x|} I1(x). Power series below |x|=15, the
// standard asymptotic expansion above; absolute error under 1e-13.
double bessel_i0e(double x);
double bessel_i1e(double x);

}  // namespace aqs::afdsl
