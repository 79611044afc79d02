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

#include "afdsl/ops.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace aqs::afdsl {
namespace {

constexpr double kSeluScale = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
// 2/sqrt(pi), the derivative scale of erf.
const double kErfScale = 2.0 / std::sqrt(std::numbers::pi);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Stable log(1 + e^x) = max(x, 0) + log1p(e^{-|x|}).
inline double softplus(double x) {
  if (std::isnan(x)) return x;
  return std::fmax(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

inline double hard_sigmoid(double x) {
  const double v = 0.2 * x + 0.5;
  if (v < 0.0) return 0.0;
  if (v > 1.0) return 1.0;
  return v;  // NaN falls through
}

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// NaN-propagating max/min; ties resolve to the first argument.
inline double vmax(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return kNan;
  return a >= b ? a : b;
}
inline double vmin(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return kNan;
  return a <= b ? a : b;
}

}  // namespace

// I0 and I1 via their everywhere-convergent power series; above the
// crossover the asymptotic expansion e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} *
// sum_k prod_{j<=k} (mu - (2j-1)^2) / (k! (8x)^k), mu = 4 nu^2, truncated
// where the terms stop improving.
namespace {

constexpr double kBesselCrossover = 15.0;

double i0e_series(double ax) {
  // e^{-x} * sum_k (x/2)^{2k} / (k!)^2 ; all terms positive.
  const double q = 0.25 * ax * ax;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return std::exp(-ax) * sum;
}

double i1e_series(double ax) {
  const double q = 0.25 * ax * ax;
  double term = 0.5 * ax, sum = term;
  for (int k = 1; k < 80; ++k) {
    term *= q / (static_cast<double>(k) * (k + 1));
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return std::exp(-ax) * sum;
}

double ie_asymptotic(double ax, double mu) {
  const double inv8x = 1.0 / (8.0 * ax);
  double term = 1.0, sum = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 30; ++k) {
    const double num = mu - static_cast<double>(2 * k - 1) * (2 * k - 1);
    term *= -num * inv8x / k;
    const double mag = std::fabs(term);
    if (mag >= prev) break;  // divergence point of the asymptotic series
    sum += term;
    prev = mag;
    if (mag < 1e-18) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * ax);
}

}  // namespace

double bessel_i0e(double x) {
  if (std::isnan(x)) return x;
  const double ax = std::fabs(x);
  if (std::isinf(ax)) return 0.0;
  if (ax < kBesselCrossover) return i0e_series(ax);
  return ie_asymptotic(ax, 0.0);
}

double bessel_i1e(double x) {
  if (std::isnan(x)) return x;
  const double ax = std::fabs(x);
  if (std::isinf(ax)) return x > 0 ? 0.0 : -0.0;
  const double v = ax < kBesselCrossover ? i1e_series(ax) : ie_asymptotic(ax, 4.0);
  return x < 0 ? -v : v;
}

double apply(UnaryOp op, double x) {
  switch (op) {
    case UnaryOp::kZero: return 0.0;
    case UnaryOp::kOne: return 1.0;
    case UnaryOp::kIdentity: return x;
    case UnaryOp::kNeg: return -x;
    case UnaryOp::kAbs: return std::fabs(x);
    case UnaryOp::kInv: return 1.0 / x;
    case UnaryOp::kSquare: return x * x;
    case UnaryOp::kExp: return std::exp(x);
    case UnaryOp::kSigmoid: return sigmoid(x);
    case UnaryOp::kErf: return std::erf(x);
    case UnaryOp::kErfc: return std::erfc(x);
    case UnaryOp::kSinh: return std::sinh(x);
    case UnaryOp::kCosh: return std::cosh(x);
    case UnaryOp::kTanh: return std::tanh(x);
    case UnaryOp::kArcsinh: return std::asinh(x);
    case UnaryOp::kArctan: return std::atan(x);
    case UnaryOp::kExpm1: return std::expm1(x);
    case UnaryOp::kLogSigmoid: return -softplus(-x);
    case UnaryOp::kRelu: return std::isnan(x) ? x : (x > 0.0 ? x : 0.0);
    case UnaryOp::kElu: return x > 0.0 ? x : std::expm1(x);
    case UnaryOp::kSelu:
      return x > 0.0 ? kSeluScale * x : kSeluScale * kSeluAlpha * std::expm1(x);
    case UnaryOp::kSwish: return x * sigmoid(x);
    case UnaryOp::kSoftplus: return softplus(x);
    case UnaryOp::kSoftsign: return x / (1.0 + std::fabs(x));
    case UnaryOp::kHardSigmoid: return hard_sigmoid(x);
    case UnaryOp::kBesselI0e: return bessel_i0e(x);
    case UnaryOp::kBesselI1e: return bessel_i1e(x);
  }
  return kNan;
}

double apply(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::kAdd: return a + b;
    case BinaryOp::kSub: return a - b;
    case BinaryOp::kMul: return a * b;
    case BinaryOp::kDiv: return a / b;
    case BinaryOp::kPow: return std::pow(a, b);
    case BinaryOp::kMax: return vmax(a, b);
    case BinaryOp::kMin: return vmin(a, b);
  }
  return kNan;
}

double apply(NaryOp op, double a, double b, double c) {
  switch (op) {
    case NaryOp::kSum: return (a + b) + c;
    case NaryOp::kProduct: return (a * b) * c;
    case NaryOp::kMaximum: return vmax(vmax(a, b), c);
    case NaryOp::kMinimum: return vmin(vmin(a, b), c);
  }
  return kNan;
}

Dual apply(UnaryOp op, Dual x) {
  switch (op) {
    case UnaryOp::kZero: return {0.0, 0.0};
    case UnaryOp::kOne: return {1.0, 0.0};
    case UnaryOp::kIdentity: return x;
    case UnaryOp::kNeg: return {-x.v, -x.d};
    case UnaryOp::kAbs:
      return {std::fabs(x.v), x.v >= 0.0 ? x.d : -x.d};
    case UnaryOp::kInv: return {1.0 / x.v, -x.d / (x.v * x.v)};
    case UnaryOp::kSquare: return {x.v * x.v, 2.0 * x.v * x.d};
    case UnaryOp::kExp: {
      const double e = std::exp(x.v);
      return {e, e * x.d};
    }
    case UnaryOp::kSigmoid: {
      const double s = sigmoid(x.v);
      return {s, s * (1.0 - s) * x.d};
    }
    case UnaryOp::kErf:
      return {std::erf(x.v), kErfScale * std::exp(-x.v * x.v) * x.d};
    case UnaryOp::kErfc:
      return {std::erfc(x.v), -kErfScale * std::exp(-x.v * x.v) * x.d};
    case UnaryOp::kSinh: return {std::sinh(x.v), std::cosh(x.v) * x.d};
    case UnaryOp::kCosh: return {std::cosh(x.v), std::sinh(x.v) * x.d};
    case UnaryOp::kTanh: {
      const double t = std::tanh(x.v);
      return {t, (1.0 - t * t) * x.d};
    }
    case UnaryOp::kArcsinh:
      return {std::asinh(x.v), x.d / std::sqrt(x.v * x.v + 1.0)};
    case UnaryOp::kArctan:
      return {std::atan(x.v), x.d / (1.0 + x.v * x.v)};
    case UnaryOp::kExpm1: {
      const double e = std::exp(x.v);
      return {std::expm1(x.v), e * x.d};
    }
    case UnaryOp::kLogSigmoid:
      return {-softplus(-x.v), sigmoid(-x.v) * x.d};
    case UnaryOp::kRelu:
      if (std::isnan(x.v)) return {x.v, kNan};
      return {x.v > 0.0 ? x.v : 0.0, x.v >= 0.0 ? x.d : 0.0};
    case UnaryOp::kElu:
      if (x.v >= 0.0) return {x.v, x.d};
      return {std::expm1(x.v), std::exp(x.v) * x.d};
    case UnaryOp::kSelu:
      if (x.v >= 0.0) return {kSeluScale * x.v, kSeluScale * x.d};
      return {kSeluScale * kSeluAlpha * std::expm1(x.v),
              kSeluScale * kSeluAlpha * std::exp(x.v) * x.d};
    case UnaryOp::kSwish: {
      const double s = sigmoid(x.v);
      return {x.v * s, (s + x.v * s * (1.0 - s)) * x.d};
    }
    case UnaryOp::kSoftplus: return {softplus(x.v), sigmoid(x.v) * x.d};
    case UnaryOp::kSoftsign: {
      const double den = 1.0 + std::fabs(x.v);
      return {x.v / den, x.d / (den * den)};
    }
    case UnaryOp::kHardSigmoid: {
      const double v = hard_sigmoid(x.v);
      const double d =
          (x.v > -2.5 && x.v < 2.5) ? 0.2 * x.d : (std::isnan(x.v) ? kNan : 0.0);
      return {v, d};
    }
    case UnaryOp::kBesselI0e: {
      const double v0 = bessel_i0e(x.v);
      const double v1 = bessel_i1e(x.v);
      return {v0, (v1 - sgn(x.v) * v0) * x.d};
    }
    case UnaryOp::kBesselI1e: {
      if (x.v == 0.0) return {0.0, 0.5 * x.d};
      const double v0 = bessel_i0e(x.v);
      const double v1 = bessel_i1e(x.v);
      return {v1, (v0 - v1 / x.v - sgn(x.v) * v1) * x.d};
    }
  }
  return {kNan, kNan};
}

Dual apply(BinaryOp op, Dual a, Dual b) {
  switch (op) {
    case BinaryOp::kAdd: return {a.v + b.v, a.d + b.d};
    case BinaryOp::kSub: return {a.v - b.v, a.d - b.d};
    case BinaryOp::kMul: return {a.v * b.v, a.d * b.v + a.v * b.d};
    case BinaryOp::kDiv:
      return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
    case BinaryOp::kPow: {
      const double v = std::pow(a.v, b.v);
      const double d = b.v * std::pow(a.v, b.v - 1.0) * a.d +
                       v * std::log(a.v) * b.d;
      return {v, d};
    }
    case BinaryOp::kMax: {
      const double v = vmax(a.v, b.v);
      if (std::isnan(v)) return {v, kNan};
      return {v, a.v >= b.v ? a.d : b.d};
    }
    case BinaryOp::kMin: {
      const double v = vmin(a.v, b.v);
      if (std::isnan(v)) return {v, kNan};
      return {v, a.v <= b.v ? a.d : b.d};
    }
  }
  return {kNan, kNan};
}

Dual apply(NaryOp op, Dual a, Dual b, Dual c) {
  switch (op) {
    case NaryOp::kSum: return {(a.v + b.v) + c.v, (a.d + b.d) + c.d};
    case NaryOp::kProduct: {
      const double ab = a.v * b.v;
      const double abd = a.d * b.v + a.v * b.d;
      return {ab * c.v, abd * c.v + ab * c.d};
    }
    case NaryOp::kMaximum: return apply(BinaryOp::kMax, apply(BinaryOp::kMax, a, b), c);
    case NaryOp::kMinimum: return apply(BinaryOp::kMin, apply(BinaryOp::kMin, a, b), c);
  }
  return {kNan, kNan};
}

namespace {

constexpr std::string_view kUnaryNames[kNumUnary] = {
    "zero",     "one",      "identity",     "neg",        "abs",
    "inv",      "square",   "exp",          "sigmoid",    "erf",
    "erfc",     "sinh",     "cosh",         "tanh",       "arcsinh",
    "arctan",   "expm1",    "log_sigmoid",  "relu",       "elu",
    "selu",     "swish",    "softplus",     "softsign",   "hard_sigmoid",
    "bessel_i0e", "bessel_i1e",
};

constexpr std::string_view kBinaryNames[kNumBinary] = {
    "add", "sub", "mul", "div", "pow", "max", "min",
};

constexpr std::string_view kNaryNames[kNumNary] = {
    "sum", "product", "maximum", "minimum",
};

}  // namespace

std::string_view name(UnaryOp op) { return kUnaryNames[static_cast<int>(op)]; }
std::string_view name(BinaryOp op) { return kBinaryNames[static_cast<int>(op)]; }
std::string_view name(NaryOp op) { return kNaryNames[static_cast<int>(op)]; }

bool unary_from_name(std::string_view s, UnaryOp* out) {
  for (int i = 0; i < kNumUnary; ++i) {
    if (kUnaryNames[i] == s) {
      *out = static_cast<UnaryOp>(i);
      return true;
    }
  }
  return false;
}

bool binary_from_name(std::string_view s, BinaryOp* out) {
  for (int i = 0; i < kNumBinary; ++i) {
    if (kBinaryNames[i] == s) {
      *out = static_cast<BinaryOp>(i);
      return true;
    }
  }
  return false;
}

bool nary_from_name(std::string_view s, NaryOp* out) {
  for (int i = 0; i < kNumNary; ++i) {
    if (kNaryNames[i] == s) {
      *out = static_cast<NaryOp>(i);
      return true;
    }
  }
  return false;
}

}  // namespace aqs::afdsl
