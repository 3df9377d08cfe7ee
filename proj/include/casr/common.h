// casr/common.h

// Copyright 2026  CASR Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CASR_COMMON_H_
#define CASR_COMMON_H_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace casr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double LogAdd(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double LogSumExp(std::span<const double> values);

// Deterministic random source.  All randomness in the toolkit flows from a
// single master seed through named sub-streams, so that reruns with the same
// seed are byte-identical regardless of platform or standard library.  The
// generator core is xoshiro256**, seeded via splitmix64; gaussians come from
// an explicit Box-Muller transform (std::normal_distribution is
// implementation-defined and must not be used here).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Sub-stream: mixes the name into the seed.
  Rng(std::uint64_t seed, const std::string& stream);

  std::uint64_t U64();
  // Uniform in [0, 1).
  double Uniform();
  // Uniform integer in [0, n).
  std::uint64_t UniformInt(std::uint64_t n);
  double Gaussian();  // standard normal
  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::uint64_t state_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// 64-bit FNV-1a; used for sub-stream derivation and manifest hashing.
std::uint64_t Fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t Fnv1a64(const std::string& s);

std::vector<std::string> SplitWhitespace(const std::string& line);
std::string Lowercase(const std::string& s);
std::string Join(const std::vector<std::string>& words, const std::string& sep);

// Shortest representation with 17 significant digits; round-trips doubles.
std::string FormatG17(double v);

std::string StrPrintf(const char* fmt, ...);

}  // namespace casr

#endif  // CASR_COMMON_H_
