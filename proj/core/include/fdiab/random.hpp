// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace fdiab {

/// Seeded random source owned by exactly one trial.
///
/// Child streams are derived from a master seed and a path of integers
/// (e.g. {k_iab, trial}) so that every trial is reproducible in isolation
/// and trials can run in any order or in parallel.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static RandomStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> path);

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean, double stddev) { return std::normal_distribution<double>(mean, stddev)(engine_); }
  bool bernoulli(double p) { return uniform(0.0, 1.0) < p; }

  /// CN(0, variance): independent real/imag parts with variance/2 each.
  std::complex<double> complex_normal(double variance);

  /// Zero-mean Laplacian with the given standard deviation.
  double laplace(double stddev);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finaliser; used to spread seeds before engine construction.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace fdiab
