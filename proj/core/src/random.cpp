// SPDX-License-Identifier: Apache-2.0
#include "fdiab/random.hpp"

#include <cmath>

namespace fdiab {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream RandomStream::derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix_seed(master);
  for (const auto p : path) h = mix_seed(h ^ mix_seed(p + 0x632be59bd9b4e019ULL));
  return RandomStream(h);
}

std::complex<double> RandomStream::complex_normal(double variance) {
  if (variance <= 0.0) return {0.0, 0.0};
  const double s = std::sqrt(variance / 2.0);
  const double re = normal(0.0, s);
  const double im = normal(0.0, s);
  return {re, im};
}

double RandomStream::laplace(double stddev) {
  if (stddev <= 0.0) return 0.0;
  const double b = stddev / std::sqrt(2.0);
  const double u = uniform(-0.5, 0.5);
  return -b * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
}

}  // namespace fdiab
