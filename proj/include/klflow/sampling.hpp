#pragma once

#include "klflow/core.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace klflow {

/// Fixed seed for every deterministic sampler in the library.
inline constexpr std::uint64_t kSamplingSeed = 0x5eed'c0de'2024ULL;

namespace detail {

inline constexpr std::array<unsigned, 16> kHaltonPrimes = {2,  3,  5,  7,  11, 13, 17, 19,
                                                           23, 29, 31, 37, 41, 43, 47, 53};

template <typename Scalar>
Scalar radical_inverse(std::uint64_t index, unsigned base) {
  Scalar inv_base = Scalar(1) / static_cast<Scalar>(base);
  Scalar factor = inv_base;
  Scalar result = 0;
  while (index > 0) {
    result += static_cast<Scalar>(index % base) * factor;
    index /= base;
    factor *= inv_base;
  }
  return result;
}

inline std::uint64_t seed_offset() { return kSamplingSeed % 977; }

}  // namespace detail

/// Halton point in [0,1)^n; coordinates beyond the prime table wrap with a shift.
template <typename Scalar>
PointT<Scalar> halton_point(std::uint64_t index, Eigen::Index n) {
  PointT<Scalar> p(n);
  for (Eigen::Index d = 0; d < n; ++d) {
    const auto k = static_cast<std::size_t>(d) % detail::kHaltonPrimes.size();
    const auto shift = static_cast<std::uint64_t>(d) / detail::kHaltonPrimes.size();
    p(d) = detail::radical_inverse<Scalar>(index + 1 + 31 * shift, detail::kHaltonPrimes[k]);
  }
  return p;
}

/// Deterministic unit directions in R^n. In one dimension these are +1 and -1.
template <typename Scalar>
std::vector<PointT<Scalar>> unit_directions(Eigen::Index n, std::size_t count) {
  std::vector<PointT<Scalar>> dirs;
  if (count == 0) return dirs;
  dirs.reserve(count);
  if (n == 1) {
    for (std::size_t j = 0; j < std::max<std::size_t>(count, 2) && dirs.size() < 2; ++j) {
      PointT<Scalar> d(1);
      d(0) = (j % 2 == 0) ? Scalar(1) : Scalar(-1);
      dirs.push_back(d);
    }
    return dirs;
  }
  if (n == 2) {
    const Scalar phase = detail::radical_inverse<Scalar>(detail::seed_offset(), 2);
    for (std::size_t j = 0; j < count; ++j) {
      const Scalar angle = 2 * std::numbers::pi_v<Scalar> * (static_cast<Scalar>(j) + phase) /
                           static_cast<Scalar>(count);
      PointT<Scalar> d(2);
      d << std::cos(angle), std::sin(angle);
      dirs.push_back(d);
    }
    return dirs;
  }
  // Box-Muller on Halton coordinates, then normalised.
  const Eigen::Index m = n + (n % 2);
  std::uint64_t index = detail::seed_offset();
  while (dirs.size() < count) {
    const PointT<Scalar> u = halton_point<Scalar>(index++, m);
    PointT<Scalar> g(n);
    for (Eigen::Index d = 0; d < n; d += 2) {
      const Scalar u1 = std::max(u(d), std::numeric_limits<Scalar>::min());
      const Scalar rad = std::sqrt(-2 * std::log(u1));
      const Scalar ang = 2 * std::numbers::pi_v<Scalar> * u(d + 1);
      g(d) = rad * std::cos(ang);
      if (d + 1 < n) g(d + 1) = rad * std::sin(ang);
    }
    const Scalar norm = g.norm();
    if (norm > 0) dirs.push_back(g / norm);
  }
  return dirs;
}

/// Deterministic low-discrepancy points in the open ball B_r(center). The center is
/// always the first sample.
template <typename Scalar>
std::vector<PointT<Scalar>> ball_samples(const PointT<Scalar>& center, Scalar r, std::size_t count) {
  std::vector<PointT<Scalar>> pts;
  if (count == 0) return pts;
  pts.reserve(count);
  pts.push_back(center);
  const Eigen::Index n = center.size();
  std::uint64_t index = detail::seed_offset();
  while (pts.size() < count) {
    const PointT<Scalar> u = halton_point<Scalar>(index++, n);
    const PointT<Scalar> offset = (u.array() * 2 - 1).matrix();
    const Scalar norm = offset.norm();
    if (norm >= 1 || norm == 0) continue;
    pts.push_back(center + r * offset);
  }
  return pts;
}

}  // namespace klflow
