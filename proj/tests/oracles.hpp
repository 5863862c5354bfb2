#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library code paths they are used to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <vector>

namespace oracle {

/// Integer instruction word [W:1][N:3][00:2][A:10][D:8] unpacked MSB first.
inline std::vector<std::uint8_t> spi_bits(bool write, unsigned extra, unsigned addr, unsigned data)
{
  const std::uint32_t word = (std::uint32_t{ write } << 23) | (extra << 20) | (addr << 8) | data;
  std::vector<std::uint8_t> bits(24);
  for (int k = 0; k < 24; ++k) {
    bits[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>((word >> (23 - k)) & 1U);
  }
  return bits;
}

/// A value of `count / hz` seconds expressed in ns, as an exact fraction
/// compared by cross multiplication: true iff num/den == count*1e9/hz.
inline bool equals_cycles(std::int64_t num, std::int64_t den, std::uint64_t count, std::uint64_t hz)
{
  return static_cast<__int128>(num) * hz == static_cast<__int128>(count) * 1'000'000'000 * den;
}

struct component
{
  std::size_t stage;
  std::int64_t num;
  std::int64_t den;
};

/// Stage law evaluated over a common integer scale `L` (every component
/// denominator must divide L). Returns total * L.
inline __int128 stage_law_scaled(const std::vector<component>& comps, __int128 L)
{
  std::map<std::size_t, __int128> stage_max;
  for (const auto& c : comps) {
    const __int128 v = static_cast<__int128>(c.num) * (L / c.den);
    auto [it, inserted] = stage_max.try_emplace(c.stage, v);
    if (!inserted) {
      it->second = std::max(it->second, v);
    }
  }
  __int128 total = 0;
  for (const auto& [stage, v] : stage_max) {
    total += v;
  }
  return total;
}

/// Samples removed by a threshold-over-median burst filter with guard
/// dilation, by direct scan: sample i goes iff some j within `guard` of i
/// exceeds the threshold. Median is the lower median of a full sort.
inline std::vector<bool> burst_removal(const std::vector<double>& power, double threshold_db, std::size_t guard)
{
  std::vector<double> sorted = power;
  std::sort(sorted.begin(), sorted.end());
  const double thr = sorted[(sorted.size() - 1) / 2] * std::pow(10.0, threshold_db / 10.0);
  const auto n = static_cast<std::int64_t>(power.size());
  const auto g = static_cast<std::int64_t>(guard);
  std::vector<bool> removed(power.size(), false);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = std::max<std::int64_t>(0, i - g); j <= std::min(n - 1, i + g); ++j) {
      if (power[static_cast<std::size_t>(j)] > thr) {
        removed[static_cast<std::size_t>(i)] = true;
        break;
      }
    }
  }
  return removed;
}

/// Two passes: magnitudes first, then their mean power, in dB.
inline double mean_power_db(const std::vector<std::complex<double>>& z)
{
  std::vector<double> mags;
  mags.reserve(z.size());
  for (const auto& v : z) {
    mags.push_back(std::abs(v));
  }
  long double acc = 0.0L;
  for (double m : mags) {
    acc += static_cast<long double>(m) * m;
  }
  return static_cast<double>(10.0L * std::log10(acc / static_cast<long double>(mags.size())));
}

} // namespace oracle
