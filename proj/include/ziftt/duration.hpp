#pragma once

#include <compare>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

#include "errors.hpp"

namespace ziftt {

/// Frequency in hertz. Every clock in the model is an integer number of Hz.
using hertz = std::uint64_t;

/**
 * @brief Exact rational number of nanoseconds.
 *
 * Timing budgets combine quantities such as `24 bits / f_spi` and
 * `384 cycles / f_adc`. Both are exact fractions of a nanosecond for any
 * integer clock, so durations are kept as a reduced fraction and never pass
 * through floating point until they are printed. The value is stored as
 * `num / den` with `den > 0` and `gcd(|num|, den) == 1`.
 */
class duration
{
public:
  constexpr duration() noexcept = default;

  static constexpr duration ns(std::int64_t value) noexcept
  {
    duration d;
    d.m_num = value;
    return d;
  }

  static constexpr duration ratio(std::int64_t num, std::int64_t den)
  {
    if (den == 0) {
      throw range_error("denominator", "zero denominator in duration");
    }
    return reduce(num, den);
  }

  /// Time taken by `count` periods of a clock running at `clock_hz`.
  static constexpr duration cycles(std::uint64_t count, hertz clock_hz)
  {
    if (clock_hz == 0) {
      throw range_error("clock_hz", "clock frequency must be positive");
    }
    return reduce(static_cast<wide>(count) * 1'000'000'000, static_cast<wide>(clock_hz));
  }

  [[nodiscard]] constexpr std::int64_t numerator() const noexcept { return m_num; }
  [[nodiscard]] constexpr std::int64_t denominator() const noexcept { return m_den; }
  [[nodiscard]] constexpr bool is_integral() const noexcept { return m_den == 1; }
  [[nodiscard]] constexpr bool is_negative() const noexcept { return m_num < 0; }

  [[nodiscard]] constexpr double to_double() const noexcept
  {
    return static_cast<double>(m_num) / static_cast<double>(m_den);
  }

  /// Smallest integer number of nanoseconds not below this value.
  [[nodiscard]] constexpr std::int64_t ceil_ns() const noexcept
  {
    std::int64_t q = m_num / m_den;
    if (m_num % m_den != 0 && m_num > 0) {
      ++q;
    }
    return q;
  }

  [[nodiscard]] constexpr std::int64_t floor_ns() const noexcept
  {
    std::int64_t q = m_num / m_den;
    if (m_num % m_den != 0 && m_num < 0) {
      --q;
    }
    return q;
  }

  friend constexpr duration operator+(duration a, duration b)
  {
    return reduce(static_cast<wide>(a.m_num) * b.m_den + static_cast<wide>(b.m_num) * a.m_den,
                  static_cast<wide>(a.m_den) * b.m_den);
  }

  friend constexpr duration operator-(duration a, duration b)
  {
    return reduce(static_cast<wide>(a.m_num) * b.m_den - static_cast<wide>(b.m_num) * a.m_den,
                  static_cast<wide>(a.m_den) * b.m_den);
  }

  friend constexpr duration operator-(duration a) { return reduce(-static_cast<wide>(a.m_num), a.m_den); }

  friend constexpr duration operator*(duration a, std::int64_t k)
  {
    return reduce(static_cast<wide>(a.m_num) * k, a.m_den);
  }
  friend constexpr duration operator*(std::int64_t k, duration a) { return a * k; }

  duration& operator+=(duration other) { return *this = *this + other; }
  duration& operator-=(duration other) { return *this = *this - other; }

  friend constexpr bool operator==(duration a, duration b) noexcept
  {
    return a.m_num == b.m_num && a.m_den == b.m_den;
  }

  friend constexpr std::strong_ordering operator<=>(duration a, duration b) noexcept
  {
    return static_cast<wide>(a.m_num) * b.m_den <=> static_cast<wide>(b.m_num) * a.m_den;
  }

private:
  using wide = __int128;

  static constexpr wide gcd_wide(wide a, wide b) noexcept
  {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      wide t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static constexpr duration reduce(wide num, wide den)
  {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const wide g = gcd_wide(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    constexpr wide lo = std::numeric_limits<std::int64_t>::min();
    constexpr wide hi = std::numeric_limits<std::int64_t>::max();
    if (num < lo || num > hi || den > hi) {
      throw range_error("duration", "duration arithmetic overflow");
    }
    duration d;
    d.m_num = static_cast<std::int64_t>(num);
    d.m_den = static_cast<std::int64_t>(den);
    return d;
  }

  std::int64_t m_num = 0;
  std::int64_t m_den = 1;
};

constexpr duration max(duration a, duration b) noexcept { return a < b ? b : a; }

/// Integer nanoseconds when exact, otherwise nanoseconds with picosecond
/// resolution ("3428.571").
inline std::string to_string(duration d)
{
  if (d.is_integral()) {
    return std::to_string(d.numerator());
  }
  // Round half away from zero to whole picoseconds.
  const __int128 num = static_cast<__int128>(d.numerator()) * 1000;
  const __int128 den = d.denominator();
  __int128 ps = (num >= 0 ? num + den / 2 : num - den / 2) / den;
  const bool neg = ps < 0;
  if (neg) ps = -ps;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%03lld", neg ? "-" : "",
                static_cast<long long>(ps / 1000), static_cast<long long>(ps % 1000));
  return buf;
}

namespace literals {
constexpr duration operator""_ns(unsigned long long v) { return duration::ns(static_cast<std::int64_t>(v)); }
constexpr duration operator""_us(unsigned long long v) { return duration::ns(static_cast<std::int64_t>(v) * 1000); }
} // namespace literals

} // namespace ziftt
