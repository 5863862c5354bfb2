#pragma once

#include "duration.hpp"
#include "errors.hpp"

namespace ziftt {

/// Highest SPI clock the transceiver accepts.
inline constexpr hertz max_spi_clock_hz = 50'000'000;

/// Clocks that parameterize every timing formula in the model.
struct clock_config
{
  hertz ref_clock_hz = 40'000'000;
  hertz adc_clock_hz = 160'000'000;
  hertz spi_clock_hz = 50'000'000;
  /// Permit an SPI clock above `max_spi_clock_hz` for what-if analysis.
  bool allow_spi_overclock = false;

  friend bool operator==(const clock_config&, const clock_config&) = default;
};

inline void validate(const clock_config& clocks)
{
  if (clocks.ref_clock_hz == 0) {
    throw config_error("clocks.ref_clock_hz must be positive");
  }
  if (clocks.adc_clock_hz == 0) {
    throw config_error("clocks.adc_clock_hz must be positive");
  }
  if (clocks.spi_clock_hz == 0) {
    throw config_error("clocks.spi_clock_hz must be positive");
  }
  if (clocks.spi_clock_hz > max_spi_clock_hz && !clocks.allow_spi_overclock) {
    throw config_error("clocks.spi_clock_hz = " + std::to_string(clocks.spi_clock_hz) +
                       " exceeds the device maximum of 50000000 Hz (set clocks.allow_spi_overclock to override)");
  }
}

} // namespace ziftt
