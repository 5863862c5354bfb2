#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clock_config.hpp"
#include "duration.hpp"
#include "errors.hpp"

namespace ziftt::spi {

/// Bits in a single-register write instruction.
inline constexpr std::size_t frame_bits = 24;

/**
 * @brief One single-register SPI write transaction.
 *
 * Wire layout, most significant bit first:
 *
 *     [write:1][extra_byte_count:3][reserved 00:2][register_address:10][data:8]
 *
 * The layout follows the AD9361 instruction word. Fields are held in wide
 * integers so that out-of-range values can be represented and rejected by
 * `validate()` rather than silently truncated.
 */
struct frame
{
  bool write_flag = true;
  std::uint32_t extra_byte_count = 0;
  std::uint32_t register_address = 0;
  std::uint32_t data = 0;

  friend bool operator==(const frame&, const frame&) = default;
};

inline void validate(const frame& f)
{
  if (f.extra_byte_count >= 8) {
    throw range_error("extra_byte_count", "must be below 8, got " + std::to_string(f.extra_byte_count));
  }
  if (f.register_address >= 1024) {
    throw range_error("register_address", "must be below 1024, got " + std::to_string(f.register_address));
  }
  if (f.data >= 256) {
    throw range_error("data", "must be below 256, got " + std::to_string(f.data));
  }
}

/// Ordered 0/1 values in transmission order (first element goes out first).
class bit_sequence
{
public:
  bit_sequence() = default;

  explicit bit_sequence(std::vector<std::uint8_t> bits)
    : m_bits(std::move(bits))
  {
    for (auto b : m_bits) {
      if (b > 1) {
        throw range_error("bits", "bit values must be 0 or 1");
      }
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return m_bits.size(); }
  [[nodiscard]] std::uint8_t operator[](std::size_t i) const { return m_bits.at(i); }
  [[nodiscard]] std::span<const std::uint8_t> bits() const noexcept { return m_bits; }

  /// Bits packed into bytes, first bit in the MSB of byte 0. Length must be
  /// a multiple of 8.
  [[nodiscard]] std::vector<std::uint8_t> to_bytes() const
  {
    if (m_bits.size() % 8 != 0) {
      throw malformed_frame("bit sequence of length " + std::to_string(m_bits.size()) +
                            " is not a whole number of bytes");
    }
    std::vector<std::uint8_t> out(m_bits.size() / 8, 0);
    for (std::size_t i = 0; i < m_bits.size(); ++i) {
      out[i / 8] = static_cast<std::uint8_t>(out[i / 8] | (m_bits[i] << (7 - i % 8)));
    }
    return out;
  }

  static bit_sequence from_bytes(std::span<const std::uint8_t> bytes)
  {
    std::vector<std::uint8_t> bits;
    bits.reserve(bytes.size() * 8);
    for (auto byte : bytes) {
      for (int shift = 7; shift >= 0; --shift) {
        bits.push_back(static_cast<std::uint8_t>((byte >> shift) & 1U));
      }
    }
    return bit_sequence(std::move(bits));
  }

  /// Upper-case hex, two digits per byte, MSB first ("805FFF").
  [[nodiscard]] std::string to_hex() const
  {
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string out;
    for (auto byte : to_bytes()) {
      out.push_back(digits[byte >> 4]);
      out.push_back(digits[byte & 0xF]);
    }
    return out;
  }

  static bit_sequence from_hex(std::string_view hex)
  {
    if (hex.size() % 2 != 0) {
      throw malformed_frame("hex string has odd length");
    }
    auto nibble = [](char c) -> std::uint8_t {
      if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
      if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
      if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
      throw malformed_frame(std::string("invalid hex digit '") + c + "'");
    };
    std::vector<std::uint8_t> bytes;
    for (std::size_t i = 0; i < hex.size(); i += 2) {
      bytes.push_back(static_cast<std::uint8_t>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
    }
    return from_bytes(bytes);
  }

  friend bool operator==(const bit_sequence&, const bit_sequence&) = default;

private:
  std::vector<std::uint8_t> m_bits;
};

namespace detail {
inline void push_field(std::vector<std::uint8_t>& bits, std::uint32_t value, int width)
{
  for (int shift = width - 1; shift >= 0; --shift) {
    bits.push_back(static_cast<std::uint8_t>((value >> shift) & 1U));
  }
}

inline std::uint32_t read_field(std::span<const std::uint8_t> bits, std::size_t& pos, int width)
{
  std::uint32_t value = 0;
  for (int i = 0; i < width; ++i) {
    value = (value << 1) | bits[pos++];
  }
  return value;
}
} // namespace detail

inline bit_sequence encode_frame(const frame& f)
{
  validate(f);
  std::vector<std::uint8_t> bits;
  bits.reserve(frame_bits);
  detail::push_field(bits, f.write_flag ? 1U : 0U, 1);
  detail::push_field(bits, f.extra_byte_count, 3);
  detail::push_field(bits, 0, 2);
  detail::push_field(bits, f.register_address, 10);
  detail::push_field(bits, f.data, 8);
  return bit_sequence(std::move(bits));
}

inline frame decode_frame(const bit_sequence& seq)
{
  if (seq.size() != frame_bits) {
    throw malformed_frame("expected " + std::to_string(frame_bits) + " bits, got " + std::to_string(seq.size()));
  }
  const auto bits = seq.bits();
  std::size_t pos = 0;
  frame f;
  f.write_flag = detail::read_field(bits, pos, 1) == 1;
  f.extra_byte_count = detail::read_field(bits, pos, 3);
  if (detail::read_field(bits, pos, 2) != 0) {
    throw malformed_frame("reserved bits 4..5 must be zero");
  }
  f.register_address = detail::read_field(bits, pos, 10);
  f.data = detail::read_field(bits, pos, 8);
  return f;
}

/// Wire time of one frame: 24 bit periods of the SPI clock.
inline duration frame_duration(const clock_config& clocks)
{
  if (clocks.spi_clock_hz == 0) {
    throw config_error("clocks.spi_clock_hz must be positive");
  }
  if (clocks.spi_clock_hz > max_spi_clock_hz && !clocks.allow_spi_overclock) {
    throw config_error("clocks.spi_clock_hz = " + std::to_string(clocks.spi_clock_hz) +
                       " exceeds the device maximum of 50000000 Hz");
  }
  return duration::cycles(frame_bits, clocks.spi_clock_hz);
}

enum class chain
{
  tx,
  rx
};

/**
 * Register and data bytes used to gate the LO dividers.
 *
 * The defaults are placeholders, not values taken from a datasheet: check
 * the transceiver register map before driving hardware with them. The Rx
 * register has no default.
 */
struct lo_divider_config
{
  std::optional<std::uint32_t> tx_register = 0x005;
  std::optional<std::uint32_t> rx_register;
  std::optional<std::uint32_t> on_value = 0x00;
  std::optional<std::uint32_t> off_value = 0x01;

  friend bool operator==(const lo_divider_config&, const lo_divider_config&) = default;
};

struct lo_divider_command
{
  spi::chain chain = spi::chain::tx;
  bool power_on = true;

  friend bool operator==(const lo_divider_command&, const lo_divider_command&) = default;
};

inline frame lo_divider_frame(const lo_divider_command& cmd, const lo_divider_config& config)
{
  const auto& reg = cmd.chain == chain::tx ? config.tx_register : config.rx_register;
  if (!reg) {
    throw config_error(std::string("no LO divider register configured for the ") +
                       (cmd.chain == chain::tx ? "Tx" : "Rx") + " chain");
  }
  const auto& value = cmd.power_on ? config.on_value : config.off_value;
  if (!value) {
    throw config_error(std::string("no LO divider ") + (cmd.power_on ? "on" : "off") + " value configured");
  }
  frame f{ .write_flag = true, .extra_byte_count = 0, .register_address = *reg, .data = *value };
  validate(f);
  return f;
}

inline frame lo_divider_frame(chain c, bool power_on, const lo_divider_config& config)
{
  return lo_divider_frame(lo_divider_command{ c, power_on }, config);
}

/// Inverse of `lo_divider_frame` for a given configuration.
inline lo_divider_command decode_lo_divider_frame(const frame& f, const lo_divider_config& config)
{
  if (!f.write_flag || f.extra_byte_count != 0) {
    throw malformed_frame("LO divider commands are single-byte writes");
  }
  if (config.on_value && config.off_value && *config.on_value == *config.off_value) {
    throw config_error("LO divider on and off values are identical");
  }
  lo_divider_command cmd;
  if (config.tx_register && f.register_address == *config.tx_register) {
    cmd.chain = chain::tx;
  } else if (config.rx_register && f.register_address == *config.rx_register) {
    cmd.chain = chain::rx;
  } else {
    throw malformed_frame("register " + std::to_string(f.register_address) + " is not an LO divider register");
  }
  if (config.on_value && f.data == *config.on_value) {
    cmd.power_on = true;
  } else if (config.off_value && f.data == *config.off_value) {
    cmd.power_on = false;
  } else {
    throw malformed_frame("data byte " + std::to_string(f.data) + " is neither the on nor the off pattern");
  }
  return cmd;
}

} // namespace ziftt::spi
