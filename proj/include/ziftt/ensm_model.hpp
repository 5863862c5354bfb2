#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clock_config.hpp"
#include "duration.hpp"
#include "errors.hpp"
#include "spi_codec.hpp"

namespace ziftt {

/// Durations of the individual steps a transceiver goes through when
/// switching between receive and transmit.
struct timing_profile
{
  std::int64_t vco_cal_ns = 37'000;
  std::int64_t pll_lock_ns = 15'000;
  std::int64_t dac_powerup_ns = 18'000;
  /// Data path flush, in ADC clock cycles.
  std::uint64_t flush_cycles = 384;
  std::int64_t lo_div_powerup_ns = 160;
  /// Chosen so that one SPI frame at 50 MHz plus this matches the ~0.5 us
  /// measured Tx-to-Rx turnaround.
  std::int64_t lo_div_powerdown_ns = 20;

  friend bool operator==(const timing_profile&, const timing_profile&) = default;
};

inline void validate(const timing_profile& p)
{
  auto check = [](std::int64_t v, const char* name) {
    if (v < 0) {
      throw config_error(std::string("profile.") + name + " must be non-negative");
    }
  };
  check(p.vco_cal_ns, "vco_cal_ns");
  check(p.pll_lock_ns, "pll_lock_ns");
  check(p.dac_powerup_ns, "dac_powerup_ns");
  check(p.lo_div_powerup_ns, "lo_div_powerup_ns");
  check(p.lo_div_powerdown_ns, "lo_div_powerdown_ns");
}

/// Duplexing / control modes, in report order.
enum class ensm_mode
{
  standard_ensm_tdd,
  standard_tdd,
  standard_tdd_dual_synth,
  fdd_independent,
  fdd,
  lo_control,
};

inline constexpr std::array<ensm_mode, 6> all_modes = {
  ensm_mode::standard_ensm_tdd, ensm_mode::standard_tdd, ensm_mode::standard_tdd_dual_synth,
  ensm_mode::fdd_independent,   ensm_mode::fdd,          ensm_mode::lo_control,
};

enum class direction
{
  rx_to_tx,
  tx_to_rx,
};

inline constexpr std::array<direction, 2> all_directions = { direction::rx_to_tx, direction::tx_to_rx };

inline std::string_view to_string(ensm_mode m) noexcept
{
  switch (m) {
    case ensm_mode::standard_ensm_tdd: return "standard-ensm-tdd";
    case ensm_mode::standard_tdd: return "standard-tdd";
    case ensm_mode::standard_tdd_dual_synth: return "standard-tdd-dual-synth";
    case ensm_mode::fdd_independent: return "fdd-independent";
    case ensm_mode::fdd: return "fdd";
    case ensm_mode::lo_control: return "lo-control";
  }
  return "?";
}

inline std::string_view to_string(direction d) noexcept
{
  return d == direction::rx_to_tx ? "rx-tx" : "tx-rx";
}

inline std::optional<ensm_mode> parse_mode(std::string_view name) noexcept
{
  for (auto m : all_modes) {
    if (to_string(m) == name) {
      return m;
    }
  }
  return std::nullopt;
}

inline std::optional<direction> parse_direction(std::string_view name) noexcept
{
  for (auto d : all_directions) {
    if (to_string(d) == name) {
      return d;
    }
  }
  return std::nullopt;
}

struct budget_component
{
  std::string name;
  ziftt::duration duration;
  std::size_t stage = 0;

  friend bool operator==(const budget_component&, const budget_component&) = default;
};

/**
 * @brief Itemized duration of one Rx/Tx transition.
 *
 * Stages run one after the other; components inside a stage run in
 * parallel. The total is therefore the sum over stages of the longest
 * component in each stage.
 */
class turnaround_budget
{
public:
  turnaround_budget() = default;

  explicit turnaround_budget(std::vector<budget_component> components)
    : m_components(std::move(components))
    , m_total(total_of(m_components))
  {
  }

  /// Build from stored parts; throws if `total` disagrees with the components.
  static turnaround_budget from_parts(std::vector<budget_component> components, duration total)
  {
    turnaround_budget b(std::move(components));
    if (b.m_total != total) {
      throw range_error("total_ns", "stored total " + to_string(total) + " does not match component total " +
                                      to_string(b.m_total));
    }
    return b;
  }

  [[nodiscard]] std::span<const budget_component> components() const noexcept { return m_components; }
  [[nodiscard]] duration total() const noexcept { return m_total; }

  [[nodiscard]] std::size_t stage_count() const noexcept
  {
    std::size_t n = 0;
    for (const auto& c : m_components) {
      n = std::max(n, c.stage + 1);
    }
    return n;
  }

  static duration total_of(std::span<const budget_component> components)
  {
    std::vector<duration> stage_max;
    for (const auto& c : components) {
      if (c.duration.is_negative()) {
        throw range_error(c.name, "component duration must be non-negative");
      }
      if (stage_max.size() <= c.stage) {
        stage_max.resize(c.stage + 1);
      }
      stage_max[c.stage] = max(stage_max[c.stage], c.duration);
    }
    duration total;
    for (auto d : stage_max) {
      total += d;
    }
    return total;
  }

  friend bool operator==(const turnaround_budget&, const turnaround_budget&) = default;

private:
  std::vector<budget_component> m_components;
  duration m_total;
};

/// Data path flush time: `flush_cycles` periods of the ADC clock.
inline duration flush_time(const clock_config& clocks, const timing_profile& profile)
{
  if (clocks.adc_clock_hz == 0) {
    throw config_error("clocks.adc_clock_hz must be positive");
  }
  return duration::cycles(profile.flush_cycles, clocks.adc_clock_hz);
}

inline turnaround_budget compute_budget(ensm_mode mode, direction dir, const clock_config& clocks,
                                        const timing_profile& profile)
{
  validate(profile);
  const bool to_tx = dir == direction::rx_to_tx;
  std::vector<budget_component> parts;

  // The DAC only powers up when entering Tx.
  auto add_dac = [&](std::size_t stage) {
    if (to_tx) {
      parts.push_back({ "dac_powerup", duration::ns(profile.dac_powerup_ns), stage });
    }
  };

  switch (mode) {
    case ensm_mode::standard_ensm_tdd:
      parts.push_back({ "vco_cal", duration::ns(profile.vco_cal_ns), 0 });
      parts.push_back({ "pll_lock", duration::ns(profile.pll_lock_ns), 1 });
      add_dac(1);
      parts.push_back({ "flush", flush_time(clocks, profile), 1 });
      break;
    case ensm_mode::standard_tdd:
      parts.push_back({ "pll_lock", duration::ns(profile.pll_lock_ns), 0 });
      add_dac(0);
      parts.push_back({ "flush", flush_time(clocks, profile), 0 });
      break;
    case ensm_mode::standard_tdd_dual_synth:
      add_dac(0);
      parts.push_back({ "flush", flush_time(clocks, profile), 0 });
      break;
    case ensm_mode::fdd_independent:
      add_dac(0);
      break;
    case ensm_mode::fdd:
      break;
    case ensm_mode::lo_control:
      parts.push_back({ "spi_frame", spi::frame_duration(clocks), 0 });
      if (to_tx) {
        parts.push_back({ "lo_div_powerup", duration::ns(profile.lo_div_powerup_ns), 1 });
      } else {
        parts.push_back({ "lo_div_powerdown", duration::ns(profile.lo_div_powerdown_ns), 1 });
      }
      break;
  }
  return turnaround_budget(std::move(parts));
}

struct sweep_row
{
  ensm_mode mode;
  ziftt::direction direction;
  turnaround_budget budget;
};

/// Budgets for every (mode, direction) pair, in mode order with Rx-to-Tx first.
inline std::vector<sweep_row> sweep_budgets(std::span<const ensm_mode> modes, const clock_config& clocks,
                                            const timing_profile& profile)
{
  std::vector<sweep_row> rows;
  rows.reserve(modes.size() * 2);
  for (auto m : modes) {
    for (auto d : all_directions) {
      rows.push_back({ m, d, compute_budget(m, d, clocks, profile) });
    }
  }
  return rows;
}

/// Longer of the two transition directions; what a MAC must budget for.
inline duration worst_case_turnaround(ensm_mode mode, const clock_config& clocks, const timing_profile& profile)
{
  return max(compute_budget(mode, direction::rx_to_tx, clocks, profile).total(),
             compute_budget(mode, direction::tx_to_rx, clocks, profile).total());
}

/// JSON record of a budget:
/// `{"total_ns":640,"components":[{"name":"spi_frame","stage":0,"duration_ns":480},...]}`.
/// Non-integral durations are written in ns with picosecond resolution.
inline std::string to_json(const turnaround_budget& b)
{
  std::ostringstream os;
  os << "{\"total_ns\":" << to_string(b.total()) << ",\"components\":[";
  bool first = true;
  for (const auto& c : b.components()) {
    os << (first ? "" : ",") << "{\"name\":\"" << c.name << "\",\"stage\":" << c.stage
       << ",\"duration_ns\":" << to_string(c.duration) << '}';
    first = false;
  }
  os << "]}";
  return os.str();
}

/// Compact single-field form used in CSV output: `name@stage=ns;...`.
inline std::string components_field(const turnaround_budget& b)
{
  std::string out;
  for (const auto& c : b.components()) {
    if (!out.empty()) out += ';';
    out += c.name + "@" + std::to_string(c.stage) + "=" + to_string(c.duration);
  }
  return out;
}

} // namespace ziftt
