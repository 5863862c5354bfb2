#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clock_config.hpp"
#include "duration.hpp"
#include "ensm_model.hpp"
#include "errors.hpp"
#include "rf_model.hpp"
#include "spi_codec.hpp"

namespace ziftt {

enum class command_kind
{
  lo_on,
  lo_off,
  tx_packet_start,
  tx_packet_end,
  /// Marks the measurement reference; has no effect on the radio.
  trigger,
};

inline std::string_view to_string(command_kind k) noexcept
{
  switch (k) {
    case command_kind::lo_on: return "lo-on";
    case command_kind::lo_off: return "lo-off";
    case command_kind::tx_packet_start: return "tx-start";
    case command_kind::tx_packet_end: return "tx-end";
    case command_kind::trigger: return "trigger";
  }
  return "?";
}

inline std::optional<command_kind> parse_command_kind(std::string_view name) noexcept
{
  for (auto k : { command_kind::lo_on, command_kind::lo_off, command_kind::tx_packet_start,
                  command_kind::tx_packet_end, command_kind::trigger }) {
    if (to_string(k) == name) {
      return k;
    }
  }
  return std::nullopt;
}

struct command
{
  std::int64_t time_ns = 0;
  command_kind kind = command_kind::trigger;

  friend bool operator==(const command&, const command&) = default;
};

enum class event_effect
{
  spi_start,
  spi_end,
  lo_powered_up,
  lo_powered_down,
  packet_on,
  packet_off,
  trigger,
  /// A packet started while the Tx LO was gated off; nothing radiates.
  packet_while_lo_off,
};

inline std::string_view to_string(event_effect e) noexcept
{
  switch (e) {
    case event_effect::spi_start: return "spi-start";
    case event_effect::spi_end: return "spi-end";
    case event_effect::lo_powered_up: return "lo-powered-up";
    case event_effect::lo_powered_down: return "lo-powered-down";
    case event_effect::packet_on: return "packet-on";
    case event_effect::packet_off: return "packet-off";
    case event_effect::trigger: return "trigger";
    case event_effect::packet_while_lo_off: return "warning-packet-while-lo-off";
  }
  return "?";
}

struct sim_event
{
  duration time;
  event_effect effect = event_effect::trigger;
  /// Relative Tx power once this event has taken effect.
  double power_after_db = 0.0;

  friend bool operator==(const sim_event&, const sim_event&) = default;
};

/// Expanded schedule: the Tx power before the first event, then every event
/// in chronological order.
struct timeline
{
  double initial_power_db = 0.0;
  bool initial_lo_on = false;
  std::vector<sim_event> events;

  [[nodiscard]] std::size_t warning_count() const noexcept
  {
    return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const sim_event& e) {
      return e.effect == event_effect::packet_while_lo_off;
    }));
  }
};

inline void validate_schedule(std::span<const command> commands)
{
  bool packet_open = false;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    const auto& c = commands[k];
    if (c.time_ns < 0) {
      throw schedule_error("command " + std::string(to_string(c.kind)) + " at " + std::to_string(c.time_ns) +
                           " ns has a negative time");
    }
    if (k > 0 && c.time_ns < commands[k - 1].time_ns) {
      throw schedule_error("schedule is not sorted: " + std::to_string(c.time_ns) + " ns follows " +
                           std::to_string(commands[k - 1].time_ns) + " ns");
    }
    if (c.kind == command_kind::tx_packet_start) {
      if (packet_open) {
        throw schedule_error("tx-start at " + std::to_string(c.time_ns) + " ns while a packet is already on air");
      }
      packet_open = true;
    } else if (c.kind == command_kind::tx_packet_end) {
      if (!packet_open) {
        throw schedule_error("tx-end at " + std::to_string(c.time_ns) + " ns without a matching tx-start");
      }
      packet_open = false;
    }
  }
}

/**
 * @brief Expand a command schedule into timed radio events.
 *
 * An LO command becomes an SPI frame (`spi_start`, `spi_end` one frame
 * later) followed by the LO divider settling (`lo_powered_up` after
 * `lo_div_powerup_ns`, or `lo_powered_down` after `lo_div_powerdown_ns`).
 * A new LO command may not start before the previous frame has left the
 * bus. The LO starts in the opposite state of the first LO command, or off
 * when the schedule has none.
 */
inline timeline expand_schedule(std::span<const command> commands, const clock_config& clocks,
                                const timing_profile& profile, band b = band::band_2g4,
                                const rf_model_params& rf = {})
{
  validate_schedule(commands);
  validate(profile);

  struct raw_event
  {
    duration time;
    event_effect effect;
  };
  std::vector<raw_event> raw;
  std::optional<duration> bus_free_at;
  std::optional<std::int64_t> last_spi_command;
  std::optional<bool> first_lo_target;

  for (const auto& c : commands) {
    const auto t = duration::ns(c.time_ns);
    switch (c.kind) {
      case command_kind::lo_on:
      case command_kind::lo_off: {
        const bool on = c.kind == command_kind::lo_on;
        if (bus_free_at && t < *bus_free_at) {
          throw schedule_error("overlapping SPI frames: command at " + std::to_string(c.time_ns) +
                               " ns starts before the frame issued at " + std::to_string(*last_spi_command) +
                               " ns ends at " + to_string(*bus_free_at) + " ns");
        }
        if (!first_lo_target) {
          first_lo_target = on;
        }
        const auto spi_end = t + spi::frame_duration(clocks);
        raw.push_back({ t, event_effect::spi_start });
        raw.push_back({ spi_end, event_effect::spi_end });
        if (on) {
          raw.push_back({ spi_end + duration::ns(profile.lo_div_powerup_ns), event_effect::lo_powered_up });
        } else {
          raw.push_back({ spi_end + duration::ns(profile.lo_div_powerdown_ns), event_effect::lo_powered_down });
        }
        bus_free_at = spi_end;
        last_spi_command = c.time_ns;
        break;
      }
      case command_kind::tx_packet_start: raw.push_back({ t, event_effect::packet_on }); break;
      case command_kind::tx_packet_end: raw.push_back({ t, event_effect::packet_off }); break;
      case command_kind::trigger: raw.push_back({ t, event_effect::trigger }); break;
    }
  }

  std::stable_sort(raw.begin(), raw.end(), [](const raw_event& x, const raw_event& y) { return x.time < y.time; });

  timeline out;
  out.initial_lo_on = first_lo_target ? !*first_lo_target : false;
  bool lo_on = out.initial_lo_on;
  bool packet_on = false;
  out.initial_power_db = tx_power_db(lo_on, packet_on, b, rf);
  out.events.reserve(raw.size());
  for (const auto& r : raw) {
    switch (r.effect) {
      case event_effect::lo_powered_up: lo_on = true; break;
      case event_effect::lo_powered_down: lo_on = false; break;
      case event_effect::packet_on: packet_on = true; break;
      case event_effect::packet_off: packet_on = false; break;
      default: break;
    }
    out.events.push_back({ r.time, r.effect, tx_power_db(lo_on, packet_on, b, rf) });
    if (r.effect == event_effect::packet_on && !lo_on) {
      out.events.push_back({ r.time, event_effect::packet_while_lo_off, tx_power_db(lo_on, packet_on, b, rf) });
    }
  }
  return out;
}

/// Uniformly sampled relative Tx power.
struct power_trace
{
  std::int64_t start_ns = 0;
  std::int64_t interval_ns = 50;
  std::vector<double> samples;

  [[nodiscard]] std::int64_t time_at(std::size_t k) const noexcept
  {
    return start_ns + static_cast<std::int64_t>(k) * interval_ns;
  }

  friend bool operator==(const power_trace&, const power_trace&) = default;
};

struct trace_window
{
  std::int64_t start_ns = -2500;
  std::int64_t end_ns = 2500;
  std::int64_t interval_ns = 50;
  /// First-order settling time constant applied to each power step; 0 gives
  /// ideal steps.
  double settling_ns = 0.0;
};

/**
 * Sample the piecewise-constant power of `tl` on the grid
 * `start, start + interval, ...` up to and including `end`. A sample that
 * falls exactly on an event takes the level after the event.
 */
inline power_trace sample_trace(const timeline& tl, const trace_window& w)
{
  if (w.interval_ns <= 0) {
    throw range_error("interval_ns", "must be positive");
  }
  if (w.end_ns < w.start_ns) {
    throw range_error("window", "end precedes start");
  }
  if (w.settling_ns < 0.0 || !std::isfinite(w.settling_ns)) {
    throw range_error("settling_ns", "must be finite and non-negative");
  }

  power_trace tr;
  tr.start_ns = w.start_ns;
  tr.interval_ns = w.interval_ns;
  const auto count = static_cast<std::size_t>((w.end_ns - w.start_ns) / w.interval_ns) + 1;
  tr.samples.reserve(count);

  // Current segment: level moves from `from` toward `to` starting at `seg_start`.
  double from = tl.initial_power_db;
  double to = tl.initial_power_db;
  std::optional<duration> seg_start;
  auto level_at = [&](duration t) {
    if (w.settling_ns == 0.0 || !seg_start || from == to) {
      return to;
    }
    const double dt = (t - *seg_start).to_double();
    return to + (from - to) * std::exp(-dt / w.settling_ns);
  };

  std::size_t next = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const auto t = duration::ns(tr.time_at(k));
    while (next < tl.events.size() && tl.events[next].time <= t) {
      const auto& e = tl.events[next];
      if (e.power_after_db != to) {
        from = level_at(e.time);
        to = e.power_after_db;
        seg_start = e.time;
      }
      ++next;
    }
    tr.samples.push_back(level_at(t));
  }
  return tr;
}

/// Sum of linear power times the sample interval.
inline double trace_energy(const power_trace& tr)
{
  double e = 0.0;
  for (double p : tr.samples) {
    e += std::pow(10.0, p / 10.0);
  }
  return e * static_cast<double>(tr.interval_ns);
}

struct step_detection_options
{
  /// Smallest level change that counts as a step.
  double min_step_db = 1.0;
  /// Fraction of the post-trigger samples, taken from the end of the
  /// trace, averaged to obtain the settled level.
  double settled_fraction = 0.2;
};

/**
 * @brief Time from `trigger_ns` until the trace crosses the midpoint between
 * the level before the trigger and the settled level at the end.
 *
 * The result is quantized to the sample grid: it is the first sample at or
 * after the trigger whose level is at or beyond the midpoint.
 */
inline duration measure_turnaround(const power_trace& tr, std::int64_t trigger_ns, direction dir,
                                   const step_detection_options& opt = {})
{
  std::vector<double> before;
  std::size_t first_after = tr.samples.size();
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    if (tr.time_at(k) < trigger_ns) {
      before.push_back(tr.samples[k]);
    } else if (first_after == tr.samples.size()) {
      first_after = k;
    }
  }
  if (before.empty() || first_after == tr.samples.size()) {
    throw measurement_error("trace must contain samples both before and after the trigger");
  }
  const std::size_t after_count = tr.samples.size() - first_after;
  const auto settled_count =
    std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(after_count) * opt.settled_fraction));

  double pre = 0.0;
  for (double v : before) {
    pre += v;
  }
  pre /= static_cast<double>(before.size());
  double post = 0.0;
  for (std::size_t k = tr.samples.size() - settled_count; k < tr.samples.size(); ++k) {
    post += tr.samples[k];
  }
  post /= static_cast<double>(settled_count);

  const double step = post - pre;
  if (std::abs(step) < opt.min_step_db) {
    throw measurement_error("no power step detected after the trigger");
  }
  const bool rising = step > 0.0;
  if (rising != (dir == direction::rx_to_tx)) {
    throw measurement_error(std::string("power step is ") + (rising ? "rising" : "falling") +
                            ", which does not match a " + std::string(to_string(dir)) + " transition");
  }
  const double mid = 0.5 * (pre + post);
  for (std::size_t k = first_after; k < tr.samples.size(); ++k) {
    const double v = tr.samples[k];
    if (rising ? v >= mid : v <= mid) {
      return duration::ns(tr.time_at(k) - trigger_ns);
    }
  }
  throw measurement_error("trace never crosses the step midpoint");
}

/// Where and in which direction to measure a schedule: an explicit trigger
/// command if present, else the first LO command.
struct measurement_reference
{
  std::int64_t trigger_ns = 0;
  ziftt::direction direction = direction::rx_to_tx;
};

inline std::optional<measurement_reference> find_measurement_reference(std::span<const command> commands)
{
  std::optional<std::int64_t> trigger;
  for (const auto& c : commands) {
    if (c.kind == command_kind::trigger) {
      trigger = c.time_ns;
      break;
    }
  }
  for (const auto& c : commands) {
    if (c.kind != command_kind::lo_on && c.kind != command_kind::lo_off) {
      continue;
    }
    if (trigger && c.time_ns < *trigger) {
      continue;
    }
    return measurement_reference{ trigger.value_or(c.time_ns),
                                  c.kind == command_kind::lo_on ? direction::rx_to_tx : direction::tx_to_rx };
  }
  return std::nullopt;
}

namespace detail {
/// Fixed-point "%.2f" of `value / 10^3` for integer input, without going
/// through floating point.
inline std::string ns_to_us_2dp(std::int64_t ns)
{
  // Round to the nearest 10 ns, half away from zero.
  const bool neg = ns < 0;
  std::int64_t mag = neg ? -ns : ns;
  const std::int64_t centi = (mag + 5) / 10;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", (neg && centi != 0) ? "-" : "",
                static_cast<long long>(centi / 100), static_cast<long long>(centi % 100));
  return buf;
}

inline std::string format_db_2dp(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") {
    s = "0.00";
  }
  return s;
}
} // namespace detail

/// CSV with header `time_us,power_db`, both columns with two decimals.
inline void write_trace_csv(std::ostream& os, const power_trace& tr)
{
  os << "time_us,power_db\n";
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    os << detail::ns_to_us_2dp(tr.time_at(k)) << ',' << detail::format_db_2dp(tr.samples[k]) << '\n';
  }
}

} // namespace ziftt
