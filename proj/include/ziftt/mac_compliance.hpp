#pragma once

#include <array>
#include <cstdint>
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

namespace ziftt {

/// Longest turnaround a protocol tolerates.
struct protocol_deadline
{
  std::string name;
  std::int64_t deadline_ns = 0;
  std::string source;

  friend bool operator==(const protocol_deadline&, const protocol_deadline&) = default;
};

inline void validate(const protocol_deadline& d)
{
  if (d.deadline_ns <= 0) {
    throw config_error("deadline '" + d.name + "' must be positive");
  }
}

/// SIFS for 802.11a/g/n in both bands and the 5G NR downlink-to-uplink guard
/// period at 120 kHz subcarrier spacing.
inline const std::array<protocol_deadline, 3>& builtin_deadlines()
{
  static const std::array<protocol_deadline, 3> table = { {
    { "sifs-2g4", 10'000, "IEEE 802.11a/g/n SIFS, 2.4 GHz" },
    { "sifs-5g", 16'000, "IEEE 802.11a/g/n SIFS, 5 GHz" },
    { "nr-guard-120khz", 17'840, "5G NR DL-to-UL guard period, 120 kHz SCS" },
  } };
  return table;
}

inline std::optional<protocol_deadline> find_builtin_deadline(std::string_view name)
{
  for (const auto& d : builtin_deadlines()) {
    if (d.name == name) {
      return d;
    }
  }
  return std::nullopt;
}

struct compliance_result
{
  std::optional<ensm_mode> mode;
  protocol_deadline deadline;
  duration tt;
  bool pass = false;
  /// deadline - tt; negative when the deadline is missed.
  duration margin;
};

/// A turnaround exactly equal to the deadline passes.
inline compliance_result check(duration tt, const protocol_deadline& deadline)
{
  validate(deadline);
  if (tt.is_negative()) {
    throw range_error("tt_ns", "turnaround must be non-negative");
  }
  compliance_result r;
  r.deadline = deadline;
  r.tt = tt;
  r.margin = duration::ns(deadline.deadline_ns) - tt;
  r.pass = !r.margin.is_negative();
  return r;
}

/**
 * One row per (mode, deadline), mode-major. Each mode is judged on the
 * worse of its two transition directions.
 */
inline std::vector<compliance_result> compliance_matrix(const clock_config& clocks, const timing_profile& profile,
                                                        std::span<const protocol_deadline> deadlines,
                                                        std::span<const ensm_mode> modes = all_modes)
{
  if (deadlines.empty()) {
    throw config_error("compliance check needs at least one deadline");
  }
  std::vector<compliance_result> rows;
  rows.reserve(modes.size() * deadlines.size());
  for (auto m : modes) {
    const auto tt = worst_case_turnaround(m, clocks, profile);
    for (const auto& d : deadlines) {
      auto r = check(tt, d);
      r.mode = m;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

/// True when every row for `mode` passes.
inline bool mode_passes_all(std::span<const compliance_result> matrix, ensm_mode mode)
{
  bool seen = false;
  for (const auto& r : matrix) {
    if (r.mode == mode) {
      seen = true;
      if (!r.pass) {
        return false;
      }
    }
  }
  return seen;
}

/// CSV with header `mode,deadline,tt_ns,pass,margin_ns`.
inline void write_matrix_csv(std::ostream& os, std::span<const compliance_result> matrix)
{
  os << "mode,deadline,tt_ns,pass,margin_ns\n";
  for (const auto& r : matrix) {
    os << (r.mode ? to_string(*r.mode) : std::string_view{}) << ',' << r.deadline.name << ',' << to_string(r.tt)
       << ',' << (r.pass ? "true" : "false") << ',' << to_string(r.margin) << '\n';
  }
}

} // namespace ziftt
