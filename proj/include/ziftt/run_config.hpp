#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "clock_config.hpp"
#include "ensm_model.hpp"
#include "errors.hpp"
#include "event_sim.hpp"
#include "mac_compliance.hpp"
#include "rf_model.hpp"
#include "spi_codec.hpp"

namespace ziftt {

enum class output_format
{
  table,
  csv,
  json,
};

inline std::string_view to_string(output_format f) noexcept
{
  switch (f) {
    case output_format::table: return "table";
    case output_format::csv: return "csv";
    case output_format::json: return "json";
  }
  return "?";
}

inline std::optional<output_format> parse_output_format(std::string_view s) noexcept
{
  if (s == "table") return output_format::table;
  if (s == "csv") return output_format::csv;
  if (s == "json") return output_format::json;
  return std::nullopt;
}

struct noise_settings
{
  ensm_mode mode = ensm_mode::fdd;
  ziftt::band band = band::band_2g4;
  std::size_t n_samples = 100'000;
  std::uint64_t seed = 1;
  std::string capture;
  packet_filter_options filter;
};

/**
 * @brief Everything a CLI run needs.
 *
 * Read from a flat `key = value` file with dotted section keys, layered on
 * top of the built-in defaults. All durations are integer nanoseconds and all
 * frequencies integer hertz.
 */
struct run_config
{
  clock_config clocks;
  timing_profile profile;
  spi::lo_divider_config spi;
  rf_model_params rf;
  std::vector<command> schedule{ { 0, command_kind::lo_on } };
  band trace_band = band::band_2g4;
  trace_window window;
  /// Names resolved against the built-ins and `custom_deadlines`.
  std::vector<std::string> deadline_names{ "sifs-2g4", "sifs-5g", "nr-guard-120khz" };
  std::map<std::string, std::int64_t> custom_deadlines;
  noise_settings noise;
  /// Unset means each command's own default (CSV for traces, table otherwise).
  std::optional<output_format> format;
  std::string output_path;

  /// Resolve `deadline_names`; an unknown name is a configuration error.
  [[nodiscard]] std::vector<protocol_deadline> deadlines() const
  {
    std::vector<protocol_deadline> out;
    for (const auto& name : deadline_names) {
      if (auto it = custom_deadlines.find(name); it != custom_deadlines.end()) {
        out.push_back({ name, it->second, "user defined" });
      } else if (auto b = find_builtin_deadline(name)) {
        out.push_back(*b);
      } else {
        throw config_error("unknown deadline '" + name + "'");
      }
    }
    return out;
  }
};

namespace config_detail {

inline std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s)
{
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto item = trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (!item.empty()) {
      out.push_back(item);
    }
    if (comma == std::string_view::npos) {
      break;
    }
    pos = comma + 1;
  }
  return out;
}

template<typename Int>
Int parse_int(const std::string& key, const std::string& v)
{
  Int out{};
  int base = 10;
  std::string_view digits = v;
  if (digits.starts_with("0x") || digits.starts_with("0X")) {
    base = 16;
    digits.remove_prefix(2);
  }
  const auto* first = digits.data();
  const auto* last = digits.data() + digits.size();
  auto [ptr, ec] = std::from_chars(first, last, out, base);
  if (digits.empty() || ec != std::errc{} || ptr != last) {
    throw config_error(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v)
{
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw config_error(key + ": expected a number, got '" + v + "'");
  }
  return d;
}

inline bool parse_bool(const std::string& key, const std::string& v)
{
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw config_error(key + ": expected true or false, got '" + v + "'");
}

inline std::string format_double(double v)
{
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc{} ? end : buf);
}

inline command parse_command(const std::string& item)
{
  const auto at = item.find('@');
  if (at == std::string::npos) {
    throw config_error("schedule entry '" + item + "' must look like kind@time_ns");
  }
  const auto kind = parse_command_kind(trim(item.substr(0, at)));
  if (!kind) {
    throw config_error("schedule entry '" + item +
                       "': kind must be one of lo-on, lo-off, tx-start, tx-end, trigger");
  }
  return { parse_int<std::int64_t>("schedule", trim(item.substr(at + 1))), *kind };
}

inline std::optional<std::uint32_t> parse_optional_u32(const std::string& key, const std::string& v)
{
  if (v == "none" || v.empty()) {
    return std::nullopt;
  }
  return parse_int<std::uint32_t>(key, v);
}

} // namespace config_detail

inline std::vector<command> parse_schedule(std::string_view text)
{
  std::vector<command> out;
  for (const auto& item : config_detail::split_list(text)) {
    out.push_back(config_detail::parse_command(item));
  }
  return out;
}

inline std::string format_schedule(const std::vector<command>& schedule)
{
  std::string out;
  for (const auto& c : schedule) {
    if (!out.empty()) out += ", ";
    out += std::string(to_string(c.kind)) + "@" + std::to_string(c.time_ns);
  }
  return out;
}

/// Apply one key to `cfg`. Unknown keys are rejected.
inline void apply_config_key(run_config& cfg, const std::string& key, const std::string& v)
{
  using namespace config_detail;
  auto band_key = [&](const std::string& prefix, per_band<double>& target) {
    if (key.starts_with(prefix + ".")) {
      const auto b = parse_band(key.substr(prefix.size() + 1));
      if (!b) {
        throw config_error("unknown key '" + key + "'");
      }
      target[*b] = parse_double(key, v);
      return true;
    }
    return false;
  };

  if (key == "clocks.ref_clock_hz") cfg.clocks.ref_clock_hz = parse_int<hertz>(key, v);
  else if (key == "clocks.adc_clock_hz") cfg.clocks.adc_clock_hz = parse_int<hertz>(key, v);
  else if (key == "clocks.spi_clock_hz") cfg.clocks.spi_clock_hz = parse_int<hertz>(key, v);
  else if (key == "clocks.allow_spi_overclock") cfg.clocks.allow_spi_overclock = parse_bool(key, v);
  else if (key == "profile.vco_cal_ns") cfg.profile.vco_cal_ns = parse_int<std::int64_t>(key, v);
  else if (key == "profile.pll_lock_ns") cfg.profile.pll_lock_ns = parse_int<std::int64_t>(key, v);
  else if (key == "profile.dac_powerup_ns") cfg.profile.dac_powerup_ns = parse_int<std::int64_t>(key, v);
  else if (key == "profile.flush_cycles") cfg.profile.flush_cycles = parse_int<std::uint64_t>(key, v);
  else if (key == "profile.lo_div_powerup_ns") cfg.profile.lo_div_powerup_ns = parse_int<std::int64_t>(key, v);
  else if (key == "profile.lo_div_powerdown_ns") cfg.profile.lo_div_powerdown_ns = parse_int<std::int64_t>(key, v);
  else if (key == "spi.tx_lo_register") cfg.spi.tx_register = parse_optional_u32(key, v);
  else if (key == "spi.rx_lo_register") cfg.spi.rx_register = parse_optional_u32(key, v);
  else if (key == "spi.lo_on_value") cfg.spi.on_value = parse_optional_u32(key, v);
  else if (key == "spi.lo_off_value") cfg.spi.off_value = parse_optional_u32(key, v);
  else if (band_key("rf.lo_on_delta_db", cfg.rf.lo_on_delta_db)) {}
  else if (band_key("rf.base_rx_floor_db", cfg.rf.base_rx_floor_db)) {}
  else if (band_key("rf.fdd_rx_floor_db", cfg.rf.fdd_rx_floor_db)) {}
  else if (band_key("rf.locontrol_rx_floor_db", cfg.rf.locontrol_rx_floor_db)) {}
  else if (key == "rf.packet_delta_db") cfg.rf.packet_delta_db = parse_double(key, v);
  else if (key == "rf.agc_gain_db") cfg.rf.agc_gain_db = parse_double(key, v);
  else if (key == "schedule") cfg.schedule = parse_schedule(v);
  else if (key == "trace.band") {
    auto b = parse_band(v);
    if (!b) throw config_error(key + ": band must be 2g4 or 5g, got '" + v + "'");
    cfg.trace_band = *b;
  }
  else if (key == "trace.window_start_ns") cfg.window.start_ns = parse_int<std::int64_t>(key, v);
  else if (key == "trace.window_end_ns") cfg.window.end_ns = parse_int<std::int64_t>(key, v);
  else if (key == "trace.interval_ns") cfg.window.interval_ns = parse_int<std::int64_t>(key, v);
  else if (key == "trace.settling_ns") cfg.window.settling_ns = parse_double(key, v);
  else if (key == "deadlines") cfg.deadline_names = split_list(v);
  else if (key.starts_with("deadline.")) {
    const auto name = key.substr(9);
    if (name.empty()) throw config_error("deadline key needs a name");
    const auto ns = parse_int<std::int64_t>(key, v);
    if (ns <= 0) throw config_error(key + ": deadline must be positive");
    cfg.custom_deadlines[name] = ns;
  }
  else if (key == "noise.mode") {
    auto m = parse_mode(v);
    if (!m) throw config_error(key + ": unknown mode '" + v + "'");
    cfg.noise.mode = *m;
  }
  else if (key == "noise.band") {
    auto b = parse_band(v);
    if (!b) throw config_error(key + ": band must be 2g4 or 5g, got '" + v + "'");
    cfg.noise.band = *b;
  }
  else if (key == "noise.n_samples") cfg.noise.n_samples = parse_int<std::size_t>(key, v);
  else if (key == "noise.seed") cfg.noise.seed = parse_int<std::uint64_t>(key, v);
  else if (key == "noise.capture") cfg.noise.capture = v;
  else if (key == "noise.threshold_db") cfg.noise.filter.threshold_db = parse_double(key, v);
  else if (key == "noise.guard_samples") cfg.noise.filter.guard_samples = parse_int<std::size_t>(key, v);
  else if (key == "output.format") {
    if (v.empty()) {
      cfg.format.reset();
      return;
    }
    auto f = parse_output_format(v);
    if (!f) throw config_error(key + ": format must be table, csv or json, got '" + v + "'");
    cfg.format = *f;
  }
  else if (key == "output.path") cfg.output_path = v;
  else throw config_error("unknown key '" + key + "'");
}

inline void validate(const run_config& cfg)
{
  validate(cfg.clocks);
  validate(cfg.profile);
  validate(cfg.rf);
  if (cfg.window.interval_ns <= 0) {
    throw config_error("trace.interval_ns must be positive");
  }
  if (cfg.window.end_ns < cfg.window.start_ns) {
    throw config_error("trace.window_end_ns precedes trace.window_start_ns");
  }
  if (!cfg.noise.capture.empty() && !std::filesystem::exists(cfg.noise.capture)) {
    throw config_error("noise.capture: file '" + cfg.noise.capture + "' does not exist");
  }
}

/// Parse config text over the defaults (or over `base`).
inline run_config parse_run_config(std::string_view text, run_config base = {})
{
  std::istringstream is{ std::string(text) };
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = config_detail::trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_config_key(base, config_detail::trim(std::string_view(line).substr(0, eq)),
                       config_detail::trim(std::string_view(line).substr(eq + 1)));
    } catch (const config_error& e) {
      throw config_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  validate(base);
  return base;
}

inline run_config load_run_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw config_error("cannot read config file " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

/// Canonical text form; `parse_run_config(dump_run_config(c))` reproduces `c`.
inline std::string dump_run_config(const run_config& cfg)
{
  using config_detail::format_double;
  auto opt = [](const std::optional<std::uint32_t>& v) {
    if (!v) return std::string("none");
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%03X", *v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "# Clocks, integer Hz.\n";
  os << "clocks.ref_clock_hz = " << cfg.clocks.ref_clock_hz << '\n';
  os << "clocks.adc_clock_hz = " << cfg.clocks.adc_clock_hz << '\n';
  os << "clocks.spi_clock_hz = " << cfg.clocks.spi_clock_hz << '\n';
  os << "clocks.allow_spi_overclock = " << (cfg.clocks.allow_spi_overclock ? "true" : "false") << '\n';
  os << "\n# Transition step durations, integer ns (flush in ADC cycles).\n";
  os << "profile.vco_cal_ns = " << cfg.profile.vco_cal_ns << '\n';
  os << "profile.pll_lock_ns = " << cfg.profile.pll_lock_ns << '\n';
  os << "profile.dac_powerup_ns = " << cfg.profile.dac_powerup_ns << '\n';
  os << "profile.flush_cycles = " << cfg.profile.flush_cycles << '\n';
  os << "profile.lo_div_powerup_ns = " << cfg.profile.lo_div_powerup_ns << '\n';
  os << "profile.lo_div_powerdown_ns = " << cfg.profile.lo_div_powerdown_ns << '\n';
  os << "\n# LO divider register write. PLACEHOLDER values, not from a datasheet.\n";
  os << "spi.tx_lo_register = " << opt(cfg.spi.tx_register) << '\n';
  os << "spi.rx_lo_register = " << opt(cfg.spi.rx_register) << '\n';
  os << "spi.lo_on_value = " << opt(cfg.spi.on_value) << '\n';
  os << "spi.lo_off_value = " << opt(cfg.spi.off_value) << '\n';
  os << "\n# RF levels, dB.\n";
  for (auto b : all_bands) {
    os << "rf.lo_on_delta_db." << to_string(b) << " = " << format_double(cfg.rf.lo_on_delta_db[b]) << '\n';
  }
  os << "rf.packet_delta_db = " << format_double(cfg.rf.packet_delta_db) << '\n';
  for (auto b : all_bands) {
    os << "rf.base_rx_floor_db." << to_string(b) << " = " << format_double(cfg.rf.base_rx_floor_db[b]) << '\n';
  }
  for (auto b : all_bands) {
    os << "rf.fdd_rx_floor_db." << to_string(b) << " = " << format_double(cfg.rf.fdd_rx_floor_db[b]) << '\n';
  }
  for (auto b : all_bands) {
    os << "rf.locontrol_rx_floor_db." << to_string(b) << " = " << format_double(cfg.rf.locontrol_rx_floor_db[b])
       << '\n';
  }
  os << "rf.agc_gain_db = " << format_double(cfg.rf.agc_gain_db) << '\n';
  os << "\n# Trace simulation. Schedule entries: lo-on, lo-off, tx-start, tx-end, trigger @ ns.\n";
  os << "schedule = " << format_schedule(cfg.schedule) << '\n';
  os << "trace.band = " << to_string(cfg.trace_band) << '\n';
  os << "trace.window_start_ns = " << cfg.window.start_ns << '\n';
  os << "trace.window_end_ns = " << cfg.window.end_ns << '\n';
  os << "trace.interval_ns = " << cfg.window.interval_ns << '\n';
  os << "trace.settling_ns = " << format_double(cfg.window.settling_ns) << '\n';
  os << "\n# Compliance deadlines. Custom ones: deadline.<name> = <ns>.\n";
  os << "deadlines = ";
  for (std::size_t k = 0; k < cfg.deadline_names.size(); ++k) {
    os << (k ? ", " : "") << cfg.deadline_names[k];
  }
  os << '\n';
  for (const auto& [name, ns] : cfg.custom_deadlines) {
    os << "deadline." << name << " = " << ns << '\n';
  }
  os << "\n# Noise floor analysis.\n";
  os << "noise.mode = " << to_string(cfg.noise.mode) << '\n';
  os << "noise.band = " << to_string(cfg.noise.band) << '\n';
  os << "noise.n_samples = " << cfg.noise.n_samples << '\n';
  os << "noise.seed = " << cfg.noise.seed << '\n';
  os << "noise.capture = " << cfg.noise.capture << '\n';
  os << "noise.threshold_db = " << format_double(cfg.noise.filter.threshold_db) << '\n';
  os << "noise.guard_samples = " << cfg.noise.filter.guard_samples << '\n';
  os << "\n# Output.\n";
  os << "output.format = " << (cfg.format ? to_string(*cfg.format) : std::string_view{}) << '\n';
  os << "output.path = " << cfg.output_path << '\n';
  return os.str();
}

} // namespace ziftt
