#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clock_config.hpp"
#include "ensm_model.hpp"
#include "errors.hpp"

namespace ziftt {

enum class band
{
  band_2g4, ///< Wi-Fi channel 1
  band_5g,  ///< Wi-Fi channel 44
};

inline constexpr std::array<band, 2> all_bands = { band::band_2g4, band::band_5g };

inline std::string_view to_string(band b) noexcept { return b == band::band_2g4 ? "2g4" : "5g"; }

inline std::optional<band> parse_band(std::string_view name) noexcept
{
  if (name == "2g4") return band::band_2g4;
  if (name == "5g") return band::band_5g;
  return std::nullopt;
}

/// A value given separately for each band.
template<typename T>
struct per_band
{
  T band_2g4{};
  T band_5g{};

  constexpr T& operator[](band b) noexcept { return b == band::band_2g4 ? band_2g4 : band_5g; }
  constexpr const T& operator[](band b) const noexcept { return b == band::band_2g4 ? band_2g4 : band_5g; }

  friend bool operator==(const per_band&, const per_band&) = default;
};

/**
 * Levels of the RF model, all in dB relative to unit sample power (noise
 * floors) or to the LO-off Tx floor (trace levels).
 *
 * The noise floor defaults reproduce the measured averages for FDD, standard
 * ENSM TDD and LO control on channels 1 and 44.
 */
struct rf_model_params
{
  per_band<double> lo_on_delta_db{ 30.0, 22.0 };
  /// Extra Tx power while a packet is on air. Only used for trace display.
  double packet_delta_db = 15.0;
  per_band<double> base_rx_floor_db{ 53.3, 53.7 };
  per_band<double> fdd_rx_floor_db{ 66.4, 58.0 };
  per_band<double> locontrol_rx_floor_db{ 53.0, 53.4 };
  /// Manual receiver gain. Recorded as capture metadata only.
  double agc_gain_db = 62.0;

  friend bool operator==(const rf_model_params&, const rf_model_params&) = default;
};

inline void validate(const rf_model_params& p)
{
  auto finite = [](double v, const std::string& name) {
    if (!std::isfinite(v)) {
      throw config_error(name + " must be finite");
    }
  };
  for (auto b : all_bands) {
    const std::string suffix = std::string(".") + std::string(to_string(b));
    finite(p.lo_on_delta_db[b], "rf.lo_on_delta_db" + suffix);
    finite(p.base_rx_floor_db[b], "rf.base_rx_floor_db" + suffix);
    finite(p.fdd_rx_floor_db[b], "rf.fdd_rx_floor_db" + suffix);
    finite(p.locontrol_rx_floor_db[b], "rf.locontrol_rx_floor_db" + suffix);
    if (p.fdd_rx_floor_db[b] < p.locontrol_rx_floor_db[b]) {
      throw config_error("rf.fdd_rx_floor_db" + suffix + " must not be below rf.locontrol_rx_floor_db" + suffix);
    }
  }
  finite(p.packet_delta_db, "rf.packet_delta_db");
  finite(p.agc_gain_db, "rf.agc_gain_db");
}

/// Relative Tx power for a given LO / packet state; the LO-off floor is 0 dB.
/// A packet with the LO gated off does not radiate.
inline double tx_power_db(bool lo_on, bool packet_on, band b, const rf_model_params& p) noexcept
{
  if (!lo_on) {
    return 0.0;
  }
  return p.lo_on_delta_db[b] + (packet_on ? p.packet_delta_db : 0.0);
}

inline double rx_noise_floor(ensm_mode mode, band b, const rf_model_params& p) noexcept
{
  switch (mode) {
    case ensm_mode::fdd:
    case ensm_mode::fdd_independent: return p.fdd_rx_floor_db[b];
    case ensm_mode::lo_control: return p.locontrol_rx_floor_db[b];
    case ensm_mode::standard_ensm_tdd:
    case ensm_mode::standard_tdd:
    case ensm_mode::standard_tdd_dual_synth: return p.base_rx_floor_db[b];
  }
  return p.base_rx_floor_db[b];
}

inline double noise_floor_delta(ensm_mode a, ensm_mode b_mode, band b, const rf_model_params& p) noexcept
{
  return rx_noise_floor(a, b, p) - rx_noise_floor(b_mode, b, p);
}

struct iq_sample
{
  std::int16_t i = 0;
  std::int16_t q = 0;

  [[nodiscard]] constexpr std::int64_t power() const noexcept
  {
    return std::int64_t{ i } * i + std::int64_t{ q } * q;
  }

  friend bool operator==(const iq_sample&, const iq_sample&) = default;
};

struct iq_capture
{
  std::vector<iq_sample> samples;
  hertz sample_rate_hz = 20'000'000;
  ziftt::band band = band::band_2g4;
  ensm_mode mode = ensm_mode::fdd;
  double agc_db = 62.0;
};

namespace detail {
inline double power_sum_to_db(std::uint64_t sum, std::size_t count)
{
  if (count == 0) {
    throw capture_error("cannot average an empty capture");
  }
  if (sum == 0) {
    throw capture_error("capture has zero power; level in dB would be -infinity");
  }
  return 10.0 * std::log10(static_cast<double>(sum) / static_cast<double>(count));
}
} // namespace detail

/// 10*log10(mean(i^2 + q^2)). The sum is accumulated exactly in integers.
inline double average_power_db(std::span<const iq_sample> samples)
{
  std::uint64_t sum = 0;
  for (const auto& s : samples) {
    sum += static_cast<std::uint64_t>(s.power());
  }
  return detail::power_sum_to_db(sum, samples.size());
}

inline double average_power_db(const iq_capture& capture) { return average_power_db(capture.samples); }

inline std::vector<double> power_series(std::span<const iq_sample> samples)
{
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(static_cast<double>(s.power()));
  }
  return out;
}

struct packet_filter_options
{
  double threshold_db = 10.0;
  std::size_t guard_samples = 16;
  /// Refuse when more than this fraction of the samples would be removed.
  double max_removed_fraction = 0.9;
};

struct packet_filter_result
{
  /// true for samples that survive filtering.
  std::vector<bool> keep;
  std::vector<double> kept;
  std::size_t removed = 0;
  double median = 0.0;
  double threshold = 0.0;
};

/// Lower median: element (n-1)/2 of the sorted series. Identical for linear
/// and dB-scaled input since it never averages two values.
inline double lower_median(std::span<const double> values)
{
  if (values.empty()) {
    throw range_error("power_series", "median of an empty series");
  }
  std::vector<double> tmp(values.begin(), values.end());
  auto mid = tmp.begin() + static_cast<std::ptrdiff_t>((tmp.size() - 1) / 2);
  std::nth_element(tmp.begin(), mid, tmp.end());
  return *mid;
}

/**
 * @brief Remove bursts (packets from other stations) from a linear power series.
 *
 * Every maximal run of samples above `median * 10^(threshold_db/10)` is
 * removed together with `guard_samples` samples on each side.
 */
inline packet_filter_result filter_packets(std::span<const double> power, const packet_filter_options& opt = {})
{
  if (power.empty()) {
    throw range_error("power_series", "cannot filter an empty series");
  }
  if (!(opt.threshold_db > 0.0) || !std::isfinite(opt.threshold_db)) {
    throw range_error("threshold_db", "must be positive and finite");
  }
  for (double v : power) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw range_error("power_series", "power values must be finite and non-negative");
    }
  }

  packet_filter_result r;
  r.median = lower_median(power);
  r.threshold = r.median * std::pow(10.0, opt.threshold_db / 10.0);

  const std::size_t n = power.size();
  r.keep.assign(n, true);
  std::size_t i = 0;
  while (i < n) {
    if (power[i] <= r.threshold) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < n && power[end] > r.threshold) {
      ++end;
    }
    const std::size_t lo = i > opt.guard_samples ? i - opt.guard_samples : 0;
    const std::size_t hi = std::min(n, end + opt.guard_samples);
    std::fill(r.keep.begin() + static_cast<std::ptrdiff_t>(lo), r.keep.begin() + static_cast<std::ptrdiff_t>(hi),
              false);
    i = end;
  }

  r.kept.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (r.keep[k]) {
      r.kept.push_back(power[k]);
    }
  }
  r.removed = n - r.kept.size();
  if (static_cast<double>(r.removed) > opt.max_removed_fraction * static_cast<double>(n)) {
    throw too_noisy_error("packet filter would remove " + std::to_string(r.removed) + " of " + std::to_string(n) +
                          " samples; the capture is dominated by bursts");
  }
  return r;
}

struct noise_floor_report
{
  double average_power_db = 0.0;
  std::size_t sample_count_used = 0;
  std::size_t samples_filtered = 0;
};

/// Packet filtering followed by the average power of what remains.
inline noise_floor_report analyze_noise_floor(std::span<const iq_sample> samples,
                                              const packet_filter_options& opt = {})
{
  if (samples.empty()) {
    throw capture_error("cannot analyze an empty capture");
  }
  const auto series = power_series(samples);
  const auto filtered = filter_packets(series, opt);
  std::uint64_t sum = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (filtered.keep[k]) {
      sum += static_cast<std::uint64_t>(samples[k].power());
    }
  }
  noise_floor_report rep;
  rep.sample_count_used = samples.size() - filtered.removed;
  rep.samples_filtered = filtered.removed;
  rep.average_power_db = detail::power_sum_to_db(sum, rep.sample_count_used);
  return rep;
}

namespace detail {
/// Standard normal deviates from a 64-bit Mersenne Twister. The engine's
/// output sequence is fixed by the standard; the transform is done here
/// because std::normal_distribution differs between library vendors.
class gaussian_source
{
public:
  explicit gaussian_source(std::uint64_t seed)
    : m_engine(seed)
  {
  }

  double next()
  {
    if (m_has_spare) {
      m_has_spare = false;
      return m_spare;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    m_spare = r * std::sin(theta);
    m_has_spare = true;
    return r * std::cos(theta);
  }

private:
  double uniform() { return static_cast<double>(m_engine() >> 11) * 0x1.0p-53; }

  std::mt19937_64 m_engine;
  double m_spare = 0.0;
  bool m_has_spare = false;
};

inline std::int16_t quantize(double v) noexcept
{
  const double r = std::nearbyint(std::clamp(v, -32767.0, 32767.0));
  return static_cast<std::int16_t>(r);
}
} // namespace detail

/// Complex white Gaussian noise at the modelled noise floor of `mode` in `b`.
inline iq_capture synthesize_capture(ensm_mode mode, band b, const rf_model_params& p, std::size_t n_samples,
                                     std::uint64_t seed)
{
  if (n_samples == 0) {
    throw range_error("n_samples", "must be at least 1");
  }
  const double target_db = rx_noise_floor(mode, b, p);
  const double sigma = std::sqrt(std::pow(10.0, target_db / 10.0) / 2.0);
  if (sigma > 32767.0 / 6.0) {
    throw range_error("noise floor", "level too high to represent as 16-bit samples without clipping");
  }

  iq_capture cap;
  cap.band = b;
  cap.mode = mode;
  cap.agc_db = p.agc_gain_db;
  cap.samples.reserve(n_samples);
  detail::gaussian_source g(seed);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double i = g.next() * sigma;
    const double q = g.next() * sigma;
    cap.samples.push_back({ detail::quantize(i), detail::quantize(q) });
  }
  return cap;
}

} // namespace ziftt
