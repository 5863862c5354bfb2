#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rf_model.hpp"

namespace ziftt {

// Capture files hold interleaved little-endian int16 pairs (i0, q0, i1, q1, ...)
// with no header. Metadata lives in a sidecar text file next to the capture.

inline std::filesystem::path sidecar_path(const std::filesystem::path& capture)
{
  auto p = capture;
  p += ".meta";
  return p;
}

inline std::vector<iq_sample> decode_capture_bytes(const std::vector<std::uint8_t>& bytes)
{
  if (bytes.empty()) {
    throw capture_error("capture is empty");
  }
  if (bytes.size() % 4 != 0) {
    throw capture_error("capture length " + std::to_string(bytes.size()) +
                        " bytes is not a whole number of 16-bit I/Q pairs");
  }
  auto le16 = [&](std::size_t off) {
    return static_cast<std::int16_t>(static_cast<std::uint16_t>(bytes[off] | (bytes[off + 1] << 8)));
  };
  std::vector<iq_sample> out;
  out.reserve(bytes.size() / 4);
  for (std::size_t off = 0; off < bytes.size(); off += 4) {
    out.push_back({ le16(off), le16(off + 2) });
  }
  return out;
}

inline std::vector<std::uint8_t> encode_capture_bytes(std::span<const iq_sample> samples)
{
  std::vector<std::uint8_t> out;
  out.reserve(samples.size() * 4);
  auto put = [&](std::int16_t v) {
    const auto u = static_cast<std::uint16_t>(v);
    out.push_back(static_cast<std::uint8_t>(u & 0xFF));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
  };
  for (const auto& s : samples) {
    put(s.i);
    put(s.q);
  }
  return out;
}

inline std::vector<iq_sample> read_capture_samples(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw capture_error("cannot open capture file " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_capture_bytes(bytes);
}

inline std::string format_sidecar(const iq_capture& cap)
{
  std::ostringstream os;
  os << "sample_rate_hz = " << cap.sample_rate_hz << '\n';
  os << "band = " << to_string(cap.band) << '\n';
  os << "mode = " << to_string(cap.mode) << '\n';
  char agc[32];
  std::snprintf(agc, sizeof agc, "%.1f", cap.agc_db);
  os << "agc_db = " << agc << '\n';
  return os.str();
}

/// Apply sidecar keys to `cap`. Unknown keys and malformed values are errors.
inline void parse_sidecar(const std::string& text, iq_capture& cap)
{
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw capture_error("sidecar line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      if (key == "sample_rate_hz") {
        std::size_t used = 0;
        cap.sample_rate_hz = std::stoull(value, &used);
        if (used != value.size() || cap.sample_rate_hz == 0) throw std::invalid_argument(value);
      } else if (key == "band") {
        auto b = parse_band(value);
        if (!b) throw std::invalid_argument(value);
        cap.band = *b;
      } else if (key == "mode") {
        auto m = parse_mode(value);
        if (!m) throw std::invalid_argument(value);
        cap.mode = *m;
      } else if (key == "agc_db") {
        std::size_t used = 0;
        cap.agc_db = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } else {
        throw capture_error("sidecar line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw capture_error("sidecar line " + std::to_string(lineno) + ": bad value '" + value + "' for " + key);
    }
  }
}

/// Read a capture and, when present, its sidecar metadata.
inline iq_capture read_capture(const std::filesystem::path& path)
{
  iq_capture cap;
  cap.samples = read_capture_samples(path);
  const auto meta = sidecar_path(path);
  if (std::filesystem::exists(meta)) {
    std::ifstream in(meta);
    std::ostringstream text;
    text << in.rdbuf();
    parse_sidecar(text.str(), cap);
  }
  return cap;
}

inline void write_capture(const std::filesystem::path& path, const iq_capture& cap)
{
  const auto bytes = encode_capture_bytes(cap.samples);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw capture_error("cannot write capture file " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  std::ofstream meta(sidecar_path(path), std::ios::trunc);
  meta << format_sidecar(cap);
  if (!out || !meta) {
    throw capture_error("failed writing capture " + path.string());
  }
}

} // namespace ziftt
