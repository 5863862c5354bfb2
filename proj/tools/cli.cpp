#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <ziftt/ziftt.hpp>

namespace ziftt::cli {
namespace {

using json = nlohmann::ordered_json;

/// Bad flag values and other invocation mistakes; maps to exit code 2.
class usage_error : public error
{
public:
  using error::error;
};

std::string fixed(double v, int decimals)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') {
    s.erase(0, 1);
  }
  return s;
}

/// JSON number that parses back to exactly the value printed in CSV.
json json_number(const std::string& text)
{
  if (text.find('.') == std::string::npos) {
    return json(std::stoll(text));
  }
  return json(std::strtod(text.c_str(), nullptr));
}

json json_duration(duration d) { return json_number(to_string(d)); }

std::string all_mode_names()
{
  std::string s;
  for (auto m : all_modes) {
    if (!s.empty()) s += ", ";
    s += to_string(m);
  }
  return s;
}

ensm_mode mode_arg(const std::string& flag, const std::string& value)
{
  if (auto m = parse_mode(value)) {
    return *m;
  }
  throw usage_error(flag + ": unknown mode '" + value + "' (expected one of " + all_mode_names() + ")");
}

band band_arg(const std::string& flag, const std::string& value)
{
  if (auto b = parse_band(value)) {
    return *b;
  }
  throw usage_error(flag + ": unknown band '" + value + "' (expected 2g4 or 5g)");
}

/// Destination for the primary output: a file when a path is configured,
/// otherwise the caller's stream. Secondary notes go to the other stream so
/// that CSV/JSON on stdout stays clean.
class sink
{
public:
  sink(const std::string& path, std::ostream& out, std::ostream& err)
    : m_out(out)
    , m_err(err)
  {
    if (!path.empty()) {
      m_file = std::make_unique<std::ofstream>(path, std::ios::trunc);
      if (!*m_file) {
        throw error("cannot open output file " + path);
      }
    }
  }

  std::ostream& data() { return m_file ? *m_file : m_out; }
  std::ostream& notes() { return m_file ? m_out : m_err; }

private:
  std::ostream& m_out;
  std::ostream& m_err;
  std::unique_ptr<std::ofstream> m_file;
};

struct common_options
{
  std::string config_path;
  std::string format;
  std::string output;
};

run_config effective_config(const common_options& common)
{
  run_config cfg = common.config_path.empty() ? parse_run_config("") : load_run_config(common.config_path);
  if (!common.format.empty()) {
    auto f = parse_output_format(common.format);
    if (!f) {
      throw usage_error("--format must be table, csv or json, got '" + common.format + "'");
    }
    cfg.format = *f;
  }
  if (!common.output.empty()) {
    cfg.output_path = common.output;
  }
  return cfg;
}

// ---------------------------------------------------------------- turnaround

struct turnaround_options
{
  std::string mode;
  std::string dir;
  bool all = false;
};

int cmd_turnaround(const run_config& cfg, const turnaround_options& opt, std::ostream& out, std::ostream& err)
{
  std::vector<sweep_row> rows;
  if (!opt.mode.empty() && !opt.all) {
    const auto mode = mode_arg("--mode", opt.mode);
    std::vector<direction> dirs(all_directions.begin(), all_directions.end());
    if (!opt.dir.empty()) {
      auto d = parse_direction(opt.dir);
      if (!d) {
        throw usage_error("--dir must be rx-tx or tx-rx, got '" + opt.dir + "'");
      }
      dirs = { *d };
    }
    for (auto d : dirs) {
      rows.push_back({ mode, d, compute_budget(mode, d, cfg.clocks, cfg.profile) });
    }
  } else {
    if (!opt.dir.empty()) {
      throw usage_error("--dir requires --mode");
    }
    rows = sweep_budgets(all_modes, cfg.clocks, cfg.profile);
  }

  sink dest(cfg.output_path, out, err);
  auto& os = dest.data();
  switch (cfg.format.value_or(output_format::table)) {
    case output_format::csv:
      os << "mode,direction,total_ns,components\n";
      for (const auto& r : rows) {
        os << to_string(r.mode) << ',' << to_string(r.direction) << ',' << to_string(r.budget.total()) << ','
           << components_field(r.budget) << '\n';
      }
      break;
    case output_format::json: {
      json arr = json::array();
      for (const auto& r : rows) {
        json rec = json::parse(to_json(r.budget));
        arr.push_back({ { "mode", to_string(r.mode) },
                        { "direction", to_string(r.direction) },
                        { "total_ns", rec["total_ns"] },
                        { "components", rec["components"] } });
      }
      os << arr.dump(2) << '\n';
      break;
    }
    case output_format::table:
      for (const auto& r : rows) {
        os << to_string(r.mode) << ' ' << to_string(r.direction) << ": " << to_string(r.budget.total()) << " ns\n";
        for (const auto& c : r.budget.components()) {
          os << "  stage " << c.stage << "  " << std::left << std::setw(18) << c.name << std::right
             << std::setw(10) << to_string(c.duration) << " ns\n";
        }
      }
      break;
  }
  return success;
}

// --------------------------------------------------------------------- trace

struct trace_options
{
  std::optional<std::string> schedule;
  std::string band;
  std::optional<std::int64_t> interval_ns;
  std::optional<std::int64_t> start_ns;
  std::optional<std::int64_t> end_ns;
};

int cmd_trace(run_config cfg, const trace_options& opt, std::ostream& out, std::ostream& err)
{
  try {
    if (opt.schedule) cfg.schedule = parse_schedule(*opt.schedule);
    if (opt.interval_ns) cfg.window.interval_ns = *opt.interval_ns;
    if (opt.start_ns) cfg.window.start_ns = *opt.start_ns;
    if (opt.end_ns) cfg.window.end_ns = *opt.end_ns;
  } catch (const config_error& e) {
    throw usage_error(e.what());
  }
  if (!opt.band.empty()) cfg.trace_band = band_arg("--band", opt.band);
  if (cfg.window.interval_ns <= 0 || cfg.window.end_ns < cfg.window.start_ns) {
    throw usage_error("trace window must have a positive interval and end >= start");
  }

  const auto tl = expand_schedule(cfg.schedule, cfg.clocks, cfg.profile, cfg.trace_band, cfg.rf);
  const auto tr = sample_trace(tl, cfg.window);

  const auto ref = find_measurement_reference(cfg.schedule);
  std::optional<std::int64_t> measured_ns;
  std::string why_not = "schedule has no LO command";
  if (ref) {
    try {
      measured_ns = measure_turnaround(tr, ref->trigger_ns, ref->direction).ceil_ns();
    } catch (const measurement_error& e) {
      why_not = e.what();
    }
  }
  const std::string tt_text = measured_ns ? detail::ns_to_us_2dp(*measured_ns) : "n/a";

  sink dest(cfg.output_path, out, err);
  for (const auto& e : tl.events) {
    if (e.effect == event_effect::packet_while_lo_off) {
      dest.notes() << "warning: packet started at " << to_string(e.time) << " ns while the Tx LO is off\n";
    }
  }

  auto& os = dest.data();
  switch (cfg.format.value_or(output_format::csv)) {
    case output_format::csv:
      write_trace_csv(os, tr);
      dest.notes() << "measured_tt_us: " << tt_text;
      if (ref) {
        dest.notes() << " (" << to_string(ref->direction) << ", trigger at " << ref->trigger_ns << " ns)";
      }
      if (!measured_ns) {
        dest.notes() << " [" << why_not << "]";
      }
      dest.notes() << '\n';
      break;
    case output_format::json: {
      json samples = json::array();
      for (std::size_t k = 0; k < tr.samples.size(); ++k) {
        samples.push_back({ { "time_us", json_number(detail::ns_to_us_2dp(tr.time_at(k))) },
                            { "power_db", json_number(detail::format_db_2dp(tr.samples[k])) } });
      }
      json events = json::array();
      for (const auto& e : tl.events) {
        events.push_back({ { "time_ns", json_duration(e.time) },
                           { "effect", to_string(e.effect) },
                           { "power_db", json_number(detail::format_db_2dp(e.power_after_db)) } });
      }
      json doc = { { "band", to_string(cfg.trace_band) },
                   { "start_ns", tr.start_ns },
                   { "interval_ns", tr.interval_ns },
                   { "trigger_ns", ref ? json(ref->trigger_ns) : json(nullptr) },
                   { "direction", ref ? json(to_string(ref->direction)) : json(nullptr) },
                   { "measured_tt_us", measured_ns ? json_number(tt_text) : json(nullptr) },
                   { "events", events },
                   { "samples", samples } };
      os << doc.dump(2) << '\n';
      break;
    }
    case output_format::table:
      os << "band " << to_string(cfg.trace_band) << ", initial LO " << (tl.initial_lo_on ? "on" : "off") << ", "
         << tr.samples.size() << " samples every " << tr.interval_ns << " ns\n";
      os << std::setw(12) << "time_ns" << "  " << std::left << std::setw(30) << "event" << std::right
         << std::setw(10) << "power_db" << '\n';
      for (const auto& e : tl.events) {
        os << std::setw(12) << to_string(e.time) << "  " << std::left << std::setw(30) << to_string(e.effect)
           << std::right << std::setw(10) << detail::format_db_2dp(e.power_after_db) << '\n';
      }
      os << "measured turnaround: " << tt_text << (measured_ns ? " us" : "") << '\n';
      break;
  }
  return success;
}

// --------------------------------------------------------------------- noise

struct noise_options
{
  std::string mode;
  std::string band;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::string capture;
  std::optional<double> threshold_db;
  std::optional<std::size_t> guard;
  std::string write_capture;
};

int cmd_noise(run_config cfg, const noise_options& opt, std::ostream& out, std::ostream& err)
{
  if (!opt.mode.empty()) cfg.noise.mode = mode_arg("--mode", opt.mode);
  if (!opt.band.empty()) cfg.noise.band = band_arg("--band", opt.band);
  if (opt.n) cfg.noise.n_samples = *opt.n;
  if (opt.seed) cfg.noise.seed = *opt.seed;
  if (!opt.capture.empty()) cfg.noise.capture = opt.capture;
  if (opt.threshold_db) cfg.noise.filter.threshold_db = *opt.threshold_db;
  if (opt.guard) cfg.noise.filter.guard_samples = *opt.guard;
  if (!(cfg.noise.filter.threshold_db > 0.0)) {
    throw usage_error("--threshold-db must be positive");
  }
  if (cfg.noise.capture.empty() && cfg.noise.n_samples == 0) {
    throw usage_error("--n must be at least 1");
  }

  iq_capture cap;
  std::string source;
  if (!cfg.noise.capture.empty()) {
    cap = read_capture(cfg.noise.capture);
    source = cfg.noise.capture;
  } else {
    cap = synthesize_capture(cfg.noise.mode, cfg.noise.band, cfg.rf, cfg.noise.n_samples, cfg.noise.seed);
    source = "synthetic";
    if (!opt.write_capture.empty()) {
      write_capture(opt.write_capture, cap);
    }
  }

  const auto rep = analyze_noise_floor(cap.samples, cfg.noise.filter);
  const auto power_text = fixed(rep.average_power_db, 6);

  sink dest(cfg.output_path, out, err);
  auto& os = dest.data();
  switch (cfg.format.value_or(output_format::table)) {
    case output_format::csv:
      os << "source,mode,band,average_power_db,sample_count_used,samples_filtered\n";
      os << source << ',' << to_string(cap.mode) << ',' << to_string(cap.band) << ',' << power_text << ','
         << rep.sample_count_used << ',' << rep.samples_filtered << '\n';
      break;
    case output_format::json: {
      json doc = { { "source", source },
                   { "mode", to_string(cap.mode) },
                   { "band", to_string(cap.band) },
                   { "average_power_db", json_number(power_text) },
                   { "sample_count_used", rep.sample_count_used },
                   { "samples_filtered", rep.samples_filtered } };
      os << doc.dump(2) << '\n';
      break;
    }
    case output_format::table:
      os << "source            " << source << '\n';
      os << "mode              " << to_string(cap.mode) << '\n';
      os << "band              " << to_string(cap.band) << '\n';
      os << "average power     " << fixed(rep.average_power_db, 2) << " dB\n";
      os << "samples used      " << rep.sample_count_used << '\n';
      os << "samples filtered  " << rep.samples_filtered << '\n';
      break;
  }
  return success;
}

// -------------------------------------------------------------------- comply

struct comply_options
{
  std::string require;
  std::vector<std::string> deadlines;
};

int cmd_comply(run_config cfg, const comply_options& opt, std::ostream& out, std::ostream& err)
{
  if (!opt.deadlines.empty()) {
    cfg.deadline_names = opt.deadlines;
  }
  std::optional<ensm_mode> required;
  if (!opt.require.empty()) {
    required = mode_arg("--require", opt.require);
  }
  const auto deadlines = cfg.deadlines();
  if (deadlines.empty()) {
    throw usage_error("no deadlines to check against");
  }
  const auto matrix = compliance_matrix(cfg.clocks, cfg.profile, deadlines);

  sink dest(cfg.output_path, out, err);
  auto& os = dest.data();
  switch (cfg.format.value_or(output_format::table)) {
    case output_format::csv: write_matrix_csv(os, matrix); break;
    case output_format::json: {
      json arr = json::array();
      for (const auto& r : matrix) {
        arr.push_back({ { "mode", to_string(*r.mode) },
                        { "deadline", r.deadline.name },
                        { "tt_ns", json_duration(r.tt) },
                        { "pass", r.pass },
                        { "margin_ns", json_duration(r.margin) } });
      }
      os << arr.dump(2) << '\n';
      break;
    }
    case output_format::table:
      os << std::left << std::setw(26) << "mode" << std::setw(18) << "deadline" << std::right << std::setw(10)
         << "tt_ns" << std::setw(8) << "result" << std::setw(12) << "margin_ns" << '\n';
      for (const auto& r : matrix) {
        os << std::left << std::setw(26) << to_string(*r.mode) << std::setw(18) << r.deadline.name << std::right
           << std::setw(10) << to_string(r.tt) << std::setw(8) << (r.pass ? "pass" : "FAIL") << std::setw(12)
           << to_string(r.margin) << '\n';
      }
      break;
  }

  if (required && !mode_passes_all(matrix, *required)) {
    dest.notes() << to_string(*required) << " misses at least one deadline\n";
    return compliance_failure;
  }
  return success;
}

// --------------------------------------------------------------------- frame

struct frame_options
{
  std::string chain = "tx";
  std::string state = "on";
};

int cmd_frame(const run_config& cfg, const frame_options& opt, std::ostream& out, std::ostream& err)
{
  spi::chain c{};
  if (opt.chain == "tx") c = spi::chain::tx;
  else if (opt.chain == "rx") c = spi::chain::rx;
  else throw usage_error("--chain must be tx or rx");
  if (opt.state != "on" && opt.state != "off") {
    throw usage_error("--state must be on or off");
  }
  const auto f = spi::lo_divider_frame(c, opt.state == "on", cfg.spi);
  const auto bits = spi::encode_frame(f);
  const auto dur = spi::frame_duration(cfg.clocks);

  std::string bit_text;
  for (auto b : bits.bits()) {
    bit_text.push_back(static_cast<char>('0' + b));
  }

  sink dest(cfg.output_path, out, err);
  auto& os = dest.data();
  switch (cfg.format.value_or(output_format::table)) {
    case output_format::csv:
      os << "chain,state,register,data,hex,duration_ns\n";
      os << opt.chain << ',' << opt.state << ',' << f.register_address << ',' << f.data << ',' << bits.to_hex() << ','
         << to_string(dur) << '\n';
      break;
    case output_format::json: {
      json doc = { { "chain", opt.chain },       { "state", opt.state },
                   { "register", f.register_address }, { "data", f.data },
                   { "hex", bits.to_hex() },     { "duration_ns", json_duration(dur) } };
      os << doc.dump(2) << '\n';
      break;
    }
    case output_format::table:
      os << "LO divider " << opt.chain << ' ' << opt.state << ": register " << f.register_address << ", data "
         << f.data << '\n';
      os << "hex " << bits.to_hex() << "  bits " << bit_text << '\n';
      os << "wire time " << to_string(dur) << " ns at " << cfg.clocks.spi_clock_hz << " Hz\n";
      break;
  }
  return success;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Turnaround-time and self-interference model of a zero-IF SDR front-end", "ziftt" };
  app.require_subcommand(1);
  app.fallthrough();

  common_options common;
  app.add_option("-c,--config", common.config_path, "Key-value config file layered over the defaults");
  app.add_option("-f,--format", common.format, "Output format: table, csv or json");
  app.add_option("-o,--output", common.output, "Write the primary output to this file");

  turnaround_options ta;
  auto* turnaround = app.add_subcommand("turnaround", "Itemized turnaround budgets");
  turnaround->add_option("--mode", ta.mode, "Mode name, e.g. lo-control");
  turnaround->add_option("--dir", ta.dir, "rx-tx or tx-rx");
  turnaround->add_flag("--all", ta.all, "Every mode and direction");

  trace_options tro;
  auto* trace = app.add_subcommand("trace", "Simulate a command schedule and sample the Tx power");
  trace->add_option("--schedule", tro.schedule, "Commands, e.g. \"lo-on@0, tx-start@1500, tx-end@2000\"");
  trace->add_option("--band", tro.band, "2g4 or 5g");
  trace->add_option("--interval-ns", tro.interval_ns, "Sample interval");
  trace->add_option("--window-start-ns", tro.start_ns, "First sample time");
  trace->add_option("--window-end-ns", tro.end_ns, "Last sample time");

  noise_options no;
  auto* noise = app.add_subcommand("noise", "Receiver noise floor from a synthetic or recorded capture");
  noise->add_option("--mode", no.mode, "Mode for synthetic captures");
  noise->add_option("--band", no.band, "2g4 or 5g");
  noise->add_option("--n", no.n, "Number of synthetic samples");
  noise->add_option("--seed", no.seed, "Random seed");
  noise->add_option("--capture", no.capture, "Interleaved little-endian int16 I/Q file");
  noise->add_option("--threshold-db", no.threshold_db, "Packet threshold above the median power");
  noise->add_option("--guard", no.guard, "Samples removed on each side of a packet");
  noise->add_option("--write-capture", no.write_capture, "Also save the synthetic capture (and sidecar) here");

  comply_options co;
  auto* comply = app.add_subcommand("comply", "Check every mode against protocol deadlines");
  comply->add_option("--require", co.require, "Exit 3 unless this mode meets every deadline");
  comply->add_option("--deadline", co.deadlines, "Deadline name; repeat to replace the configured list");

  bool dump = false;
  auto* config = app.add_subcommand("config", "Show the effective configuration");
  config->add_flag("--dump", dump, "Print the configuration in config-file syntax");

  frame_options fo;
  auto* frame = app.add_subcommand("frame", "Encode the SPI write that gates an LO divider");
  frame->add_option("--chain", fo.chain, "tx or rx");
  frame->add_option("--state", fo.state, "on or off");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return usage_failure;
  }

  try {
    const auto cfg = effective_config(common);
    if (turnaround->parsed()) return cmd_turnaround(cfg, ta, out, err);
    if (trace->parsed()) return cmd_trace(cfg, tro, out, err);
    if (noise->parsed()) return cmd_noise(cfg, no, out, err);
    if (comply->parsed()) return cmd_comply(cfg, co, out, err);
    if (frame->parsed()) return cmd_frame(cfg, fo, out, err);
    if (config->parsed()) {
      sink dest(cfg.output_path, out, err);
      if (dump) {
        dest.data() << dump_run_config(cfg);
      } else {
        dest.data() << "configuration is valid\n";
      }
      return success;
    }
  } catch (const usage_error& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return usage_failure;
  } catch (const config_error& e) {
    err << "config error: " << e.what() << '\n';
    return usage_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return runtime_failure;
  }
  return usage_failure;
}

} // namespace ziftt::cli
