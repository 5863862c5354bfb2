#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <ziftt/mac_compliance.hpp>

using namespace ziftt;
using namespace ziftt::literals;

namespace {
protocol_deadline builtin(std::string_view name) { return *find_builtin_deadline(name); }
} // namespace

TEST(Compliance, BuiltinTable)
{
  EXPECT_EQ(builtin("sifs-2g4").deadline_ns, 10'000);
  EXPECT_EQ(builtin("sifs-5g").deadline_ns, 16'000);
  EXPECT_EQ(builtin("nr-guard-120khz").deadline_ns, 17'840);
  EXPECT_FALSE(find_builtin_deadline("sifs-6g"));
}

TEST(Compliance, CheckExamples)
{
  const auto lo = check(640_ns, builtin("sifs-2g4"));
  EXPECT_TRUE(lo.pass);
  EXPECT_EQ(lo.margin, 9'360_ns);

  const auto ensm = check(55'000_ns, builtin("sifs-5g"));
  EXPECT_FALSE(ensm.pass);
  EXPECT_EQ(ensm.margin, -(39'000_ns));

  const auto tdd = check(18'000_ns, builtin("nr-guard-120khz"));
  EXPECT_FALSE(tdd.pass);
  EXPECT_EQ(tdd.margin, -(160_ns));
}

TEST(Compliance, ExactlyAtDeadlinePasses)
{
  const auto r = check(10'000_ns, builtin("sifs-2g4"));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.margin, 0_ns);
  EXPECT_FALSE(check(duration::ratio(20'001, 2), builtin("sifs-2g4")).pass);
}

TEST(Compliance, BadInput)
{
  EXPECT_THROW(check(-(1_ns), builtin("sifs-2g4")), range_error);
  EXPECT_THROW(check(1_ns, { "zero", 0, "" }), config_error);
}

TEST(Compliance, AntiMonotoneInTurnaround)
{
  std::mt19937_64 rng(5);
  for (int k = 0; k < 2000; ++k) {
    const protocol_deadline d{ "d", 1 + static_cast<std::int64_t>(rng() % 100'000), "" };
    const auto a = duration::ratio(static_cast<std::int64_t>(rng() % 200'000'000), 1000);
    const auto b = a + duration::ratio(static_cast<std::int64_t>(rng() % 100'000), 1000);
    const auto ra = check(a, d);
    const auto rb = check(b, d);
    EXPECT_GE(ra.margin, rb.margin);
    if (rb.pass) {
      EXPECT_TRUE(ra.pass);
    }
    if (!ra.pass) {
      EXPECT_FALSE(rb.pass);
    }
  }
}

TEST(Compliance, MatrixIsPointwiseCheck)
{
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    clock_config c;
    c.spi_clock_hz = 1'000'000 + rng() % 49'000'000;
    c.adc_clock_hz = 10'000'000 + rng() % 300'000'000;
    timing_profile p;
    p.vco_cal_ns = static_cast<std::int64_t>(rng() % 60'000);
    p.pll_lock_ns = static_cast<std::int64_t>(rng() % 30'000);
    p.lo_div_powerup_ns = static_cast<std::int64_t>(rng() % 1000);
    std::vector<protocol_deadline> deadlines{ builtin("sifs-2g4"), { "x", 1 + static_cast<std::int64_t>(rng() % 60'000), "" } };

    const auto m = compliance_matrix(c, p, deadlines);
    ASSERT_EQ(m.size(), all_modes.size() * deadlines.size());
    std::size_t row = 0;
    for (auto mode : all_modes) {
      const auto tt = max(compute_budget(mode, direction::rx_to_tx, c, p).total(),
                          compute_budget(mode, direction::tx_to_rx, c, p).total());
      for (const auto& d : deadlines) {
        const auto& r = m[row++];
        EXPECT_EQ(r.mode, mode);
        EXPECT_EQ(r.deadline, d);
        EXPECT_EQ(r.tt, tt);
        EXPECT_EQ(r.pass, check(tt, d).pass);
        EXPECT_EQ(r.margin, check(tt, d).margin);
      }
    }
  }
}

TEST(Compliance, DefaultMatrix)
{
  const auto m = compliance_matrix({}, {}, builtin_deadlines());
  EXPECT_TRUE(mode_passes_all(m, ensm_mode::lo_control));
  EXPECT_TRUE(mode_passes_all(m, ensm_mode::fdd));
  EXPECT_FALSE(mode_passes_all(m, ensm_mode::fdd_independent));
  EXPECT_FALSE(mode_passes_all(m, ensm_mode::standard_tdd_dual_synth));
  EXPECT_FALSE(mode_passes_all(m, ensm_mode::standard_ensm_tdd));
  EXPECT_FALSE(mode_passes_all(m, ensm_mode::standard_tdd));
  EXPECT_THROW(compliance_matrix({}, {}, std::vector<protocol_deadline>{}), config_error);
}

TEST(Compliance, CsvRows)
{
  const std::array<ensm_mode, 1> only{ ensm_mode::lo_control };
  const auto m = compliance_matrix({}, {}, builtin_deadlines(), only);
  std::ostringstream os;
  write_matrix_csv(os, m);
  EXPECT_EQ(os.str(), "mode,deadline,tt_ns,pass,margin_ns\n"
                      "lo-control,sifs-2g4,640,true,9360\n"
                      "lo-control,sifs-5g,640,true,15360\n"
                      "lo-control,nr-guard-120khz,640,true,17200\n");
}
