#include <gtest/gtest.h>

#include <random>

#include <ziftt/ensm_model.hpp>

#include "oracles.hpp"

using namespace ziftt;
using namespace ziftt::literals;

namespace {

duration total(ensm_mode m, direction d, const clock_config& c = {}, const timing_profile& p = {})
{
  return compute_budget(m, d, c, p).total();
}

/// Random profile and clocks with every duration in a plausible range.
struct random_setup
{
  clock_config clocks;
  timing_profile profile;
};

random_setup draw(std::mt19937_64& rng)
{
  auto pick = [&](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  random_setup s;
  s.clocks.adc_clock_hz = static_cast<hertz>(pick(1'000'000, 400'000'000));
  s.clocks.spi_clock_hz = static_cast<hertz>(pick(100'000, 50'000'000));
  s.profile.vco_cal_ns = pick(0, 100'000);
  s.profile.pll_lock_ns = pick(0, 50'000);
  s.profile.dac_powerup_ns = pick(0, 50'000);
  s.profile.flush_cycles = static_cast<std::uint64_t>(pick(0, 4096));
  s.profile.lo_div_powerup_ns = pick(0, 2000);
  s.profile.lo_div_powerdown_ns = pick(0, 2000);
  return s;
}

/// Budget total multiplied by adc_hz * spi_hz, straight from the per-mode
/// formulas, in wide integers.
__int128 formula_total_scaled(ensm_mode m, direction d, const random_setup& s)
{
  const __int128 adc = s.clocks.adc_clock_hz;
  const __int128 spi = s.clocks.spi_clock_hz;
  const __int128 L = adc * spi;
  const __int128 vco = s.profile.vco_cal_ns * L;
  const __int128 pll = s.profile.pll_lock_ns * L;
  const __int128 dac = d == direction::rx_to_tx ? s.profile.dac_powerup_ns * L : 0;
  const __int128 flush = static_cast<__int128>(s.profile.flush_cycles) * 1'000'000'000 * spi;
  const __int128 frame = static_cast<__int128>(24) * 1'000'000'000 * adc;
  auto mx = [](__int128 a, __int128 b) { return a > b ? a : b; };
  switch (m) {
    case ensm_mode::standard_ensm_tdd: return vco + mx(pll, mx(dac, flush));
    case ensm_mode::standard_tdd: return mx(pll, mx(dac, flush));
    case ensm_mode::standard_tdd_dual_synth: return mx(dac, flush);
    case ensm_mode::fdd_independent: return dac;
    case ensm_mode::fdd: return 0;
    case ensm_mode::lo_control:
      return frame + (d == direction::rx_to_tx ? s.profile.lo_div_powerup_ns : s.profile.lo_div_powerdown_ns) * L;
  }
  return -1;
}

bool scaled_equals(duration d, __int128 scaled, const clock_config& c)
{
  const __int128 L = static_cast<__int128>(c.adc_clock_hz) * c.spi_clock_hz;
  return static_cast<__int128>(d.numerator()) * L == scaled * d.denominator();
}

} // namespace

TEST(FlushTime, Examples)
{
  clock_config c;
  timing_profile p;
  EXPECT_EQ(flush_time(c, p), 2400_ns);
  c.adc_clock_hz = 384'000'000;
  EXPECT_EQ(flush_time(c, p), 1000_ns);
  p.flush_cycles = 0;
  EXPECT_EQ(flush_time(c, p), 0_ns);
  c.adc_clock_hz = 0;
  EXPECT_THROW(flush_time(c, p), config_error);
}

TEST(TurnaroundBudget, DefaultTotals)
{
  EXPECT_EQ(total(ensm_mode::standard_ensm_tdd, direction::rx_to_tx), 55'000_ns);
  EXPECT_EQ(total(ensm_mode::standard_tdd, direction::rx_to_tx), 18'000_ns);
  EXPECT_EQ(total(ensm_mode::standard_tdd_dual_synth, direction::rx_to_tx), 18'000_ns);
  EXPECT_EQ(total(ensm_mode::fdd_independent, direction::rx_to_tx), 18'000_ns);
  EXPECT_EQ(total(ensm_mode::lo_control, direction::rx_to_tx), 640_ns);
  EXPECT_EQ(total(ensm_mode::lo_control, direction::tx_to_rx), 500_ns);
  EXPECT_EQ(total(ensm_mode::fdd, direction::rx_to_tx), 0_ns);
  EXPECT_EQ(total(ensm_mode::fdd, direction::tx_to_rx), 0_ns);
}

TEST(TurnaroundBudget, TxToRxDropsDacButKeepsFlush)
{
  EXPECT_EQ(total(ensm_mode::standard_ensm_tdd, direction::tx_to_rx), 52'000_ns);
  EXPECT_EQ(total(ensm_mode::standard_tdd, direction::tx_to_rx), 15'000_ns);
  EXPECT_EQ(total(ensm_mode::standard_tdd_dual_synth, direction::tx_to_rx), 2'400_ns);
  EXPECT_EQ(total(ensm_mode::fdd_independent, direction::tx_to_rx), 0_ns);
  for (auto m : all_modes) {
    const auto b = compute_budget(m, direction::tx_to_rx, {}, {});
    for (const auto& c : b.components()) {
      EXPECT_NE(c.name, "dac_powerup") << to_string(m);
    }
  }
}

TEST(TurnaroundBudget, Structure)
{
  const auto b = compute_budget(ensm_mode::standard_ensm_tdd, direction::rx_to_tx, {}, {});
  ASSERT_EQ(b.components().size(), 4U);
  EXPECT_EQ(b.stage_count(), 2U);
  EXPECT_EQ(b.components()[0].name, "vco_cal");
  EXPECT_EQ(b.components()[0].stage, 0U);
  for (std::size_t k = 1; k < 4; ++k) {
    EXPECT_EQ(b.components()[k].stage, 1U);
  }

  const auto lo = compute_budget(ensm_mode::lo_control, direction::rx_to_tx, {}, {});
  ASSERT_EQ(lo.components().size(), 2U);
  EXPECT_EQ(lo.components()[0], (budget_component{ "spi_frame", 480_ns, 0 }));
  EXPECT_EQ(lo.components()[1], (budget_component{ "lo_div_powerup", 160_ns, 1 }));

  EXPECT_TRUE(compute_budget(ensm_mode::fdd, direction::rx_to_tx, {}, {}).components().empty());
}

TEST(TurnaroundBudget, StoredTotalMustMatch)
{
  std::vector<budget_component> parts{ { "a", 10_ns, 0 }, { "b", 30_ns, 0 }, { "c", 5_ns, 1 } };
  EXPECT_EQ(turnaround_budget::from_parts(parts, 35_ns).total(), 35_ns);
  EXPECT_THROW(turnaround_budget::from_parts(parts, 45_ns), range_error);
}

TEST(TurnaroundBudget, StageLawOnRandomProfiles)
{
  std::mt19937_64 rng(42);
  for (int k = 0; k < 1000; ++k) {
    const auto s = draw(rng);
    const __int128 L = static_cast<__int128>(s.clocks.adc_clock_hz) * s.clocks.spi_clock_hz;
    for (auto m : all_modes) {
      for (auto d : all_directions) {
        const auto b = compute_budget(m, d, s.clocks, s.profile);
        std::vector<oracle::component> comps;
        for (const auto& c : b.components()) {
          comps.push_back({ c.stage, c.duration.numerator(), c.duration.denominator() });
        }
        ASSERT_TRUE(scaled_equals(b.total(), oracle::stage_law_scaled(comps, L), s.clocks));
        ASSERT_TRUE(scaled_equals(b.total(), formula_total_scaled(m, d, s), s.clocks))
          << to_string(m) << ' ' << to_string(d);
      }
    }
  }
}

TEST(TurnaroundBudget, MonotoneInEveryProfileField)
{
  std::mt19937_64 rng(99);
  for (int k = 0; k < 200; ++k) {
    const auto s = draw(rng);
    const auto bump = static_cast<std::int64_t>(1 + rng() % 5000);
    std::vector<timing_profile> bumped(6, s.profile);
    bumped[0].vco_cal_ns += bump;
    bumped[1].pll_lock_ns += bump;
    bumped[2].dac_powerup_ns += bump;
    bumped[3].flush_cycles += static_cast<std::uint64_t>(bump);
    bumped[4].lo_div_powerup_ns += bump;
    bumped[5].lo_div_powerdown_ns += bump;
    for (auto m : all_modes) {
      for (auto d : all_directions) {
        const auto base = total(m, d, s.clocks, s.profile);
        for (const auto& p : bumped) {
          ASSERT_GE(total(m, d, s.clocks, p), base);
        }
      }
    }
  }
}

TEST(TurnaroundBudget, LoControlScalesWithSpiClockOnly)
{
  for (hertz f : { 10'000'000ULL, 25'000'000ULL, 50'000'000ULL, 7'000'000ULL }) {
    clock_config c;
    c.spi_clock_hz = f;
    c.adc_clock_hz = 61'440'000;
    const auto frame = duration::cycles(24, f);
    EXPECT_EQ(total(ensm_mode::lo_control, direction::rx_to_tx, c), frame + 160_ns);
    EXPECT_EQ(total(ensm_mode::lo_control, direction::tx_to_rx, c), frame + 20_ns);
  }
}

TEST(TurnaroundBudget, DefaultOrdering)
{
  const auto fdd = worst_case_turnaround(ensm_mode::fdd, {}, {});
  const auto lo = worst_case_turnaround(ensm_mode::lo_control, {}, {});
  const auto tdd = total(ensm_mode::standard_tdd, direction::rx_to_tx);
  EXPECT_EQ(fdd, 0_ns);
  EXPECT_LT(fdd, lo);
  EXPECT_LE(lo, 640_ns);
  EXPECT_LT(lo, tdd);
  EXPECT_EQ(tdd, total(ensm_mode::standard_tdd_dual_synth, direction::rx_to_tx));
  EXPECT_EQ(tdd, total(ensm_mode::fdd_independent, direction::rx_to_tx));
  EXPECT_LT(tdd, total(ensm_mode::standard_ensm_tdd, direction::rx_to_tx));
}

TEST(TurnaroundBudget, NegativeProfileRejected)
{
  timing_profile p;
  p.dac_powerup_ns = -1;
  EXPECT_THROW(compute_budget(ensm_mode::fdd_independent, direction::rx_to_tx, {}, p), config_error);
}

TEST(SweepBudgets, OrderAndSize)
{
  const auto rows = sweep_budgets(all_modes, {}, {});
  ASSERT_EQ(rows.size(), 12U);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].mode, all_modes[k / 2]);
    EXPECT_EQ(rows[k].direction, k % 2 == 0 ? direction::rx_to_tx : direction::tx_to_rx);
    EXPECT_EQ(rows[k].budget, compute_budget(rows[k].mode, rows[k].direction, {}, {}));
  }
  EXPECT_TRUE(sweep_budgets({}, {}, {}).empty());

  const std::array<ensm_mode, 1> lo{ ensm_mode::lo_control };
  const auto lo_rows = sweep_budgets(lo, {}, {});
  ASSERT_EQ(lo_rows.size(), 2U);
  EXPECT_EQ(lo_rows[0].budget.total(), 640_ns);
  EXPECT_EQ(lo_rows[1].budget.total(), 500_ns);
}

TEST(TurnaroundBudget, JsonRecord)
{
  const auto b = compute_budget(ensm_mode::lo_control, direction::rx_to_tx, {}, {});
  EXPECT_EQ(to_json(b), R"({"total_ns":640,"components":[{"name":"spi_frame","stage":0,"duration_ns":480},)"
                        R"({"name":"lo_div_powerup","stage":1,"duration_ns":160}]})");
  EXPECT_EQ(components_field(b), "spi_frame@0=480;lo_div_powerup@1=160");
}

TEST(EnsmMode, NamesRoundTrip)
{
  for (auto m : all_modes) {
    EXPECT_EQ(parse_mode(to_string(m)), m);
  }
  for (auto d : all_directions) {
    EXPECT_EQ(parse_direction(to_string(d)), d);
  }
  EXPECT_FALSE(parse_mode("bogus"));
}
