// Prints every turnaround budget for a few SPI clock settings and shows which
// modes would meet a Wi-Fi SIFS deadline.

#include <iostream>

#include <ziftt/ziftt.hpp>

int main()
{
  using namespace ziftt;

  const timing_profile profile;
  const auto sifs = *find_builtin_deadline("sifs-2g4");

  for (hertz spi_hz : { 10'000'000ULL, 25'000'000ULL, 50'000'000ULL }) {
    clock_config clocks;
    clocks.spi_clock_hz = spi_hz;
    std::cout << "SPI clock " << spi_hz / 1'000'000 << " MHz\n";
    for (const auto& row : sweep_budgets(all_modes, clocks, profile)) {
      const auto verdict = check(row.budget.total(), sifs);
      std::cout << "  " << to_string(row.mode) << ' ' << to_string(row.direction) << ": "
                << to_string(row.budget.total()) << " ns" << (verdict.pass ? "" : "  (misses SIFS)") << '\n';
    }
  }
}
