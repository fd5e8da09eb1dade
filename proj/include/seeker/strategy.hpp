#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace seeker {

// On-node decision outcomes, in priority order. D0..D4 are actionable
// strategies with an energy cost; Drop is the fallback when nothing fits the
// budget.
enum class Strategy : std::uint8_t {
  D0 = 0,  // transmit memoized result
  D1 = 1,  // transmit raw window
  D2 = 2,  // infer locally, transmit result
  D3 = 3,  // transmit recoverable coreset
  D4 = 4,  // transmit importance-sampled coreset
  Drop = 5,
};

inline constexpr int kStrategyCount = 5;  // actionable strategies (excludes Drop)

inline constexpr std::array<Strategy, kStrategyCount> kStrategiesByPriority{
    Strategy::D0, Strategy::D1, Strategy::D2, Strategy::D3, Strategy::D4};

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::D0: return "D0";
    case Strategy::D1: return "D1";
    case Strategy::D2: return "D2";
    case Strategy::D3: return "D3";
    case Strategy::D4: return "D4";
    case Strategy::Drop: return "DROP";
  }
  return "?";
}

inline Strategy strategy_from_name(const std::string& name) {
  for (int i = 0; i < kStrategyCount; ++i) {
    auto s = static_cast<Strategy>(i);
    if (name == strategy_name(s)) return s;
  }
  if (name == "DROP") return Strategy::Drop;
  throw std::invalid_argument("unknown strategy name: " + name);
}

}  // namespace seeker
