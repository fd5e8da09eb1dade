#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seeker/rng.hpp"
#include "seeker/strategy.hpp"

namespace seeker::energy {

inline constexpr double kDefaultCapacity = 60.0;     // energy units
inline constexpr int kDefaultPredictorWindow = 16;   // ticks of income history

// Energy price of one strategy, split into the sensing/compute part and the
// radio part.
struct StrategyCost {
  double sensor_eu = 0.0;
  double comm_eu = 0.0;
  double total() const { return sensor_eu + comm_eu; }
};

// Per-strategy execution time in ticks; costs spread uniformly across them.
struct Durations {
  std::array<int, kStrategyCount> ticks{2, 12, 8, 4, 4};
  int at(Strategy s) const { return ticks[static_cast<int>(s)]; }
};

struct CostTable {
  std::array<StrategyCost, kStrategyCount> costs{};

  const StrategyCost& at(Strategy s) const { return costs[static_cast<int>(s)]; }
  StrategyCost& at(Strategy s) { return costs[static_cast<int>(s)]; }

  // Default per-window budget for each strategy.
  static CostTable defaults() {
    CostTable t;
    t.at(Strategy::D0) = {0.54, 8.27};
    t.at(Strategy::D1) = {29.23, 8.27};
    t.at(Strategy::D2) = {16.58, 8.27};
    t.at(Strategy::D3) = {0.87, 15.97};
    t.at(Strategy::D4) = {1.07, 15.97};
    return t;
  }

  // Strategies that can never fire: some always-eligible higher-priority
  // strategy is at least as cheap and gets at least as much predicted income
  // (duration no shorter), so whenever the lower one is affordable the higher
  // one is too. D0 never dominates anything because the memo gate can fail.
  // With the default table D4 is shadowed by D3.
  std::vector<Strategy> unreachable(const Durations& durations = Durations{}) const {
    std::vector<Strategy> out;
    for (int i = 2; i < kStrategyCount; ++i) {
      const double mine = costs[i].total();
      for (int j = 1; j < i; ++j) {
        if (costs[j].total() <= mine && durations.ticks[j] >= durations.ticks[i]) {
          out.push_back(static_cast<Strategy>(i));
          break;
        }
      }
    }
    return out;
  }
};

// --- harvest traces --------------------------------------------------------------

// Income per tick, in energy units.
struct HarvestTrace {
  std::vector<double> income;
  std::string origin;  // human-readable spec the trace came from
};

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Trace generators, selected by `kind`:
//   constant  level
//   rf        on_income, mean_on_ticks, mean_off_ticks  (two-state burst source)
//   piezo     amplitude, period_ticks, duty             (periodic spike source)
struct TraceSpec {
  std::string kind = "constant";
  std::vector<double> params{1.0};
  std::uint64_t seed = 0;

  // Parses "rf:4,8,24" / "constant:0.8" / "piezo:6,50,0.1".
  static TraceSpec parse(const std::string& text, std::uint64_t seed = 0) {
    TraceSpec spec;
    spec.seed = seed;
    const auto colon = text.find(':');
    spec.kind = text.substr(0, colon);
    spec.params.clear();
    if (colon != std::string::npos) {
      std::stringstream ss(text.substr(colon + 1));
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        spec.params.push_back(std::stod(tok));
      }
    }
    return spec;
  }
};

// Deterministic trace synthesis. The RF source is a two-state Markov chain
// with geometric dwell times, started from its stationary distribution; the
// piezo source is a fixed-period duty-cycle spike train.
inline HarvestTrace gen_trace(const TraceSpec& spec, long ticks) {
  if (ticks < 0) throw TraceError("gen_trace: negative length");
  HarvestTrace t;
  t.income.reserve(ticks);

  if (spec.kind == "constant") {
    const double level = spec.params.empty() ? 1.0 : spec.params[0];
    if (level < 0.0) throw TraceError("gen_trace: negative income level");
    t.income.assign(ticks, level);
    t.origin = "constant:" + std::to_string(level);
  } else if (spec.kind == "rf") {
    if (spec.params.size() != 3) throw TraceError("gen_trace: rf needs on_income,mean_on,mean_off");
    const double on_income = spec.params[0];
    const double mean_on = spec.params[1];
    const double mean_off = spec.params[2];
    if (on_income < 0.0 || mean_on < 1.0 || mean_off < 1.0)
      throw TraceError("gen_trace: rf parameters out of range");
    const double p_exit_on = 1.0 / mean_on;    // on -> off per tick
    const double p_exit_off = 1.0 / mean_off;  // off -> on per tick
    Rng rng(spec.seed);
    // Stationary start: P(on) = mean_on / (mean_on + mean_off).
    bool on = rng.next_double() < mean_on / (mean_on + mean_off);
    for (long i = 0; i < ticks; ++i) {
      t.income.push_back(on ? on_income : 0.0);
      const double u = rng.next_double();
      on = on ? (u >= p_exit_on) : (u < p_exit_off);
    }
    t.origin = "rf";
  } else if (spec.kind == "piezo") {
    if (spec.params.size() != 3) throw TraceError("gen_trace: piezo needs amplitude,period,duty");
    const double amplitude = spec.params[0];
    const long period = static_cast<long>(spec.params[1]);
    const double duty = spec.params[2];
    if (amplitude < 0.0 || period < 1 || duty <= 0.0 || duty > 1.0)
      throw TraceError("gen_trace: piezo parameters out of range");
    const long on_ticks = std::max<long>(1, static_cast<long>(std::llround(period * duty)));
    for (long i = 0; i < ticks; ++i) t.income.push_back(i % period < on_ticks ? amplitude : 0.0);
    t.origin = "piezo";
  } else {
    throw TraceError("gen_trace: unknown trace kind '" + spec.kind + "'");
  }
  return t;
}

// Text format: optional '#' comment lines, then one income value per line.
inline HarvestTrace load_trace(const std::string& path, long min_ticks = 0) {
  std::ifstream in(path);
  if (!in) throw TraceError("load_trace: cannot open " + path);
  HarvestTrace t;
  t.origin = "file:" + path;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    try {
      t.income.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw TraceError("load_trace: unparseable line '" + line + "' in " + path);
    }
    if (t.income.back() < 0.0) throw TraceError("load_trace: negative income in " + path);
  }
  if (static_cast<long>(t.income.size()) < min_ticks)
    throw TraceError("load_trace: " + path + " holds " + std::to_string(t.income.size()) +
                     " ticks, need " + std::to_string(min_ticks));
  return t;
}

inline void save_trace(const std::string& path, const HarvestTrace& t) {
  std::ofstream out(path);
  if (!out) throw TraceError("save_trace: cannot open " + path);
  out << "# harvest trace (" << t.origin << "), one income value per tick\n";
  char buf[64];
  for (double v : t.income) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
}

// --- capacitor + predictor --------------------------------------------------------

// Capacitor charge plus a ring buffer of recent income used by the
// moving-average predictor. Harvest beyond capacity is clipped (and counted).
struct EnergyState {
  double stored = 0.0;
  double capacity = kDefaultCapacity;
  int predictor_window = kDefaultPredictorWindow;
  std::vector<double> history;  // ring buffer, `filled` entries valid
  int head = 0;
  int filled = 0;
  long clip_events = 0;
  double clipped_total = 0.0;

  void init(double initial, double cap, int window) {
    if (cap <= 0.0) throw std::invalid_argument("EnergyState: capacity must be positive");
    if (window < 1) throw std::invalid_argument("EnergyState: predictor window must be positive");
    stored = std::min(initial, cap);
    capacity = cap;
    predictor_window = window;
    history.assign(window, 0.0);
    head = 0;
    filled = 0;
    clip_events = 0;
    clipped_total = 0.0;
  }

  // One tick of income: charge the capacitor and log the tick into the
  // predictor history (pre-clip, so the predictor sees the source, not the
  // capacitor ceiling).
  void harvest(double income) {
    if (history.empty()) history.assign(predictor_window, 0.0);
    history[head] = income;
    head = (head + 1) % predictor_window;
    filled = std::min(filled + 1, predictor_window);
    const double room = capacity - stored;
    if (income > room) {
      ++clip_events;
      clipped_total += income - room;
      stored = capacity;
    } else {
      stored += income;
    }
  }

  // Withdraw up to `amount`; returns what actually left the capacitor.
  double spend(double amount) {
    const double used = std::min(amount, stored);
    stored -= used;
    return used;
  }
};

// Moving-average income forecast over the next `horizon` ticks: the mean of
// the observed history (zero before any observation) times the horizon.
inline double predict_income(const EnergyState& s, int horizon) {
  if (horizon < 0) throw std::invalid_argument("predict_income: negative horizon");
  if (s.filled == 0) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < s.filled; ++i) sum += s.history[i];
  return sum / s.filled * horizon;
}

// A strategy is affordable when the capacitor charge plus the predicted
// income over its execution covers the full cost.
inline bool can_afford(const EnergyState& s, double predicted_income, double total_cost) {
  return s.stored + predicted_income >= total_cost;
}

struct ConsumeOutcome {
  bool completed = false;
  long end_tick = 0;      // tick of the final spend
  double spent = 0.0;     // energy actually drawn
  double refunded = 0.0;  // energy returned on abandonment
};

// Spends `cost` spread uniformly over `duration` ticks starting at
// `start_tick`. The caller has already harvested start_tick; subsequent ticks
// harvest before spending. Each tick draws at most the per-tick share; an
// underpowered tick stalls the attempt (progress slips) until the deadline,
// where the attempt aborts and `loss_fraction` of the drawn energy is lost
// for good (the rest returns to the capacitor).
inline ConsumeOutcome consume(EnergyState& s, const HarvestTrace& trace, long start_tick,
                              int duration, long deadline_tick, double cost,
                              double loss_fraction = 1.0) {
  if (duration < 1) throw std::invalid_argument("consume: duration must be positive");
  if (cost < 0.0) throw std::invalid_argument("consume: negative cost");
  if (loss_fraction < 0.0 || loss_fraction > 1.0)
    throw std::invalid_argument("consume: loss fraction out of [0,1]");

  const double per_tick = cost / duration;
  double remaining = cost;
  ConsumeOutcome out;
  out.end_tick = start_tick;
  const double eps = 1e-9 * std::max(cost, 1.0);

  for (long tick = start_tick; tick < deadline_tick; ++tick) {
    if (tick != start_tick) {
      const double income =
          tick < static_cast<long>(trace.income.size()) ? trace.income[tick] : 0.0;
      s.harvest(income);
    }
    out.spent += s.spend(std::min(per_tick, remaining));
    remaining = cost - out.spent;
    out.end_tick = tick;
    if (remaining <= eps) {
      out.completed = true;
      return out;
    }
  }
  // Deadline: abandon and refund whatever the loss model leaves.
  out.refunded = out.spent * (1.0 - loss_fraction);
  s.stored = std::min(s.stored + out.refunded, s.capacity);
  out.end_tick = deadline_tick - 1;
  return out;
}

}  // namespace seeker::energy
