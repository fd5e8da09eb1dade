#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seeker/bundle.hpp"
#include "seeker/classify.hpp"
#include "seeker/codec.hpp"
#include "seeker/energy.hpp"
#include "seeker/ingest.hpp"
#include "seeker/node.hpp"
#include "seeker/rng.hpp"
#include "seeker/strategy.hpp"

namespace seeker::sim {

enum class PolicyKind { Seeker, Origin };

inline const char* policy_name(PolicyKind p) { return p == PolicyKind::Seeker ? "seeker" : "origin"; }

// Which strategies a policy may use. The origin baseline only ever transmits
// raw windows (or drops); the full policy may use everything.
inline std::array<bool, kStrategyCount> policy_enabled(PolicyKind p) {
  if (p == PolicyKind::Origin) return {false, true, false, false, false};
  return {true, true, true, true, true};
}

struct SimParams {
  PolicyKind policy = PolicyKind::Seeker;
  std::uint64_t seed = 42;
  double capacity = energy::kDefaultCapacity;
  double initial_energy = energy::kDefaultCapacity / 2.0;
  int predictor_window = energy::kDefaultPredictorWindow;
  energy::CostTable costs = energy::CostTable::defaults();
  energy::Durations durations{};
  double abandon_loss = 1.0;
  bool byte_proportional = false;
  bool count_headers = false;
  bool raw_physical = false;
  int node_bits = 16;
};

// One node decision and its outcome. `status` is 'o' (delivered), 'd'
// (dropped by choice) or 'm' (attempted but missed the stride deadline).
struct EventRecord {
  long window = 0;
  long tick = 0;
  int sensor = 0;
  Strategy strategy = Strategy::Drop;
  char status = 'd';
  bool memo_hit = false;
  int k = 0;
  double stored = 0.0;
  double mean_income = 0.0;
  double spent = 0.0;
  long bytes = 0;
  int host_class = -1;
  double confidence = 0.0;
  int label = -1;
};

struct EnsembleRecord {
  long window = 0;
  long tick = 0;
  int class_idx = -1;
  int label = -1;
  int reports = 0;
};

struct Metrics {
  long windows = 0;
  int sensors = 0;
  long decisions = 0;
  std::array<long, kStrategyCount> delivered_by_strategy{};
  std::array<long, kStrategyCount> missed_by_strategy{};
  long drops = 0;
  long misses = 0;
  long delivered = 0;
  long correct = 0;
  long bytes_sent = 0;
  long raw_baseline_bytes = 0;
  long memo_hits = 0;
  long d0_delivered = 0;
  long d0_correct = 0;
  long ens_windows = 0;
  long ens_correct = 0;
  std::vector<long> per_sensor_delivered;
  std::vector<long> per_sensor_correct;
  std::vector<Strategy> unreachable;

  double delivery_rate() const { return decisions ? static_cast<double>(delivered) / decisions : 0.0; }
  double strict_accuracy() const { return decisions ? static_cast<double>(correct) / decisions : 0.0; }
  double accuracy_on_delivered() const {
    return delivered ? static_cast<double>(correct) / delivered : 0.0;
  }
  double bytes_ratio() const {
    return raw_baseline_bytes ? static_cast<double>(bytes_sent) / raw_baseline_bytes : 0.0;
  }
  double memo_precision() const {
    return d0_delivered ? static_cast<double>(d0_correct) / d0_delivered : 0.0;
  }
  double ensemble_strict_accuracy() const {
    return windows ? static_cast<double>(ens_correct) / windows : 0.0;
  }
  double ensemble_accuracy_on_completed() const {
    return ens_windows ? static_cast<double>(ens_correct) / ens_windows : 0.0;
  }
  double per_sensor_delivery_rate(int s) const {
    return windows ? static_cast<double>(per_sensor_delivered[s]) / windows : 0.0;
  }
  double per_sensor_accuracy_on_delivered(int s) const {
    return per_sensor_delivered[s] ? static_cast<double>(per_sensor_correct[s]) / per_sensor_delivered[s]
                                   : 0.0;
  }
};

struct SimResult {
  Metrics metrics;
  std::vector<EventRecord> events;
  std::vector<EnsembleRecord> ensembles;
  std::string log_text;
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* status_name(char s) {
  switch (s) {
    case 'o': return "ok";
    case 'd': return "drop";
    case 'm': return "miss";
  }
  return "?";
}

inline char status_from_name(const std::string& s) {
  if (s == "ok") return 'o';
  if (s == "drop") return 'd';
  if (s == "miss") return 'm';
  throw std::invalid_argument("event log: unknown status '" + s + "'");
}

}  // namespace detail

// Aggregates counters from event + ensemble records. Usable both on a live
// run and on a re-parsed log.
inline Metrics compute_metrics(std::span<const EventRecord> events,
                               std::span<const EnsembleRecord> ensembles, int sensors,
                               long raw_bytes_per_window, const energy::CostTable& costs,
                               const energy::Durations& durations = {}) {
  Metrics m;
  m.sensors = sensors;
  m.per_sensor_delivered.assign(sensors, 0);
  m.per_sensor_correct.assign(sensors, 0);
  long max_window = -1;
  for (const auto& e : events) {
    max_window = std::max(max_window, e.window);
    ++m.decisions;
    if (e.memo_hit) ++m.memo_hits;
    m.bytes_sent += e.bytes;
    switch (e.status) {
      case 'o': {
        const int si = static_cast<int>(e.strategy);
        ++m.delivered_by_strategy[si];
        ++m.delivered;
        ++m.per_sensor_delivered[e.sensor];
        const bool hit = e.host_class >= 0 && e.host_class == e.label;
        if (hit) {
          ++m.correct;
          ++m.per_sensor_correct[e.sensor];
        }
        if (e.strategy == Strategy::D0) {
          ++m.d0_delivered;
          if (hit) ++m.d0_correct;
        }
        break;
      }
      case 'd':
        ++m.drops;
        break;
      case 'm':
        ++m.misses;
        ++m.missed_by_strategy[static_cast<int>(e.strategy)];
        break;
      default:
        throw std::invalid_argument("compute_metrics: unknown status");
    }
  }
  m.windows = max_window + 1;
  m.raw_baseline_bytes = m.windows * sensors * raw_bytes_per_window;
  for (const auto& e : ensembles) {
    ++m.ens_windows;
    if (e.class_idx >= 0 && e.class_idx == e.label) ++m.ens_correct;
  }
  m.unreachable = costs.unreachable(durations);
  return m;
}

// Deterministic text rendering of the metrics, one key=value per line.
inline std::string metrics_text(const Metrics& m) {
  std::ostringstream out;
  out << "windows=" << m.windows << "\n";
  out << "sensors=" << m.sensors << "\n";
  out << "decisions=" << m.decisions << "\n";
  for (int s = 0; s < kStrategyCount; ++s)
    out << "delivered_" << strategy_name(static_cast<Strategy>(s)) << "="
        << m.delivered_by_strategy[s] << "\n";
  for (int s = 0; s < kStrategyCount; ++s)
    out << "missed_" << strategy_name(static_cast<Strategy>(s)) << "=" << m.missed_by_strategy[s]
        << "\n";
  out << "drops=" << m.drops << "\n";
  out << "misses=" << m.misses << "\n";
  out << "delivered=" << m.delivered << "\n";
  out << "delivery_rate=" << detail::fmt_double(m.delivery_rate()) << "\n";
  out << "strict_accuracy=" << detail::fmt_double(m.strict_accuracy()) << "\n";
  out << "accuracy_on_delivered=" << detail::fmt_double(m.accuracy_on_delivered()) << "\n";
  out << "bytes_sent=" << m.bytes_sent << "\n";
  out << "raw_baseline_bytes=" << m.raw_baseline_bytes << "\n";
  out << "bytes_ratio=" << detail::fmt_double(m.bytes_ratio()) << "\n";
  out << "memo_hits=" << m.memo_hits << "\n";
  out << "memo_precision=" << detail::fmt_double(m.memo_precision()) << "\n";
  out << "ensemble_windows=" << m.ens_windows << "\n";
  out << "ensemble_strict_accuracy=" << detail::fmt_double(m.ensemble_strict_accuracy()) << "\n";
  out << "ensemble_accuracy_on_completed="
      << detail::fmt_double(m.ensemble_accuracy_on_completed()) << "\n";
  for (int s = 0; s < m.sensors; ++s) {
    out << "sensor" << s << "_delivery_rate=" << detail::fmt_double(m.per_sensor_delivery_rate(s))
        << "\n";
    out << "sensor" << s
        << "_accuracy_on_delivered=" << detail::fmt_double(m.per_sensor_accuracy_on_delivered(s))
        << "\n";
  }
  out << "unreachable=";
  for (std::size_t i = 0; i < m.unreachable.size(); ++i)
    out << (i ? "," : "") << strategy_name(m.unreachable[i]);
  out << "\n";
  return out.str();
}

// Runs the full store-and-execute loop: one stride of ticks per window group,
// every sensor harvesting from its own trace, deciding at the stride boundary
// and spreading the chosen strategy's cost over its duration. Delivered
// frames go through host processing; per-window reports fuse into an
// ensemble vote. Fully deterministic for a given (bundle, windows, traces,
// params).
inline SimResult run_simulation(const bundle::Bundle& models,
                                std::span<const SampleWindow> windows,
                                std::span<const ingest::WindowGroup> groups,
                                std::span<const energy::HarvestTrace> traces,
                                const SimParams& params) {
  const int sensors = models.num_sensors;
  if (static_cast<int>(traces.size()) != sensors)
    throw std::invalid_argument("run_simulation: one trace per sensor required");
  const int stride = models.stride;
  const long total_ticks = static_cast<long>(groups.size()) * stride;
  for (const auto& t : traces)
    if (static_cast<long>(t.income.size()) < total_ticks)
      throw std::invalid_argument("run_simulation: trace shorter than the replay");

  node::NodeContext ctx;
  ctx.models = &models;
  ctx.costs = params.costs;
  ctx.durations = params.durations;
  ctx.wire.window_points = models.window_length;
  ctx.wire.channels = models.channels;
  ctx.wire.raw_physical = params.raw_physical;
  ctx.wire.count_headers = params.count_headers;
  ctx.enabled = policy_enabled(params.policy);
  ctx.byte_proportional = params.byte_proportional;
  ctx.abandon_loss = params.abandon_loss;
  ctx.node_bits = params.node_bits;

  std::vector<node::NodeState> states(sensors);
  for (int s = 0; s < sensors; ++s) {
    states[s].sensor_id = s;
    states[s].energy.init(params.initial_energy, params.capacity, params.predictor_window);
  }

  SimResult result;
  std::ostringstream log;
  log << "# seeker-events 1\n";
  log << "# policy=" << policy_name(params.policy) << " seed=" << params.seed
      << " sensors=" << sensors << " stride=" << stride << " node_bits=" << params.node_bits
      << "\n";
  log << "# capacity=" << detail::fmt_double(params.capacity)
      << " initial=" << detail::fmt_double(params.initial_energy)
      << " predictor=" << params.predictor_window
      << " abandon_loss=" << detail::fmt_double(params.abandon_loss)
      << " byte_prop=" << (params.byte_proportional ? 1 : 0)
      << " count_headers=" << (params.count_headers ? 1 : 0)
      << " raw_bytes=" << codec::payload_size(codec::FrameType::Raw, 0, ctx.wire)
      << " dp_points=" << models.dp_points << "\n";
  log << "# enabled=";
  {
    bool first = true;
    for (int s = 0; s < kStrategyCount; ++s)
      if (ctx.enabled[s]) {
        log << (first ? "" : ",") << strategy_name(static_cast<Strategy>(s));
        first = false;
      }
  }
  log << "\n# costs=";
  for (int s = 0; s < kStrategyCount; ++s) {
    const auto& c = params.costs.costs[s];
    log << (s ? "," : "") << detail::fmt_double(c.sensor_eu) << ":"
        << detail::fmt_double(c.comm_eu);
  }
  log << "\n# durations=";
  for (int s = 0; s < kStrategyCount; ++s) log << (s ? "," : "") << params.durations.ticks[s];
  log << "\n# weights=";
  for (int s = 0; s < sensors; ++s)
    log << (s ? "," : "") << detail::fmt_double(models.ensemble_weights[s]);
  log << "\n# columns: W window tick sensor strategy status memo k stored mean spent bytes class"
         " conf label\n";

  const long raw_volume =
      codec::frame_volume(codec::kHeaderBytes + codec::payload_size(codec::FrameType::Raw, 0, ctx.wire),
                          ctx.wire);

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const long t0 = static_cast<long>(g) * stride;
    const long deadline = t0 + stride;
    std::vector<classify::SensorReport> reports;
    for (int s = 0; s < sensors; ++s) {
      auto& st = states[s];
      st.energy.harvest(traces[s].income[t0]);
      const auto& w = windows[groups[g].window_idx[s]];

      const auto decision = node::decide(st, w, ctx);
      const std::uint64_t unit = static_cast<std::uint64_t>(g) * sensors + s;
      const auto exec = node::execute(st, w, decision, ctx, traces[s], t0, deadline,
                                      mix_seed(params.seed, unit * 2 + 1));
      for (long t = exec.end_tick + 1; t < deadline; ++t) st.energy.harvest(traces[s].income[t]);

      EventRecord ev;
      ev.window = static_cast<long>(g);
      ev.tick = t0;
      ev.sensor = s;
      ev.strategy = decision.strategy;
      ev.status = decision.strategy == Strategy::Drop ? 'd' : (exec.delivered ? 'o' : 'm');
      ev.memo_hit = decision.memo_hit;
      ev.k = decision.k;
      ev.stored = decision.stored;
      ev.mean_income = decision.mean_income;
      ev.spent = exec.spent;
      ev.label = w.label.value_or(-1);

      if (exec.delivered) {
        ev.bytes = codec::frame_volume(exec.frame.size(), ctx.wire);
        const auto report = node::host_process(exec.frame, models, ctx.wire,
                                               mix_seed(params.seed, unit * 2), &w);
        ev.host_class = report.class_idx;
        ev.confidence = report.confidence;
        reports.push_back({s, report.class_idx, report.confidence, report.provenance});
      }

      log << "W " << ev.window << " " << ev.tick << " " << ev.sensor << " "
          << strategy_name(ev.strategy) << " " << detail::status_name(ev.status) << " "
          << (ev.memo_hit ? 1 : 0) << " " << ev.k << " " << detail::fmt_double(ev.stored) << " "
          << detail::fmt_double(ev.mean_income) << " " << detail::fmt_double(ev.spent) << " "
          << ev.bytes << " " << ev.host_class << " " << detail::fmt_double(ev.confidence) << " "
          << ev.label << "\n";
      result.events.push_back(std::move(ev));
    }

    if (!reports.empty()) {
      EnsembleRecord er;
      er.window = static_cast<long>(g);
      er.tick = deadline - 1;
      er.class_idx = classify::ensemble(reports, models.ensemble_weights);
      er.label = groups[g].label;
      er.reports = static_cast<int>(reports.size());
      log << "E " << er.window << " " << er.tick << " " << er.class_idx << " " << er.label << " "
          << er.reports << "\n";
      result.ensembles.push_back(er);
    }
  }

  result.metrics = compute_metrics(result.events, result.ensembles, sensors, raw_volume,
                                   params.costs, params.durations);
  result.log_text = log.str();
  return result;
}

// --- event log parsing -------------------------------------------------------------

struct ParsedLog {
  std::map<std::string, std::string> header;
  energy::CostTable costs;
  energy::Durations durations;
  std::array<bool, kStrategyCount> enabled{};
  bool byte_proportional = false;
  int dp_points = coreset::kDefaultDpPoints;
  int sensors = 0;
  long raw_bytes = 0;
  std::vector<double> weights;
  std::vector<EventRecord> events;
  std::vector<EnsembleRecord> ensembles;
};

inline ParsedLog parse_event_log(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ParsedLog out;
  bool saw_magic = false;

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# seeker-events", 0) == 0) {
      saw_magic = true;
      continue;
    }
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string tok;
      while (ls >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) out.header[tok.substr(0, eq)] = tok.substr(eq + 1);
      }
      continue;
    }
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "W") {
      EventRecord e;
      std::string strat, status;
      int memo = 0;
      ls >> e.window >> e.tick >> e.sensor >> strat >> status >> memo >> e.k >> e.stored >>
          e.mean_income >> e.spent >> e.bytes >> e.host_class >> e.confidence >> e.label;
      if (!ls) throw std::invalid_argument("event log: malformed W line: " + line);
      e.strategy = strategy_from_name(strat);
      e.status = detail::status_from_name(status);
      e.memo_hit = memo != 0;
      out.events.push_back(e);
    } else if (tag == "E") {
      EnsembleRecord e;
      ls >> e.window >> e.tick >> e.class_idx >> e.label >> e.reports;
      if (!ls) throw std::invalid_argument("event log: malformed E line: " + line);
      out.ensembles.push_back(e);
    } else {
      throw std::invalid_argument("event log: unknown line tag '" + tag + "'");
    }
  }
  if (!saw_magic) throw std::invalid_argument("event log: missing magic line");

  const auto need = [&](const std::string& key) {
    const auto it = out.header.find(key);
    if (it == out.header.end())
      throw std::invalid_argument("event log: missing header key " + key);
    return it->second;
  };

  out.sensors = std::stoi(need("sensors"));
  out.raw_bytes = std::stol(need("raw_bytes"));
  out.byte_proportional = need("byte_prop") == "1";
  out.dp_points = std::stoi(need("dp_points"));
  {
    std::istringstream cs(need("costs"));
    std::string tok;
    int idx = 0;
    while (std::getline(cs, tok, ',') && idx < kStrategyCount) {
      const auto colon = tok.find(':');
      out.costs.costs[idx].sensor_eu = std::stod(tok.substr(0, colon));
      out.costs.costs[idx].comm_eu = std::stod(tok.substr(colon + 1));
      ++idx;
    }
    if (idx != kStrategyCount) throw std::invalid_argument("event log: bad costs header");
  }
  {
    std::istringstream ds(need("durations"));
    std::string tok;
    int idx = 0;
    while (std::getline(ds, tok, ',') && idx < kStrategyCount)
      out.durations.ticks[idx++] = std::stoi(tok);
    if (idx != kStrategyCount) throw std::invalid_argument("event log: bad durations header");
  }
  {
    std::istringstream es(need("enabled"));
    std::string tok;
    while (std::getline(es, tok, ','))
      out.enabled[static_cast<int>(strategy_from_name(tok))] = true;
  }
  {
    std::istringstream ws(need("weights"));
    std::string tok;
    while (std::getline(ws, tok, ',')) out.weights.push_back(std::stod(tok));
  }
  return out;
}

// Replays the decision rule over a parsed log and reports every event where
// some higher-priority eligible strategy would have been affordable with the
// logged charge and income estimate. An empty result certifies priority
// soundness of the run.
inline std::vector<std::string> priority_violations(const ParsedLog& log) {
  std::vector<std::string> out;
  for (const auto& e : log.events) {
    const int chosen_rank =
        e.strategy == Strategy::Drop ? kStrategyCount : static_cast<int>(e.strategy);
    for (int rank = 0; rank < chosen_rank; ++rank) {
      const auto s = static_cast<Strategy>(rank);
      if (!log.enabled[rank]) continue;
      if (s == Strategy::D0 && !e.memo_hit) continue;
      const double cost =
          node::strategy_cost_raw(log.costs, log.byte_proportional, log.dp_points, s, e.k);
      const double predicted = e.mean_income * log.durations.at(s);
      if (e.stored + predicted >= cost) {
        out.push_back("window " + std::to_string(e.window) + " sensor " +
                      std::to_string(e.sensor) + ": chose " + strategy_name(e.strategy) +
                      " but " + strategy_name(s) + " was affordable");
        break;
      }
    }
  }
  return out;
}

// Convenience origin-policy run: same inputs, D1-or-drop decision rule.
inline SimResult origin_baseline(const bundle::Bundle& models,
                                 std::span<const SampleWindow> windows,
                                 std::span<const ingest::WindowGroup> groups,
                                 std::span<const energy::HarvestTrace> traces, SimParams params) {
  params.policy = PolicyKind::Origin;
  return run_simulation(models, windows, groups, traces, params);
}

}  // namespace seeker::sim
