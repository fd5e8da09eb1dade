#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "seeker/bundle.hpp"
#include "seeker/classify.hpp"
#include "seeker/codec.hpp"
#include "seeker/coreset.hpp"
#include "seeker/energy.hpp"
#include "seeker/memo.hpp"
#include "seeker/strategy.hpp"
#include "seeker/window.hpp"

namespace seeker::node {

// Reference payload sizes for byte-proportional radio cost scaling: the comm
// budget in the cost table is anchored at a 12-cluster recoverable coreset
// (42 bytes) and a 20-point coreset (40 bytes).
inline constexpr int kRefRecBytes = 42;
inline constexpr int kRefDpBytes = 40;

// Immutable per-run context shared by every node.
struct NodeContext {
  const bundle::Bundle* models = nullptr;
  energy::CostTable costs = energy::CostTable::defaults();
  energy::Durations durations{};
  codec::WireConfig wire{};
  std::array<bool, kStrategyCount> enabled{true, true, true, true, true};
  bool byte_proportional = false;  // scale D3/D4 comm cost with payload size
  double abandon_loss = 1.0;
  int node_bits = 16;  // fixed-point width for on-node inference (16 or 12)

  const classify::FixedModel& node_model() const {
    return node_bits == 12 ? models->fixed12 : models->fixed16;
  }
};

// Per-sensor mutable state across the run.
struct NodeState {
  int sensor_id = 0;
  energy::EnergyState energy;
  std::optional<int> last_class;  // most recent class this node itself resolved
  std::uint16_t seq_counter = 0;
  SaturationCounters quant_sat;
  classify::FixedStats fixed_stats;
};

struct Decision {
  Strategy strategy = Strategy::Drop;
  bool memo_hit = false;
  std::optional<std::pair<int, double>> memo;  // class, correlation
  int k = coreset::kDefaultClusterCount;       // D3 cluster count at this decision point
  double stored = 0.0;                         // capacitor charge at decision time
  double mean_income = 0.0;                    // predictor's per-tick estimate
  double total_cost = 0.0;                     // cost of the chosen strategy
};

// Energy price of strategy `s` at a decision point. Under byte-proportional
// accounting the radio share of D3/D4 scales with the actual payload size
// relative to the reference coreset. Free of NodeContext so the log replay
// can reproduce costs exactly.
inline double strategy_cost_raw(const energy::CostTable& costs, bool byte_proportional,
                                int dp_points, Strategy s, int k) {
  const auto& c = costs.at(s);
  if (!byte_proportional) return c.total();
  if (s == Strategy::D3) {
    const int bytes = codec::payload_size(codec::FrameType::CoresetRec, k);
    return c.sensor_eu + c.comm_eu * bytes / kRefRecBytes;
  }
  if (s == Strategy::D4) {
    const int bytes = codec::payload_size(codec::FrameType::CoresetDp, dp_points);
    return c.sensor_eu + c.comm_eu * bytes / kRefDpBytes;
  }
  return c.total();
}

inline double strategy_cost(const NodeContext& ctx, Strategy s, int k) {
  return strategy_cost_raw(ctx.costs, ctx.byte_proportional, ctx.models->dp_points, s, k);
}

// Picks the highest-priority strategy that is both eligible and affordable.
// D0 is eligible only on a memo hit; everything else is always eligible.
// Affordability is charge + (per-tick income estimate * strategy duration).
inline Decision decide(const NodeState& state, const SampleWindow& w, const NodeContext& ctx) {
  Decision d;
  d.stored = state.energy.stored;
  d.mean_income = energy::predict_income(state.energy, 1);
  d.memo = memo::match_template(ctx.models->templates[state.sensor_id], w,
                                ctx.models->memo_threshold);
  d.memo_hit = d.memo.has_value();
  d.k = coreset::select_cluster_count(ctx.models->lut, state.last_class);

  for (Strategy s : kStrategiesByPriority) {
    if (!ctx.enabled[static_cast<int>(s)]) continue;
    if (s == Strategy::D0 && !d.memo_hit) continue;
    const double cost = strategy_cost(ctx, s, d.k);
    const double predicted = d.mean_income * ctx.durations.at(s);
    if (energy::can_afford(state.energy, predicted, cost)) {
      d.strategy = s;
      d.total_cost = cost;
      return d;
    }
  }
  return d;  // Drop
}

struct ExecOutcome {
  bool delivered = false;
  bool deadline_missed = false;
  double spent = 0.0;
  long end_tick = 0;
  std::vector<std::uint8_t> frame;  // empty unless delivered
  std::optional<std::pair<int, double>> node_result;  // class+conf the node itself computed
};

// Runs the chosen strategy across ticks. Sensing+compute+radio energy drains
// uniformly over the strategy's duration; missing the stride deadline
// abandons the attempt (losing the configured fraction of what was drawn) and
// delivers nothing.
inline ExecOutcome execute(NodeState& state, const SampleWindow& w, const Decision& d,
                           const NodeContext& ctx, const energy::HarvestTrace& trace,
                           long start_tick, long deadline_tick, std::uint64_t seed) {
  ExecOutcome out;
  out.end_tick = start_tick;
  if (d.strategy == Strategy::Drop) return out;

  const auto consumed =
      energy::consume(state.energy, trace, start_tick, ctx.durations.at(d.strategy),
                      deadline_tick, d.total_cost, ctx.abandon_loss);
  out.spent = consumed.spent - consumed.refunded;
  out.end_tick = consumed.end_tick;
  if (!consumed.completed) {
    out.deadline_missed = true;
    return out;
  }

  std::vector<std::uint8_t> payload;
  codec::FrameType type = codec::FrameType::Result;
  switch (d.strategy) {
    case Strategy::D0: {
      const int cls = d.memo->first;
      const double conf = std::min(1.0, std::max(0.0, d.memo->second));
      type = codec::FrameType::Result;
      payload = codec::encode_result(
          {static_cast<std::uint8_t>(cls), static_cast<std::uint8_t>(std::lround(conf * 255.0))});
      out.node_result = {cls, conf};
      state.last_class = cls;
      break;
    }
    case Strategy::D1: {
      type = codec::FrameType::Raw;
      payload = codec::encode_raw_payload(w, ctx.wire);
      break;
    }
    case Strategy::D2: {
      const auto features = classify::extract_features(w);
      const auto [cls, conf] = classify::infer_fixed(ctx.node_model(), features, &state.fixed_stats);
      type = codec::FrameType::Result;
      payload = codec::encode_result(
          {static_cast<std::uint8_t>(cls), static_cast<std::uint8_t>(std::lround(conf * 255.0))});
      out.node_result = {cls, conf};
      state.last_class = cls;
      break;
    }
    case Strategy::D3: {
      type = codec::FrameType::CoresetRec;
      const auto rec = coreset::recoverable_coreset(w, d.k, ctx.models->quant, &state.quant_sat);
      payload = codec::encode_rec_payload(rec);
      break;
    }
    case Strategy::D4: {
      type = codec::FrameType::CoresetDp;
      const auto dp = coreset::dp_sample(w, ctx.models->dp_points, seed, ctx.models->quant,
                                         &state.quant_sat);
      payload = codec::encode_dp_payload(dp);
      break;
    }
    case Strategy::Drop:
      return out;  // unreachable
  }

  const std::uint16_t seq = codec::pack_sequence(
      state.seq_counter, static_cast<std::uint8_t>(d.strategy));
  state.seq_counter = static_cast<std::uint16_t>((state.seq_counter + 1) & codec::kSeqCounterMask);
  out.frame = codec::encode_frame(type, static_cast<std::uint8_t>(state.sensor_id), seq, payload,
                                  ctx.wire);
  out.delivered = true;
  return out;
}

// What the host concluded from one frame.
struct HostReport {
  int sensor_id = 0;
  int class_idx = 0;
  double confidence = 0.0;
  Strategy provenance = Strategy::D2;
  long payload_bytes = 0;
};

// Host-side counters for odd-but-tolerated conditions.
struct HostCounters {
  long degenerate_reconstructions = 0;  // too few points to feature-ize
};

// Decodes one frame and turns it into a class report. Raw frames under unit
// accounting cannot carry the full window, so the simulator passes the
// original window alongside; a real deployment would decode it from the
// physical payload.
inline HostReport host_process(std::span<const std::uint8_t> frame_bytes,
                               const bundle::Bundle& models, const codec::WireConfig& wire,
                               std::uint64_t reconstruct_seed,
                               const SampleWindow* raw_window = nullptr,
                               HostCounters* counters = nullptr) {
  const auto frame = codec::decode_frame(frame_bytes, wire);
  HostReport report;
  report.sensor_id = frame.header.sensor_id;
  report.payload_bytes = static_cast<long>(frame.payload.size());
  const std::uint8_t prov = codec::sequence_provenance(frame.header.sequence);
  if (prov >= kStrategyCount)
    throw codec::DecodeError(codec::DecodeError::Kind::LengthMismatch,
                             "host_process: provenance bits name no strategy");
  report.provenance = static_cast<Strategy>(prov);

  switch (frame.header.type) {
    case codec::FrameType::Result: {
      const auto r = codec::parse_result(frame);
      report.class_idx = r.class_id;
      report.confidence = r.confidence / 255.0;
      break;
    }
    case codec::FrameType::Raw: {
      SampleWindow decoded;
      const SampleWindow* w = raw_window;
      if (wire.raw_physical) {
        decoded = codec::parse_raw_window(frame, wire);
        w = &decoded;
      }
      if (!w) throw std::invalid_argument("host_process: raw frame needs the source window");
      const auto features = classify::extract_features(*w);
      const auto [cls, conf] = classify::infer(models.float_model, features);
      report.class_idx = cls;
      report.confidence = conf;
      break;
    }
    case codec::FrameType::CoresetRec: {
      const auto rec = codec::parse_rec_payload(frame);
      const auto rebuilt = coreset::reconstruct(rec, models.quant, reconstruct_seed);
      if (rebuilt.rows >= 2) {
        const auto features = classify::extract_features(rebuilt);
        const auto [cls, conf] = classify::infer(models.float_model, features);
        report.class_idx = cls;
        report.confidence = conf;
      } else {
        // Single-point reconstruction cannot be feature-ized; fall back to the
        // compressed-domain model.
        if (counters) ++counters->degenerate_reconstructions;
        const auto vec = classify::canonical_coreset_vector(rec.clusters, models.quant,
                                                            models.candidate_ks.back());
        const auto* km = models.km_model_for(static_cast<int>(rec.clusters.size()));
        if (!km) throw std::invalid_argument("host_process: no compressed-domain model");
        const auto [cls, conf] = classify::infer(*km, vec);
        report.class_idx = cls;
        report.confidence = conf;
      }
      break;
    }
    case codec::FrameType::CoresetKm: {
      const auto cs = codec::parse_km_payload(frame);
      const auto vec = classify::canonical_coreset_vector(cs.clusters, models.quant,
                                                          models.candidate_ks.back());
      const auto* km = models.km_model_for(static_cast<int>(cs.clusters.size()));
      if (!km) throw std::invalid_argument("host_process: no compressed-domain model");
      const auto [cls, conf] = classify::infer(*km, vec);
      report.class_idx = cls;
      report.confidence = conf;
      break;
    }
    case codec::FrameType::CoresetDp: {
      const auto dp = codec::parse_dp_payload(frame);
      const auto pseudo = coreset::dp_expand(dp, models.quant);
      const auto features = classify::extract_features(pseudo);
      const auto [cls, conf] = classify::infer(models.dp_model, features);
      report.class_idx = cls;
      report.confidence = conf;
      break;
    }
  }
  return report;
}

}  // namespace seeker::node
