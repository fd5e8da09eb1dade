#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "seeker/energy.hpp"
#include "seeker/ingest.hpp"
#include "seeker/sim.hpp"
#include "seeker/train.hpp"

namespace seeker::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Full run description: dataset schema, windowing, training hyperparameters,
// energy model, accounting rules, traces and simulation controls. Everything
// has a documented default except the dataset paths.
struct RunConfig {
  std::vector<std::string> dataset_paths;
  ingest::DatasetSchema schema;
  int window_length = 60;
  int overlap = 30;

  std::array<double, 3> split_ratios{0.6, 0.2, 0.2};
  std::uint64_t split_seed = 7;

  double clip_quantile = 0.001;
  double memo_threshold = memo::kDefaultThreshold;

  std::vector<int> candidate_ks{4, 6, 8, 10, 12};
  int dp_points = coreset::kDefaultDpPoints;
  double aac_tolerance = 0.02;
  std::string aac_domain = "reconstructed";

  int epochs = 200;
  int batch = 32;
  double learning_rate = 0.01;
  int hidden = 64;
  std::uint64_t train_seed = 1;
  int coreset_epochs = 120;

  double capacity = energy::kDefaultCapacity;
  double initial_energy = energy::kDefaultCapacity / 2.0;
  int predictor_window = energy::kDefaultPredictorWindow;
  energy::CostTable costs = energy::CostTable::defaults();
  energy::Durations durations{};
  double abandon_loss = 1.0;

  std::string accounting_mode = "table";  // or "byte_proportional"
  bool count_headers = false;
  std::string raw_mode = "unit";  // or "physical"
  int node_bits = 16;

  std::string default_trace = "rf:4,2,8";
  std::map<std::string, std::string> sensor_traces;  // keyed by sensor name
  std::uint64_t trace_seed = 99;

  std::uint64_t sim_seed = 42;
  std::string replay = "test";    // train | val | test | all
  std::string policy = "seeker";  // seeker | origin

  int stride() const { return window_length - overlap; }

  train::TrainConfig to_train_config() const {
    train::TrainConfig t;
    t.split_ratios = split_ratios;
    t.split_seed = split_seed;
    t.clip_quantile = clip_quantile;
    t.candidate_ks = candidate_ks;
    t.dp_points = dp_points;
    t.aac_tolerance = aac_tolerance;
    t.aac_compressed_domain = aac_domain == "compressed";
    t.memo_threshold = memo_threshold;
    t.main_opts = {epochs, batch, learning_rate, hidden, train_seed};
    t.coreset_opts = {coreset_epochs, batch, learning_rate, hidden, train_seed};
    return t;
  }

  sim::SimParams to_sim_params() const {
    sim::SimParams p;
    p.policy = policy == "origin" ? sim::PolicyKind::Origin : sim::PolicyKind::Seeker;
    p.seed = sim_seed;
    p.capacity = capacity;
    p.initial_energy = initial_energy;
    p.predictor_window = predictor_window;
    p.costs = costs;
    p.durations = durations;
    p.abandon_loss = abandon_loss;
    p.byte_proportional = accounting_mode == "byte_proportional";
    p.count_headers = count_headers;
    p.raw_physical = raw_mode == "physical";
    p.node_bits = node_bits;
    return p;
  }

  // Trace spec string for a sensor (per-sensor override or the default).
  std::string trace_for(const std::string& sensor_name) const {
    const auto it = sensor_traces.find(sensor_name);
    return it != sensor_traces.end() ? it->second : default_trace;
  }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("config: unknown key '" + path + "." + key + "'");
  }
}

template <typename T>
inline T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline RunConfig parse(const std::string& text) {
  using detail::check_keys;
  using detail::get_or;
  using nlohmann::json;

  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(root, "$",
             {"dataset", "windowing", "split", "quant", "memo", "coreset", "train", "energy",
              "accounting", "traces", "sim"});

  RunConfig cfg;

  if (root.contains("dataset")) {
    const auto& d = root["dataset"];
    check_keys(d, "dataset",
               {"paths", "delimiter", "label_column", "null_label", "sample_rate_hz", "sensors"});
    cfg.dataset_paths = get_or(d, "paths", std::vector<std::string>{});
    const std::string delim = get_or(d, "delimiter", std::string("whitespace"));
    if (delim == "whitespace")
      cfg.schema.delimiter = ' ';
    else if (delim.size() == 1)
      cfg.schema.delimiter = delim[0];
    else
      throw ConfigError("config: dataset.delimiter must be 'whitespace' or one character");
    cfg.schema.label_column = get_or(d, "label_column", 23);
    cfg.schema.null_label = get_or(d, "null_label", 0);
    cfg.schema.sample_rate_hz = get_or(d, "sample_rate_hz", 50.0);
    if (d.contains("sensors")) {
      cfg.schema.sensors.clear();
      for (const auto& s : d.at("sensors")) {
        check_keys(s, "dataset.sensors[]", {"name", "columns"});
        ingest::SensorSpec spec;
        spec.name = get_or(s, "name", std::string("sensor"));
        spec.columns = get_or(s, "columns", std::vector<int>{});
        cfg.schema.sensors.push_back(std::move(spec));
      }
    }
  }
  if (cfg.schema.sensors.empty()) cfg.schema = ingest::default_body_schema();

  if (root.contains("windowing")) {
    const auto& w = root["windowing"];
    check_keys(w, "windowing", {"length", "overlap"});
    cfg.window_length = get_or(w, "length", 60);
    cfg.overlap = get_or(w, "overlap", 30);
    if (cfg.window_length < 2 || cfg.overlap < 0 || cfg.overlap >= cfg.window_length)
      throw ConfigError("config: windowing needs length >= 2 and 0 <= overlap < length");
  }

  if (root.contains("split")) {
    const auto& s = root["split"];
    check_keys(s, "split", {"ratios", "seed"});
    const auto ratios = get_or(s, "ratios", std::vector<double>{0.6, 0.2, 0.2});
    if (ratios.size() != 3) throw ConfigError("config: split.ratios must have 3 entries");
    cfg.split_ratios = {ratios[0], ratios[1], ratios[2]};
    cfg.split_seed = get_or(s, "seed", std::uint64_t{7});
  }

  if (root.contains("quant")) {
    const auto& q = root["quant"];
    check_keys(q, "quant", {"clip_quantile"});
    cfg.clip_quantile = get_or(q, "clip_quantile", 0.001);
  }

  if (root.contains("memo")) {
    const auto& m = root["memo"];
    check_keys(m, "memo", {"threshold"});
    cfg.memo_threshold = get_or(m, "threshold", memo::kDefaultThreshold);
    if (cfg.memo_threshold < -1.0 || cfg.memo_threshold > 1.0)
      throw ConfigError("config: memo.threshold must lie in [-1, 1]");
  }

  if (root.contains("coreset")) {
    const auto& c = root["coreset"];
    check_keys(c, "coreset", {"candidate_ks", "dp_points", "aac_tolerance", "aac_domain"});
    cfg.candidate_ks = get_or(c, "candidate_ks", std::vector<int>{4, 6, 8, 10, 12});
    if (cfg.candidate_ks.empty() ||
        !std::is_sorted(cfg.candidate_ks.begin(), cfg.candidate_ks.end()) ||
        cfg.candidate_ks.front() < 1 || cfg.candidate_ks.back() > coreset::kMaxWireClusters)
      throw ConfigError("config: coreset.candidate_ks must ascend within [1, 15]");
    cfg.dp_points = get_or(c, "dp_points", coreset::kDefaultDpPoints);
    if (cfg.dp_points < 1) throw ConfigError("config: coreset.dp_points must be positive");
    cfg.aac_tolerance = get_or(c, "aac_tolerance", 0.02);
    cfg.aac_domain = get_or(c, "aac_domain", std::string("reconstructed"));
    if (cfg.aac_domain != "reconstructed" && cfg.aac_domain != "compressed")
      throw ConfigError("config: coreset.aac_domain must be reconstructed|compressed");
  }

  if (root.contains("train")) {
    const auto& t = root["train"];
    check_keys(t, "train",
               {"epochs", "batch", "learning_rate", "hidden", "seed", "coreset_epochs"});
    cfg.epochs = get_or(t, "epochs", 200);
    cfg.batch = get_or(t, "batch", 32);
    cfg.learning_rate = get_or(t, "learning_rate", 0.01);
    cfg.hidden = get_or(t, "hidden", 64);
    cfg.train_seed = get_or(t, "seed", std::uint64_t{1});
    cfg.coreset_epochs = get_or(t, "coreset_epochs", 120);
    if (cfg.epochs < 1 || cfg.batch < 1 || cfg.learning_rate <= 0.0 || cfg.hidden < 1 ||
        cfg.coreset_epochs < 1)
      throw ConfigError("config: train hyperparameters out of range");
  }

  if (root.contains("energy")) {
    const auto& e = root["energy"];
    check_keys(e, "energy",
               {"capacity", "initial", "predictor_window", "abandon_loss", "durations", "costs"});
    cfg.capacity = get_or(e, "capacity", energy::kDefaultCapacity);
    cfg.initial_energy = get_or(e, "initial", energy::kDefaultCapacity / 2.0);
    cfg.predictor_window = get_or(e, "predictor_window", energy::kDefaultPredictorWindow);
    cfg.abandon_loss = get_or(e, "abandon_loss", 1.0);
    if (cfg.capacity <= 0.0 || cfg.initial_energy < 0.0 || cfg.predictor_window < 1 ||
        cfg.abandon_loss < 0.0 || cfg.abandon_loss > 1.0)
      throw ConfigError("config: energy parameters out of range");
    if (e.contains("durations")) {
      const auto d = e.at("durations").get<std::vector<int>>();
      if (d.size() != kStrategyCount) throw ConfigError("config: energy.durations needs 5 entries");
      for (int i = 0; i < kStrategyCount; ++i) {
        if (d[i] < 1) throw ConfigError("config: strategy durations must be positive");
        cfg.durations.ticks[i] = d[i];
      }
    }
    if (e.contains("costs")) {
      const auto& c = e.at("costs");
      check_keys(c, "energy.costs", {"d0", "d1", "d2", "d3", "d4"});
      const char* keys[kStrategyCount] = {"d0", "d1", "d2", "d3", "d4"};
      for (int i = 0; i < kStrategyCount; ++i) {
        if (!c.contains(keys[i])) continue;
        const auto pair = c.at(keys[i]).get<std::vector<double>>();
        if (pair.size() != 2)
          throw ConfigError("config: energy.costs entries are [sensor_eu, comm_eu]");
        if (pair[0] < 0.0 || pair[1] < 0.0) throw ConfigError("config: negative cost");
        cfg.costs.costs[i] = {pair[0], pair[1]};
      }
    }
  }

  if (root.contains("accounting")) {
    const auto& a = root["accounting"];
    check_keys(a, "accounting", {"mode", "count_headers", "raw_mode", "node_bits"});
    cfg.accounting_mode = get_or(a, "mode", std::string("table"));
    if (cfg.accounting_mode != "table" && cfg.accounting_mode != "byte_proportional")
      throw ConfigError("config: accounting.mode must be table|byte_proportional");
    cfg.count_headers = get_or(a, "count_headers", false);
    cfg.raw_mode = get_or(a, "raw_mode", std::string("unit"));
    if (cfg.raw_mode != "unit" && cfg.raw_mode != "physical")
      throw ConfigError("config: accounting.raw_mode must be unit|physical");
    cfg.node_bits = get_or(a, "node_bits", 16);
    if (cfg.node_bits != 16 && cfg.node_bits != 12)
      throw ConfigError("config: accounting.node_bits must be 16 or 12");
  }

  if (root.contains("traces")) {
    const auto& t = root["traces"];
    check_keys(t, "traces", {"default", "seed", "per_sensor"});
    cfg.default_trace = get_or(t, "default", std::string("rf:4,2,8"));
    cfg.trace_seed = get_or(t, "seed", std::uint64_t{99});
    if (t.contains("per_sensor")) {
      for (const auto& [name, value] : t.at("per_sensor").items())
        cfg.sensor_traces[name] = value.get<std::string>();
    }
  }

  if (root.contains("sim")) {
    const auto& s = root["sim"];
    check_keys(s, "sim", {"seed", "replay", "policy"});
    cfg.sim_seed = get_or(s, "seed", std::uint64_t{42});
    cfg.replay = get_or(s, "replay", std::string("test"));
    if (cfg.replay != "train" && cfg.replay != "val" && cfg.replay != "test" &&
        cfg.replay != "all")
      throw ConfigError("config: sim.replay must be train|val|test|all");
    cfg.policy = get_or(s, "policy", std::string("seeker"));
    if (cfg.policy != "seeker" && cfg.policy != "origin")
      throw ConfigError("config: sim.policy must be seeker|origin");
  }

  return cfg;
}

inline RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text);
}

}  // namespace seeker::config
