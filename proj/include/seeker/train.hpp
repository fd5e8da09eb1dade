#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seeker/bundle.hpp"
#include "seeker/classify.hpp"
#include "seeker/coreset.hpp"
#include "seeker/ingest.hpp"
#include "seeker/rng.hpp"

namespace seeker::train {

struct TrainConfig {
  std::array<double, 3> split_ratios{0.6, 0.2, 0.2};
  std::uint64_t split_seed = 7;
  double clip_quantile = 0.001;
  std::vector<int> candidate_ks{4, 6, 8, 10, 12};
  int dp_points = coreset::kDefaultDpPoints;
  double aac_tolerance = 0.02;
  bool aac_compressed_domain = false;  // default LUT accuracy lives in the reconstructed domain
  double memo_threshold = memo::kDefaultThreshold;
  classify::TrainOptions main_opts{};            // full-feature model
  classify::TrainOptions coreset_opts{120, 32, 0.01, 64, 1};  // compressed-domain models
  std::uint64_t derive_seed = 11;  // reconstruction / point-sampling streams during training
};

// Everything training produces: the persistent bundle plus the split and
// evaluation tables the caller may want to report or replay.
struct TrainedArtifacts {
  bundle::Bundle bundle;
  std::vector<SampleWindow> windows;  // label-mapped, the bundle's ground truth
  std::vector<ingest::WindowGroup> groups;
  ingest::Split split;
  std::vector<std::vector<double>> lut_accuracy;  // [candidate_k][class]
  std::vector<double> sensor_val_accuracy;        // ensemble weights before storage
  classify::TrainReport float_report;
};

namespace detail {

inline std::vector<int> window_ids_of_groups(std::span<const ingest::WindowGroup> groups,
                                             std::span<const int> group_ids) {
  std::vector<int> out;
  for (int g : group_ids)
    for (int w : groups[g].window_idx) out.push_back(w);
  return out;
}

}  // namespace detail

// Builds the full model bundle from labeled windows. Deterministic for a
// given (windows, schema, config).
inline TrainedArtifacts build(std::vector<SampleWindow> windows,
                              const ingest::DatasetSchema& schema, int window_length, int stride,
                              const TrainConfig& cfg) {
  if (windows.empty()) throw std::invalid_argument("train: no windows");
  if (cfg.candidate_ks.empty()) throw std::invalid_argument("train: no candidate cluster counts");

  TrainedArtifacts art;
  const int sensors = static_cast<int>(schema.sensors.size());

  art.bundle.window_length = window_length;
  art.bundle.stride = stride;
  art.bundle.channels = static_cast<int>(schema.sensors.front().columns.size());
  art.bundle.num_sensors = sensors;
  art.bundle.dp_points = cfg.dp_points;
  art.bundle.memo_threshold = cfg.memo_threshold;
  for (const auto& s : schema.sensors) art.bundle.sensor_names.push_back(s.name);

  art.bundle.label_map = ingest::build_label_map(windows);
  ingest::apply_label_map(windows, art.bundle.label_map);
  const int classes = art.bundle.label_map.classes();

  art.groups = ingest::group_windows(windows, sensors);
  art.split = ingest::split_groups(art.groups, cfg.split_ratios, cfg.split_seed);
  if (art.split.train.empty() || art.split.val.empty())
    throw std::invalid_argument("train: split left train or val empty");

  const auto train_ids = detail::window_ids_of_groups(art.groups, art.split.train);
  const auto val_ids = detail::window_ids_of_groups(art.groups, art.split.val);

  // Quantizer calibrated on training windows only.
  {
    std::vector<SampleWindow> calib;
    calib.reserve(train_ids.size());
    for (int id : train_ids) calib.push_back(windows[id]);
    art.bundle.quant = ingest::calibrate_quant_range(calib, cfg.clip_quantile, cfg.candidate_ks);
  }

  // Full-feature float model over all sensors' training windows.
  std::vector<std::vector<double>> train_features;
  std::vector<int> train_labels;
  train_features.reserve(train_ids.size());
  for (int id : train_ids) {
    train_features.push_back(classify::extract_features(windows[id]));
    train_labels.push_back(*windows[id].label);
  }
  art.bundle.float_model =
      classify::train_model(train_features, train_labels, classes, cfg.main_opts, &art.float_report);

  art.bundle.fixed16 = classify::quantize_model(art.bundle.float_model, 16, train_features);
  art.bundle.fixed12 = classify::quantize_model(art.bundle.float_model, 12, train_features);

  // Point-coreset model: features of dequantized pseudo-windows.
  {
    std::vector<std::vector<double>> dp_features;
    dp_features.reserve(train_ids.size());
    int i = 0;
    for (int id : train_ids) {
      const auto dp = coreset::dp_sample(windows[id], cfg.dp_points,
                                         mix_seed(cfg.derive_seed, static_cast<std::uint64_t>(i)),
                                         art.bundle.quant);
      dp_features.push_back(classify::extract_features(coreset::dp_expand(dp, art.bundle.quant)));
      ++i;
    }
    art.bundle.dp_model =
        classify::train_model(dp_features, train_labels, classes, cfg.coreset_opts);
  }

  // Compressed-domain models, one per candidate cluster count.
  art.bundle.candidate_ks = cfg.candidate_ks;
  const int pad_k = cfg.candidate_ks.back();
  for (int k : cfg.candidate_ks) {
    std::vector<std::vector<double>> vecs;
    vecs.reserve(train_ids.size());
    for (int id : train_ids) {
      const auto cs = coreset::kmeans_coreset(windows[id], k, art.bundle.quant);
      vecs.push_back(classify::canonical_coreset_vector(cs.clusters, art.bundle.quant, pad_k));
    }
    art.bundle.km_models.push_back(
        classify::train_model(vecs, train_labels, classes, cfg.coreset_opts));
  }

  // Activity-aware cluster budget: per-class accuracy on validation windows
  // at each candidate count, evaluated in the domain the host would use.
  {
    art.lut_accuracy.assign(cfg.candidate_ks.size(), std::vector<double>(classes, 0.0));
    std::vector<std::vector<long>> hits(cfg.candidate_ks.size(), std::vector<long>(classes, 0));
    std::vector<long> totals(classes, 0);
    int vi = 0;
    for (int id : val_ids) {
      const auto& w = windows[id];
      const int label = *w.label;
      ++totals[label];
      for (std::size_t ki = 0; ki < cfg.candidate_ks.size(); ++ki) {
        const int k = cfg.candidate_ks[ki];
        int predicted;
        if (cfg.aac_compressed_domain) {
          const auto cs = coreset::kmeans_coreset(w, k, art.bundle.quant);
          const auto vec = classify::canonical_coreset_vector(cs.clusters, art.bundle.quant, pad_k);
          predicted = classify::infer(art.bundle.km_models[ki], vec).first;
        } else {
          const auto rec = coreset::recoverable_coreset(w, k, art.bundle.quant);
          const auto rebuilt = coreset::reconstruct(
              rec, art.bundle.quant,
              mix_seed(cfg.derive_seed, 0x10000u + static_cast<std::uint64_t>(vi) *
                                            cfg.candidate_ks.size() + ki));
          predicted = classify::infer(art.bundle.float_model, classify::extract_features(rebuilt)).first;
        }
        if (predicted == label) ++hits[ki][label];
      }
      ++vi;
    }
    for (std::size_t ki = 0; ki < cfg.candidate_ks.size(); ++ki)
      for (int c = 0; c < classes; ++c)
        art.lut_accuracy[ki][c] = totals[c] ? static_cast<double>(hits[ki][c]) / totals[c]
                                            : std::numeric_limits<double>::quiet_NaN();
    art.bundle.lut = coreset::build_activity_lut(cfg.candidate_ks, art.lut_accuracy,
                                                 cfg.aac_tolerance);
  }

  // Memo templates per sensor, from training windows only.
  for (int s = 0; s < sensors; ++s) {
    std::vector<SampleWindow> mine;
    for (int id : train_ids)
      if (windows[id].sensor_id == s) mine.push_back(windows[id]);
    art.bundle.templates.push_back(classify::build_template_store(mine, classes));
  }

  // Ensemble weights: each sensor's float-model accuracy on its validation
  // windows (a reliability prior for the host-side vote).
  art.sensor_val_accuracy.assign(sensors, 0.0);
  {
    std::vector<long> hits(sensors, 0), totals(sensors, 0);
    for (int id : val_ids) {
      const auto& w = windows[id];
      ++totals[w.sensor_id];
      const auto [cls, conf] = classify::infer(art.bundle.float_model, classify::extract_features(w));
      if (cls == *w.label) ++hits[w.sensor_id];
    }
    for (int s = 0; s < sensors; ++s)
      art.sensor_val_accuracy[s] = totals[s] ? static_cast<double>(hits[s]) / totals[s] : 0.5;
  }
  art.bundle.ensemble_weights = art.sensor_val_accuracy;

  art.windows = std::move(windows);
  return art;
}

}  // namespace seeker::train
