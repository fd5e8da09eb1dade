#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seeker/ingest.hpp"
#include "seeker/rng.hpp"

namespace seeker::synthetic {

// Deterministic body-sensor corpus in a 24-column layout: three 3-axis
// accelerometer blocks (chest, ankle, arm) among distractor columns, with an
// activity label in the last column. Streams are built from per-class motifs
// that cycle through a small set of body postures every 30 samples — one
// windowing stride — so same-class windows are phase-aligned unless the
// class is marked jittered.
//
// Activity channels emulate a low-power accelerometer mode: readings snap to
// a coarse ADC step (`resolution`) and the white-noise sigma sits below one
// LSB, as it does for MEMS parts at reduced resolution. A limb dwelling at a
// posture then produces literally repeated samples, which is what gives real
// wearable windows their lumpy, few-distinct-readings structure.
//
// Class design, raw labels 1..6 (0 = null):
//   1  low-amplitude sway, stable phase        (memoizable)
//   2  medium gait, stable phase               (memoizable)
//   3  fast gait, stable phase                 (memoizable)
//   4  high-energy bursts, per-segment rotation (defeats memoization)
//   5  class 3's postures at skewed dwell, per-segment rotation
//   6  class 2's postures at skewed dwell, per-segment rotation
// Classes 5/6 visit exactly the posture set of 3/2 but spend a different
// number of samples at each posture, so they differ only in how densely the
// trajectory covers the same support — which is exactly what a centers+radii
// summary discards and a counts-carrying one keeps.

inline constexpr int kClasses = 6;
inline constexpr int kColumns = 24;

struct SynthConfig {
  int recordings = 3;
  int stride_units = 400;  // segments add up to this many strides per recording
  int stride = 30;
  double noise = 0.001;       // white-noise sigma, below one ADC step
  double resolution = 0.02;   // ADC step for activity channels (0 disables)
  std::uint64_t seed = 2026;
};

inline ingest::DatasetSchema schema() { return ingest::default_body_schema(); }

namespace detail {

inline constexpr int kPoses = 6;  // distinct postures per motif cycle

inline bool jittered(int cls) { return cls >= 4; }

// Classes 5 and 6 reuse the spatial anchor of 3 and 2.
inline int anchor_class(int cls) { return cls == 5 ? 3 : cls == 6 ? 2 : cls; }

inline bool dwell_skewed(int cls) { return cls == 5 || cls == 6; }

// Posture visited at sample t of the 30-sample cycle. Every table starts a
// fresh posture at each multiple of 5, so all six postures are seen at the
// sample offsets a temporally equispaced scan hits first. Classes 1-3 sweep
// in order; 4-6 hop through their postures in orders chosen to keep the
// worst-case cross-class window correlation low (so replay-by-correlation
// cannot mistake one class for another), with 5/6 dwelling unevenly
// (counts 6,3,6,3,8,4 and 8,6,6,3,4,3 versus a flat 5 each).
inline int pose_at(int cls, long t) {
  static constexpr int sweep[30] = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2,
                                    3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 5, 5, 5, 5, 5};
  static constexpr int hop4[30] = {5, 5, 3, 1, 1, 4, 4, 4, 4, 3, 1, 1, 1, 2, 2,
                                   2, 3, 3, 4, 5, 0, 0, 0, 0, 5, 3, 5, 0, 2, 2};
  static constexpr int hop5[30] = {3, 3, 3, 1, 1, 0, 0, 0, 0, 0, 4, 4, 4, 4, 4,
                                   2, 2, 2, 2, 2, 1, 5, 5, 5, 0, 5, 2, 4, 4, 4};
  static constexpr int hop6[30] = {3, 4, 4, 4, 2, 5, 0, 2, 2, 2, 4, 3, 1, 1, 1,
                                   0, 5, 5, 1, 1, 1, 2, 0, 3, 0, 2, 0, 0, 0, 0};
  const int* tab = cls == 4 ? hop4 : cls == 5 ? hop5 : cls == 6 ? hop6 : sweep;
  return tab[t % 30];
}

inline double offset_of(int cls, int sensor, int channel) {
  return anchor_class(cls) * 0.6 - 2.0 + 0.3 * sensor - 0.2 * channel;
}

inline double amplitude_of(int cls, int sensor, int channel) {
  static constexpr double base[kClasses + 1] = {0.0, 0.5, 1.0, 1.6, 2.0, 1.6, 1.0};
  static constexpr double sensor_scale[3] = {1.0, 1.2, 0.8};
  static constexpr double channel_scale[3] = {1.0, 0.8, 0.6};
  return base[anchor_class(cls)] * sensor_scale[sensor] * channel_scale[channel];
}

inline double phase_of(int cls, int sensor, int channel) {
  return 0.7 * (3 * sensor + channel) + 1.3 * cls;
}

}  // namespace detail

// Channel value for class `cls` at sample index t (before noise). `gain` and
// `shift` model bout-to-bout variability (pace, sensor mount): they move the
// whole motif affinely, so windows stay internally tight and correlation
// against a template is untouched, but the class region seen across segments
// gets fatter. The segment phase is snapped to a whole-posture rotation so
// jittered samples stay on the class's exact posture grid.
inline double signal_value(int cls, int sensor, int channel, long t, double segment_phase,
                           double gain = 1.0, double shift = 0.0) {
  if (cls == 0) return shift;
  constexpr double two_pi = 6.283185307179586476925286766559;
  const int anchor = detail::anchor_class(cls);
  const int rot =
      static_cast<int>(std::llround(segment_phase * detail::kPoses / two_pi)) % detail::kPoses;
  const int pose = (detail::pose_at(cls, t) + rot) % detail::kPoses;
  const double x =
      two_pi * pose / detail::kPoses + detail::phase_of(anchor, sensor, channel);
  return detail::offset_of(cls, sensor, channel) + shift +
         gain * detail::amplitude_of(cls, sensor, channel) * std::sin(x);
}

// Writes one recording as whitespace-separated text; returns its class
// sequence (one entry per stride) for callers that want ground truth.
inline std::vector<int> write_recording(const std::string& path, const SynthConfig& cfg,
                                        std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("synthetic: cannot open " + path);
  out << "# synthetic body-sensor recording\n";

  Rng rng(seed);
  std::vector<int> stride_classes;
  constexpr double two_pi = 6.283185307179586476925286766559;

  const auto sch = schema();
  bool is_activity[kColumns] = {};
  for (const auto& sensor : sch.sensors)
    for (int c : sensor.columns) is_activity[c] = true;

  // Segment plan: ~1/8 null, otherwise uniform over the six classes; segment
  // lengths of 3..8 strides keep several same-class windows per segment.
  char buf[32];
  while (static_cast<int>(stride_classes.size()) < cfg.stride_units) {
    const bool null_seg = rng.next_index(8) == 0;
    const int cls = null_seg ? 0 : 1 + static_cast<int>(rng.next_index(kClasses));
    const int seg_strides = 3 + static_cast<int>(rng.next_index(6));
    const double seg_phase = detail::jittered(cls) ? rng.next_double() * two_pi : 0.0;
    const double seg_gain = 1.0 + 0.12 * (2.0 * rng.next_double() - 1.0);
    const double seg_shift = 0.06 * (2.0 * rng.next_double() - 1.0);
    const long seg_begin = static_cast<long>(stride_classes.size()) * cfg.stride;
    for (int u = 0; u < seg_strides && static_cast<int>(stride_classes.size()) < cfg.stride_units;
         ++u)
      stride_classes.push_back(cls);
    const long seg_end = static_cast<long>(stride_classes.size()) * cfg.stride;

    for (long t = seg_begin; t < seg_end; ++t) {
      double row[kColumns] = {};
      for (std::size_t s = 0; s < sch.sensors.size(); ++s)
        for (std::size_t d = 0; d < sch.sensors[s].columns.size(); ++d) {
          double v = signal_value(cls, static_cast<int>(s), static_cast<int>(d), t, seg_phase,
                                  seg_gain, seg_shift) +
                     cfg.noise * rng.next_normal();
          if (cfg.resolution > 0) v = std::round(v / cfg.resolution) * cfg.resolution;
          row[sch.sensors[s].columns[d]] = v;
        }
      for (int c = 0; c < kColumns - 1; ++c)
        if (!is_activity[c])  // distractor columns: slow drift + noise
          row[c] = 0.5 * std::sin(two_pi * t / 500.0 + c) + cfg.noise * rng.next_normal();
      row[sch.label_column] = cls;
      for (int c = 0; c < kColumns; ++c) {
        std::snprintf(buf, sizeof buf, c == sch.label_column ? "%.0f" : "%.5f", row[c]);
        out << buf << (c + 1 < kColumns ? " " : "\n");
      }
    }
  }
  return stride_classes;
}

// Full corpus: one file per recording under `dir`. Deterministic for a given
// config.
inline std::vector<std::string> write_dataset(const std::string& dir, const SynthConfig& cfg) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (int r = 0; r < cfg.recordings; ++r) {
    const std::string path = dir + "/subject" + std::to_string(r + 1) + ".txt";
    write_recording(path, cfg, mix_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    paths.push_back(path);
  }
  return paths;
}

}  // namespace seeker::synthetic
