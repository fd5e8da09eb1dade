#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "seeker/binio.hpp"
#include "seeker/coreset.hpp"
#include "seeker/memo.hpp"
#include "seeker/quant.hpp"
#include "seeker/rng.hpp"
#include "seeker/strategy.hpp"
#include "seeker/window.hpp"

namespace seeker::classify {

inline constexpr int kStatsPerChannel = 8;

class SingleClassInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// Quantile with linear interpolation between order statistics on a sorted
// copy (q in [0,1]).
inline double quantile(std::vector<double>& sorted_scratch, double q) {
  const std::size_t n = sorted_scratch.size();
  const double h = (static_cast<double>(n) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= n) return sorted_scratch[n - 1];
  return sorted_scratch[lo] + frac * (sorted_scratch[lo + 1] - sorted_scratch[lo]);
}

}  // namespace detail

// Eight order-free statistics per channel: mean, population std, min, max,
// RMS, median, interquartile range, and mean-crossing rate. The crossing rate
// is 2*min(#above, #below)/N (strict comparisons against the channel mean),
// which equals the fraction of adjacent sign flips in the best case and, like
// the other seven, is invariant to sample order.
inline std::vector<double> extract_features(const SampleWindow& w) {
  w.validate();
  if (w.rows < 2) throw std::invalid_argument("extract_features: need at least two rows");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(kStatsPerChannel) * w.cols);
  std::vector<double> chan(w.rows);
  for (int c = 0; c < w.cols; ++c) {
    for (int r = 0; r < w.rows; ++r) chan[r] = w.at(r, c);
    double mean = 0.0;
    for (double v : chan) mean += v;
    mean /= w.rows;
    double var = 0.0, sumsq = 0.0;
    double mn = chan[0], mx = chan[0];
    int above = 0, below = 0;
    for (double v : chan) {
      const double d = v - mean;
      var += d * d;
      sumsq += v * v;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      if (v > mean) ++above;
      if (v < mean) ++below;
    }
    var /= w.rows;
    std::vector<double> sorted = chan;
    std::sort(sorted.begin(), sorted.end());
    out.push_back(mean);
    out.push_back(std::sqrt(var));
    out.push_back(mn);
    out.push_back(mx);
    out.push_back(std::sqrt(sumsq / w.rows));
    out.push_back(detail::quantile(sorted, 0.5));
    out.push_back(detail::quantile(sorted, 0.75) - detail::quantile(sorted, 0.25));
    out.push_back(2.0 * std::min(above, below) / static_cast<double>(w.rows));
  }
  return out;
}

// --- float model ---------------------------------------------------------------

// Single-hidden-layer MLP with z-scored inputs. Weight layout is row-major:
// w1[h*input+i], w2[c*hidden+h].
struct Model {
  int input_dim = 0;
  int hidden_dim = 0;
  int classes = 0;
  std::vector<double> mu, sigma;  // per-input normalization
  std::vector<double> w1, b1, w2, b2;
};

struct TrainOptions {
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 0.01;
  int hidden_dim = 64;
  std::uint64_t seed = 1;
};

struct TrainReport {
  double final_loss = 0.0;
  double train_accuracy = 0.0;
};

namespace detail {

inline void softmax_inplace(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

inline std::vector<double> forward(const Model& m, std::span<const double> x,
                                   std::vector<double>* hidden_out = nullptr) {
  std::vector<double> h(m.hidden_dim);
  for (int j = 0; j < m.hidden_dim; ++j) {
    double a = m.b1[j];
    const double* row = &m.w1[static_cast<std::size_t>(j) * m.input_dim];
    for (int i = 0; i < m.input_dim; ++i) a += row[i] * (x[i] - m.mu[i]) / m.sigma[i];
    h[j] = a > 0.0 ? a : 0.0;
  }
  std::vector<double> logits(m.classes);
  for (int c = 0; c < m.classes; ++c) {
    double a = m.b2[c];
    const double* row = &m.w2[static_cast<std::size_t>(c) * m.hidden_dim];
    for (int j = 0; j < m.hidden_dim; ++j) a += row[j] * h[j];
    logits[c] = a;
  }
  if (hidden_out) *hidden_out = std::move(h);
  return logits;
}

inline int argmax_low(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace detail

// Mini-batch SGD over softmax cross-entropy. Deterministic given the seed:
// Xavier-uniform init and per-epoch Fisher-Yates shuffles both draw from the
// same counter-free stream.
inline Model train_model(const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, int classes,
                         const TrainOptions& opt = {}, TrainReport* report = nullptr) {
  if (features.empty()) throw std::invalid_argument("train_model: empty training set");
  if (features.size() != labels.size())
    throw std::invalid_argument("train_model: features/labels size mismatch");
  if (classes < 2) throw SingleClassInput("train_model: need at least two classes");
  {
    std::vector<char> seen(classes, 0);
    int distinct = 0;
    for (int l : labels) {
      if (l < 0 || l >= classes) throw std::invalid_argument("train_model: label out of range");
      if (!seen[l]) {
        seen[l] = 1;
        ++distinct;
      }
    }
    if (distinct < 2)
      throw SingleClassInput("train_model: training labels collapse to a single class");
  }

  const int n = static_cast<int>(features.size());
  const int in_dim = static_cast<int>(features.front().size());
  for (const auto& f : features)
    if (static_cast<int>(f.size()) != in_dim)
      throw std::invalid_argument("train_model: ragged feature matrix");

  Model m;
  m.input_dim = in_dim;
  m.hidden_dim = opt.hidden_dim;
  m.classes = classes;
  m.mu.assign(in_dim, 0.0);
  m.sigma.assign(in_dim, 0.0);
  for (const auto& f : features)
    for (int i = 0; i < in_dim; ++i) m.mu[i] += f[i];
  for (double& v : m.mu) v /= n;
  for (const auto& f : features)
    for (int i = 0; i < in_dim; ++i) {
      const double d = f[i] - m.mu[i];
      m.sigma[i] += d * d;
    }
  for (double& v : m.sigma) {
    v = std::sqrt(v / n);
    if (v < 1e-12) v = 1.0;  // constant feature: pass through
  }

  Rng rng(opt.seed);
  const auto xavier = [&rng](std::vector<double>& w, int fan_in, int fan_out) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : w) v = (2.0 * rng.next_double() - 1.0) * a;
  };
  m.w1.resize(static_cast<std::size_t>(m.hidden_dim) * in_dim);
  m.b1.assign(m.hidden_dim, 0.0);
  m.w2.resize(static_cast<std::size_t>(classes) * m.hidden_dim);
  m.b2.assign(classes, 0.0);
  xavier(m.w1, in_dim, m.hidden_dim);
  xavier(m.w2, m.hidden_dim, classes);

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::vector<double> gw1(m.w1.size()), gb1(m.b1.size()), gw2(m.w2.size()), gb2(m.b2.size());
  std::vector<double> xn(in_dim), h(m.hidden_dim), p(classes);
  double last_loss = 0.0;

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng.next_index(static_cast<std::uint64_t>(i) + 1)]);
    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += opt.batch_size) {
      const int end = std::min(start + opt.batch_size, n);
      const int bs = end - start;
      std::fill(gw1.begin(), gw1.end(), 0.0);
      std::fill(gb1.begin(), gb1.end(), 0.0);
      std::fill(gw2.begin(), gw2.end(), 0.0);
      std::fill(gb2.begin(), gb2.end(), 0.0);
      for (int bi = start; bi < end; ++bi) {
        const auto& x = features[order[bi]];
        const int y = labels[order[bi]];
        for (int i = 0; i < in_dim; ++i) xn[i] = (x[i] - m.mu[i]) / m.sigma[i];
        for (int j = 0; j < m.hidden_dim; ++j) {
          double a = m.b1[j];
          const double* row = &m.w1[static_cast<std::size_t>(j) * in_dim];
          for (int i = 0; i < in_dim; ++i) a += row[i] * xn[i];
          h[j] = a > 0.0 ? a : 0.0;
        }
        for (int c = 0; c < classes; ++c) {
          double a = m.b2[c];
          const double* row = &m.w2[static_cast<std::size_t>(c) * m.hidden_dim];
          for (int j = 0; j < m.hidden_dim; ++j) a += row[j] * h[j];
          p[c] = a;
        }
        detail::softmax_inplace(p);
        epoch_loss += -std::log(std::max(p[y], 1e-300));
        // dL/dlogit = p - onehot(y)
        for (int c = 0; c < classes; ++c) {
          const double g = p[c] - (c == y ? 1.0 : 0.0);
          gb2[c] += g;
          double* row = &gw2[static_cast<std::size_t>(c) * m.hidden_dim];
          for (int j = 0; j < m.hidden_dim; ++j) row[j] += g * h[j];
        }
        for (int j = 0; j < m.hidden_dim; ++j) {
          if (h[j] <= 0.0) continue;
          double g = 0.0;
          for (int c = 0; c < classes; ++c)
            g += (p[c] - (c == y ? 1.0 : 0.0)) * m.w2[static_cast<std::size_t>(c) * m.hidden_dim + j];
          gb1[j] += g;
          double* row = &gw1[static_cast<std::size_t>(j) * in_dim];
          for (int i = 0; i < in_dim; ++i) row[i] += g * xn[i];
        }
      }
      const double step = opt.learning_rate / bs;
      for (std::size_t i = 0; i < m.w1.size(); ++i) m.w1[i] -= step * gw1[i];
      for (std::size_t i = 0; i < m.b1.size(); ++i) m.b1[i] -= step * gb1[i];
      for (std::size_t i = 0; i < m.w2.size(); ++i) m.w2[i] -= step * gw2[i];
      for (std::size_t i = 0; i < m.b2.size(); ++i) m.b2[i] -= step * gb2[i];
    }
    last_loss = epoch_loss / n;
  }

  if (report) {
    report->final_loss = last_loss;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
      const auto logits = detail::forward(m, features[i]);
      if (detail::argmax_low(logits) == labels[i]) ++hits;
    }
    report->train_accuracy = static_cast<double>(hits) / n;
  }
  return m;
}

// Class prediction plus softmax confidence. Ties resolve to the lowest class.
inline std::pair<int, double> infer(const Model& m, std::span<const double> features) {
  if (static_cast<int>(features.size()) != m.input_dim)
    throw std::invalid_argument("infer: feature dimension mismatch");
  auto logits = detail::forward(m, features);
  const int cls = detail::argmax_low(logits);
  detail::softmax_inplace(logits);
  return {cls, logits[cls]};
}

// --- fixed-point model -----------------------------------------------------------

// Symmetric power-of-two quantization of a trained model. All scales are
// 2^exponent so requantization between layers reduces to a rounding shift;
// inference is integer-only until the final softmax.
struct FixedModel {
  int bits = 16;  // 16 or 12
  int qmax = 32767;
  int input_dim = 0;
  int hidden_dim = 0;
  int classes = 0;
  std::vector<double> mu, sigma;
  std::vector<std::int32_t> w1, b1, w2, b2;
  int e_in = 0;  // input scale exponent: x_q = round(x_n / 2^e_in)
  int e_w1 = 0;
  int e_h = 0;   // hidden activation scale exponent
  int e_w2 = 0;
};

// Running tallies of values that hit the representable range. Saturation is
// reported, never fatal.
struct FixedStats {
  long weight_sats = 0;
  long activation_sats = 0;
  long accumulator_sats = 0;
};

namespace detail {

// Smallest power-of-two exponent e with max_abs / 2^e <= qmax.
inline int pot_exponent(double max_abs, int qmax) {
  if (!(max_abs > 0.0)) return -20;
  const double ratio = max_abs / qmax;
  int e;
  const double f = std::frexp(ratio, &e);  // ratio = f * 2^e, f in [0.5, 1)
  return f == 0.5 ? e - 1 : e;
}

inline std::int32_t sat_add(std::int64_t acc, std::int64_t add, FixedStats* stats) {
  std::int64_t v = acc + add;
  if (v > std::numeric_limits<std::int32_t>::max()) {
    if (stats) ++stats->accumulator_sats;
    v = std::numeric_limits<std::int32_t>::max();
  } else if (v < std::numeric_limits<std::int32_t>::min()) {
    if (stats) ++stats->accumulator_sats;
    v = std::numeric_limits<std::int32_t>::min();
  }
  return static_cast<std::int32_t>(v);
}

// Multiply by 2^(-shift) with round-half-up, for non-negative shift counts.
inline std::int64_t shift_round(std::int64_t v, int shift) {
  if (shift <= 0) return v << (-shift);
  const std::int64_t bias = std::int64_t{1} << (shift - 1);
  return (v + bias) >> shift;
}

inline std::int32_t quantize_value(double v, int exponent, int qmax, long* sat_counter) {
  const double scaled = std::ldexp(v, -exponent);
  auto q = static_cast<std::int64_t>(std::llround(scaled));
  if (q > qmax || q < -qmax) {
    if (sat_counter) ++*sat_counter;
    q = q > 0 ? qmax : -qmax;
  }
  return static_cast<std::int32_t>(q);
}

}  // namespace detail

// Calibration runs the float model over representative feature vectors to
// pick input and hidden activation ranges.
inline FixedModel quantize_model(const Model& m, int bits,
                                 const std::vector<std::vector<double>>& calibration,
                                 FixedStats* stats = nullptr) {
  if (bits != 16 && bits != 12) throw std::invalid_argument("quantize_model: bits must be 16 or 12");
  if (calibration.empty()) throw std::invalid_argument("quantize_model: empty calibration set");

  FixedModel f;
  f.bits = bits;
  f.qmax = (1 << (bits - 1)) - 1;
  f.input_dim = m.input_dim;
  f.hidden_dim = m.hidden_dim;
  f.classes = m.classes;
  f.mu = m.mu;
  f.sigma = m.sigma;

  double max_in = 0.0, max_h = 0.0;
  std::vector<double> hidden;
  for (const auto& x : calibration) {
    if (static_cast<int>(x.size()) != m.input_dim)
      throw std::invalid_argument("quantize_model: calibration dimension mismatch");
    for (int i = 0; i < m.input_dim; ++i)
      max_in = std::max(max_in, std::abs((x[i] - m.mu[i]) / m.sigma[i]));
    detail::forward(m, x, &hidden);
    for (double h : hidden) max_h = std::max(max_h, std::abs(h));
  }

  double max_w1 = 0.0, max_w2 = 0.0;
  for (double v : m.w1) max_w1 = std::max(max_w1, std::abs(v));
  for (double v : m.w2) max_w2 = std::max(max_w2, std::abs(v));

  f.e_in = detail::pot_exponent(max_in, f.qmax);
  f.e_w1 = detail::pot_exponent(max_w1, f.qmax);
  f.e_h = detail::pot_exponent(max_h, f.qmax);
  f.e_w2 = detail::pot_exponent(max_w2, f.qmax);

  long* wsat = stats ? &stats->weight_sats : nullptr;
  f.w1.reserve(m.w1.size());
  for (double v : m.w1) f.w1.push_back(detail::quantize_value(v, f.e_w1, f.qmax, wsat));
  f.w2.reserve(m.w2.size());
  for (double v : m.w2) f.w2.push_back(detail::quantize_value(v, f.e_w2, f.qmax, wsat));
  // Biases live at the accumulator scale of their layer; they may need the
  // full int32 range, so only the i32 cast saturates them.
  f.b1.reserve(m.b1.size());
  for (double v : m.b1)
    f.b1.push_back(detail::quantize_value(v, f.e_w1 + f.e_in, std::numeric_limits<std::int32_t>::max(), wsat));
  f.b2.reserve(m.b2.size());
  for (double v : m.b2)
    f.b2.push_back(detail::quantize_value(v, f.e_w2 + f.e_h, std::numeric_limits<std::int32_t>::max(), wsat));
  return f;
}

// Integer-only forward pass; float appears only in input normalization and
// the final softmax. Returns (class, confidence); argmax runs on the int32
// logits with ties to the lowest class.
inline std::pair<int, double> infer_fixed(const FixedModel& f, std::span<const double> features,
                                          FixedStats* stats = nullptr) {
  if (static_cast<int>(features.size()) != f.input_dim)
    throw std::invalid_argument("infer_fixed: feature dimension mismatch");

  long* act_sat = stats ? &stats->activation_sats : nullptr;
  std::vector<std::int32_t> xq(f.input_dim);
  for (int i = 0; i < f.input_dim; ++i) {
    const double xn = (features[i] - f.mu[i]) / f.sigma[i];
    xq[i] = detail::quantize_value(xn, f.e_in, f.qmax, act_sat);
  }

  // Hidden accumulators sit at scale 2^(e_w1+e_in); requantize to 2^e_h.
  const int shift = f.e_h - (f.e_w1 + f.e_in);
  std::vector<std::int32_t> hq(f.hidden_dim);
  for (int j = 0; j < f.hidden_dim; ++j) {
    std::int32_t acc = f.b1[j];
    const std::int32_t* row = &f.w1[static_cast<std::size_t>(j) * f.input_dim];
    for (int i = 0; i < f.input_dim; ++i)
      acc = detail::sat_add(acc, static_cast<std::int64_t>(row[i]) * xq[i], stats);
    if (acc < 0) acc = 0;  // ReLU
    std::int64_t h = detail::shift_round(acc, shift);
    if (h > f.qmax) {
      if (act_sat) ++*act_sat;
      h = f.qmax;
    }
    hq[j] = static_cast<std::int32_t>(h);
  }

  std::vector<std::int32_t> logits_q(f.classes);
  for (int c = 0; c < f.classes; ++c) {
    std::int32_t acc = f.b2[c];
    const std::int32_t* row = &f.w2[static_cast<std::size_t>(c) * f.hidden_dim];
    for (int j = 0; j < f.hidden_dim; ++j)
      acc = detail::sat_add(acc, static_cast<std::int64_t>(row[j]) * hq[j], stats);
    logits_q[c] = acc;
  }

  int cls = 0;
  for (int c = 1; c < f.classes; ++c)
    if (logits_q[c] > logits_q[cls]) cls = c;

  std::vector<double> logits(f.classes);
  const double scale = std::ldexp(1.0, f.e_w2 + f.e_h);
  for (int c = 0; c < f.classes; ++c) logits[c] = logits_q[c] * scale;
  detail::softmax_inplace(logits);
  return {cls, logits[cls]};
}

// --- compressed-domain inputs -----------------------------------------------------

// Canonical fixed-length vector for a clustered coreset: clusters dequantized,
// sorted lexicographically by center (then radius), concatenated as
// (center..., radius) and zero-padded to pad_k entries. Coresets larger than
// pad_k keep their first pad_k sorted clusters.
inline std::vector<double> canonical_coreset_vector(std::span<const coreset::QuantCluster> clusters,
                                                    const QuantSpec& spec,
                                                    int pad_k = coreset::kDefaultClusterCount) {
  const int D = spec.dims();
  std::vector<std::vector<double>> rows;
  rows.reserve(clusters.size());
  for (const auto& c : clusters) {
    auto center = dequantize_point(c.center_code, spec);
    center.push_back(dequantize_radius(c.radius_code, spec));
    rows.push_back(std::move(center));
  }
  std::sort(rows.begin(), rows.end());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(pad_k) * (D + 1));
  for (int i = 0; i < pad_k; ++i) {
    if (i < static_cast<int>(rows.size()))
      out.insert(out.end(), rows[i].begin(), rows[i].end());
    else
      out.insert(out.end(), D + 1, 0.0);
  }
  return out;
}

// --- host-side fusion ---------------------------------------------------------

struct SensorReport {
  int sensor_id = 0;
  int class_idx = 0;
  double confidence = 0.0;
  Strategy provenance = Strategy::D2;
};

// Confidence- and reliability-weighted vote: score(c) = sum of
// confidence * weight[sensor] over reports predicting c. Ties resolve to the
// lowest class index.
inline int ensemble(std::span<const SensorReport> reports, std::span<const double> weights) {
  if (reports.empty()) throw std::invalid_argument("ensemble: no reports for this window");
  int max_class = 0;
  for (const auto& r : reports) {
    if (r.sensor_id < 0 || r.sensor_id >= static_cast<int>(weights.size()))
      throw std::invalid_argument("ensemble: sensor id outside weight table");
    if (r.class_idx < 0) throw std::invalid_argument("ensemble: negative class");
    max_class = std::max(max_class, r.class_idx);
  }
  std::vector<double> score(max_class + 1, 0.0);
  for (const auto& r : reports) score[r.class_idx] += r.confidence * weights[r.sensor_id];
  int best = 0;
  for (int c = 1; c <= max_class; ++c)
    if (score[c] > score[best]) best = c;
  return best;
}

// --- template selection ---------------------------------------------------------

// Picks one template per class: the window with the highest mean correlation
// to its same-class peers (the most central exemplar). Classes with a single
// window use it directly. Large classes are strided down to cap the O(n^2)
// correlation work.
inline memo::TemplateStore build_template_store(std::span<const SampleWindow> windows, int classes,
                                                int max_per_class = 120) {
  memo::TemplateStore store;
  store.templates.resize(classes);
  for (int cls = 0; cls < classes; ++cls) {
    std::vector<const SampleWindow*> members;
    for (const auto& w : windows)
      if (w.label && *w.label == cls) members.push_back(&w);
    if (members.empty()) continue;
    if (static_cast<int>(members.size()) > max_per_class) {
      std::vector<const SampleWindow*> strided;
      const double step = static_cast<double>(members.size()) / max_per_class;
      for (int i = 0; i < max_per_class; ++i)
        strided.push_back(members[static_cast<std::size_t>(i * step)]);
      members = std::move(strided);
    }
    int best = 0;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < members.size(); ++i) {
      double sum = 0.0;
      int n = 0;
      for (std::size_t j = 0; j < members.size(); ++j) {
        if (i == j || !members[i]->same_shape(*members[j])) continue;
        const auto r = memo::pearson_opt(members[i]->flat(), members[j]->flat());
        if (r) {
          sum += *r;
          ++n;
        }
      }
      const double mean = n > 0 ? sum / n : 0.0;
      if (mean > best_mean) {
        best_mean = mean;
        best = static_cast<int>(i);
      }
    }
    store.templates[cls] = *members[best];
  }
  return store;
}

// --- serialization ---------------------------------------------------------------

inline void write_model(std::vector<std::uint8_t>& out, const Model& m) {
  binio::put_u32(out, static_cast<std::uint32_t>(m.input_dim));
  binio::put_u32(out, static_cast<std::uint32_t>(m.hidden_dim));
  binio::put_u32(out, static_cast<std::uint32_t>(m.classes));
  for (const auto* vec : {&m.mu, &m.sigma, &m.w1, &m.b1, &m.w2, &m.b2}) {
    binio::put_u32(out, static_cast<std::uint32_t>(vec->size()));
    for (double v : *vec) binio::put_f64(out, v);
  }
}

inline Model read_model(binio::Reader& r) {
  Model m;
  m.input_dim = static_cast<int>(r.u32());
  m.hidden_dim = static_cast<int>(r.u32());
  m.classes = static_cast<int>(r.u32());
  for (auto* vec : {&m.mu, &m.sigma, &m.w1, &m.b1, &m.w2, &m.b2}) {
    const auto n = r.u32();
    vec->resize(n);
    for (auto& v : *vec) v = r.f64();
  }
  return m;
}

inline void write_fixed_model(std::vector<std::uint8_t>& out, const FixedModel& f) {
  binio::put_u32(out, static_cast<std::uint32_t>(f.bits));
  binio::put_u32(out, static_cast<std::uint32_t>(f.qmax));
  binio::put_u32(out, static_cast<std::uint32_t>(f.input_dim));
  binio::put_u32(out, static_cast<std::uint32_t>(f.hidden_dim));
  binio::put_u32(out, static_cast<std::uint32_t>(f.classes));
  binio::put_i32(out, f.e_in);
  binio::put_i32(out, f.e_w1);
  binio::put_i32(out, f.e_h);
  binio::put_i32(out, f.e_w2);
  for (const auto* vec : {&f.mu, &f.sigma}) {
    binio::put_u32(out, static_cast<std::uint32_t>(vec->size()));
    for (double v : *vec) binio::put_f64(out, v);
  }
  for (const auto* vec : {&f.w1, &f.b1, &f.w2, &f.b2}) {
    binio::put_u32(out, static_cast<std::uint32_t>(vec->size()));
    for (std::int32_t v : *vec) binio::put_i32(out, v);
  }
}

inline FixedModel read_fixed_model(binio::Reader& r) {
  FixedModel f;
  f.bits = static_cast<int>(r.u32());
  f.qmax = static_cast<int>(r.u32());
  f.input_dim = static_cast<int>(r.u32());
  f.hidden_dim = static_cast<int>(r.u32());
  f.classes = static_cast<int>(r.u32());
  f.e_in = r.i32();
  f.e_w1 = r.i32();
  f.e_h = r.i32();
  f.e_w2 = r.i32();
  for (auto* vec : {&f.mu, &f.sigma}) {
    const auto n = r.u32();
    vec->resize(n);
    for (auto& v : *vec) v = r.f64();
  }
  for (auto* vec : {&f.w1, &f.b1, &f.w2, &f.b2}) {
    const auto n = r.u32();
    vec->resize(n);
    for (auto& v : *vec) v = r.i32();
  }
  return f;
}

inline std::uint64_t model_digest(const Model& m) {
  std::vector<std::uint8_t> buf;
  write_model(buf, m);
  return binio::fnv1a(buf);
}

}  // namespace seeker::classify
