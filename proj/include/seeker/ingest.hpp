#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "seeker/coreset.hpp"
#include "seeker/quant.hpp"
#include "seeker/rng.hpp"
#include "seeker/window.hpp"

namespace seeker::ingest {

struct SensorSpec {
  std::string name;
  std::vector<int> columns;  // zero-based columns holding this sensor's channels
};

struct DatasetSchema {
  char delimiter = ' ';  // ' ' means "any whitespace run"
  int label_column = 0;
  int null_label = 0;  // rows with this label carry no activity
  double sample_rate_hz = 50.0;
  std::vector<SensorSpec> sensors;

  int max_column() const {
    int mx = label_column;
    for (const auto& s : sensors)
      for (int c : s.columns) mx = std::max(mx, c);
    return mx;
  }

  void validate() const {
    if (sensors.empty()) throw std::invalid_argument("DatasetSchema: no sensors");
    if (label_column < 0) throw std::invalid_argument("DatasetSchema: negative label column");
    const std::size_t ch = sensors.front().columns.size();
    for (const auto& s : sensors) {
      if (s.columns.empty()) throw std::invalid_argument("DatasetSchema: sensor without columns");
      if (s.columns.size() != ch)
        throw std::invalid_argument("DatasetSchema: sensors must share a channel count");
      for (int c : s.columns)
        if (c < 0) throw std::invalid_argument("DatasetSchema: negative column");
    }
    if (sample_rate_hz <= 0.0) throw std::invalid_argument("DatasetSchema: bad sample rate");
  }
};

// Default schema: the 24-column body-sensor layout (MHEALTH-style) with
// three 3-axis accelerometer blocks and the activity label in the last
// column.
inline DatasetSchema default_body_schema() {
  DatasetSchema s;
  s.delimiter = ' ';
  s.label_column = 23;
  s.null_label = 0;
  s.sample_rate_hz = 50.0;
  s.sensors = {
      {"chest", {0, 1, 2}},
      {"left-ankle", {5, 6, 7}},
      {"right-arm", {14, 15, 16}},
  };
  return s;
}

class IngestError : public std::runtime_error {
 public:
  enum class Kind { EmptyFile, MissingColumn, NoInput };
  IngestError(Kind kind, const std::string& what) : std::runtime_error(what), kind(kind) {}
  Kind kind;
};

// A data row that failed to parse; the row is skipped, not fatal.
struct ParseDiag {
  long row = 0;  // 1-based line number
  std::string what;
};

// One input file, transposed into per-sensor channel matrices.
struct Recording {
  int source = 0;
  std::string path;
  long rows = 0;
  std::vector<std::vector<float>> sensor_data;  // [sensor][row * channels + ch]
  std::vector<int> labels;                      // raw label per row
  std::vector<ParseDiag> diags;
};

namespace detail {

inline void split_fields(std::string_view line, char delimiter, std::vector<std::string_view>& out) {
  out.clear();
  if (delimiter == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) out.push_back(line.substr(i, j - i));
      i = j;
    }
  } else {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == delimiter) {
        out.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
  }
}

inline bool parse_double(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

}  // namespace detail

// Parses one recording. Numeric garbage on a data row is recorded as a
// diagnostic and the row is skipped; a file whose rows cannot supply the
// schema's columns at all, or that yields no usable rows, is an error.
inline Recording load_recording(const std::string& path, const DatasetSchema& schema, int source) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw IngestError(IngestError::Kind::NoInput, "cannot open " + path);

  Recording rec;
  rec.source = source;
  rec.path = path;
  rec.sensor_data.resize(schema.sensors.size());

  const int need = schema.max_column() + 1;
  std::string line;
  std::vector<std::string_view> fields;
  std::vector<double> values;
  long lineno = 0;
  bool saw_data_line = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    detail::split_fields(line, schema.delimiter, fields);
    if (fields.empty()) continue;
    saw_data_line = true;
    if (static_cast<int>(fields.size()) < need) {
      if (rec.rows == 0 && rec.diags.empty())
        throw IngestError(IngestError::Kind::MissingColumn,
                          path + ": row 1 has " + std::to_string(fields.size()) +
                              " columns, schema needs " + std::to_string(need));
      rec.diags.push_back({lineno, "short row (" + std::to_string(fields.size()) + " columns)"});
      continue;
    }
    values.resize(need);
    bool ok = true;
    for (int c = 0; c < need && ok; ++c) ok = detail::parse_double(fields[c], values[c]);
    if (!ok) {
      rec.diags.push_back({lineno, "unparseable numeric field"});
      continue;
    }
    for (std::size_t s = 0; s < schema.sensors.size(); ++s)
      for (int c : schema.sensors[s].columns)
        rec.sensor_data[s].push_back(static_cast<float>(values[c]));
    rec.labels.push_back(static_cast<int>(std::llround(values[schema.label_column])));
    ++rec.rows;
  }

  if (!saw_data_line) throw IngestError(IngestError::Kind::EmptyFile, path + ": no data rows");
  if (rec.rows == 0)
    throw IngestError(IngestError::Kind::EmptyFile, path + ": every data row was rejected");
  return rec;
}

inline std::vector<Recording> load_dataset(std::span<const std::string> paths,
                                           const DatasetSchema& schema) {
  if (paths.empty()) throw IngestError(IngestError::Kind::NoInput, "no dataset paths given");
  std::vector<Recording> out;
  out.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i)
    out.push_back(load_recording(paths[i], schema, static_cast<int>(i)));
  return out;
}

// Cuts fixed-length windows at the given stride from every sensor stream.
// Each window is labeled by majority vote over its rows (ties to the smaller
// raw label); windows whose majority is the null label are dropped.
inline std::vector<SampleWindow> extract_windows(const Recording& rec, const DatasetSchema& schema,
                                                 int length, int stride) {
  if (length < 2) throw std::invalid_argument("extract_windows: window length too small");
  if (stride < 1) throw std::invalid_argument("extract_windows: stride must be positive");
  std::vector<SampleWindow> out;
  const int channels = static_cast<int>(schema.sensors.front().columns.size());
  for (std::int64_t start = 0; start + length <= rec.rows; start += stride) {
    // Majority label over the span, shared by all sensors.
    std::map<int, int> votes;
    for (int r = 0; r < length; ++r) ++votes[rec.labels[start + r]];
    int best_label = 0, best_votes = -1;
    for (const auto& [label, n] : votes)
      if (n > best_votes) {
        best_label = label;
        best_votes = n;
      }
    if (best_label == schema.null_label) continue;
    for (std::size_t s = 0; s < schema.sensors.size(); ++s) {
      SampleWindow w;
      w.sensor_id = static_cast<int>(s);
      w.source = rec.source;
      w.start_index = start;
      w.rows = length;
      w.cols = channels;
      w.label = best_label;
      const float* base = rec.sensor_data[s].data() + start * channels;
      w.points.assign(base, base + static_cast<std::size_t>(length) * channels);
      out.push_back(std::move(w));
    }
  }
  return out;
}

inline std::vector<SampleWindow> extract_windows(std::span<const Recording> recs,
                                                 const DatasetSchema& schema, int length,
                                                 int stride) {
  std::vector<SampleWindow> out;
  for (const auto& rec : recs) {
    auto part = extract_windows(rec, schema, length, stride);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

// --- labels ----------------------------------------------------------------------

// Maps raw dataset labels to dense class indices (sorted ascending).
struct LabelMap {
  std::vector<int> raw_labels;  // class index -> raw label

  int classes() const { return static_cast<int>(raw_labels.size()); }

  int to_class(int raw) const {
    const auto it = std::lower_bound(raw_labels.begin(), raw_labels.end(), raw);
    if (it == raw_labels.end() || *it != raw)
      throw std::invalid_argument("LabelMap: raw label " + std::to_string(raw) + " unknown");
    return static_cast<int>(it - raw_labels.begin());
  }
};

inline LabelMap build_label_map(std::span<const SampleWindow> windows) {
  std::vector<int> labels;
  for (const auto& w : windows)
    if (w.label) labels.push_back(*w.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.empty()) throw std::invalid_argument("build_label_map: no labeled windows");
  LabelMap map;
  map.raw_labels = std::move(labels);
  return map;
}

// Rewrites raw window labels to dense class indices, in place.
inline void apply_label_map(std::span<SampleWindow> windows, const LabelMap& map) {
  for (auto& w : windows)
    if (w.label) w.label = map.to_class(*w.label);
}

// --- quantization calibration -------------------------------------------------------

// Builds the quantizer from calibration windows: per-dimension ranges at the
// clip quantiles (0 keeps the exact min/max), degenerate dimensions widened
// symmetrically, and radius_max sized so every cluster radius seen during
// calibration — over every candidate cluster count, slack included — still
// encodes without saturating.
inline QuantSpec calibrate_quant_range(std::span<const SampleWindow> windows, double clip_quantile,
                                       std::span<const int> candidate_ks) {
  if (windows.empty()) throw std::invalid_argument("calibrate_quant_range: no windows");
  if (clip_quantile < 0.0 || clip_quantile >= 0.5)
    throw std::invalid_argument("calibrate_quant_range: clip quantile out of [0, 0.5)");
  const int D = windows.front().cols;
  for (const auto& w : windows)
    if (w.cols != D) throw std::invalid_argument("calibrate_quant_range: mixed channel counts");

  QuantSpec spec;
  spec.min_v.resize(D);
  spec.max_v.resize(D);
  std::vector<double> vals;
  for (int d = 0; d < D; ++d) {
    vals.clear();
    for (const auto& w : windows)
      for (int r = 0; r < w.rows; ++r) vals.push_back(w.at(r, d));
    std::sort(vals.begin(), vals.end());
    const auto n = vals.size();
    const auto lo_idx = static_cast<std::size_t>(clip_quantile * (n - 1));
    const auto hi_idx = n - 1 - lo_idx;
    spec.min_v[d] = vals[lo_idx];
    spec.max_v[d] = vals[hi_idx];
    if (!(spec.min_v[d] < spec.max_v[d])) {
      // Degenerate channel: widen by a fixed unit so the quantizer stays valid.
      spec.min_v[d] -= 0.5;
      spec.max_v[d] += 0.5;
    }
  }

  double max_radius = 0.0;
  const double slack = spec.center_slack();
  for (const auto& w : windows)
    for (int k : candidate_ks) {
      if (k > w.rows) continue;
      const auto lloyd = coreset::lloyd_clusters(w, k);
      for (const auto& cl : lloyd.clusters) max_radius = std::max(max_radius, cl.radius + slack);
    }
  spec.radius_max = std::max(1.0, std::ceil(max_radius));
  spec.validate();
  return spec;
}

// --- grouping + split ----------------------------------------------------------------

// All sensors' windows over one time span, the unit the simulator replays and
// the splitter shuffles (keeps simultaneous views in the same split).
struct WindowGroup {
  int source = 0;
  std::int64_t start_index = 0;
  int label = 0;                 // class index shared by the group
  std::vector<int> window_idx;   // into the windows array, one per sensor id
};

inline std::vector<WindowGroup> group_windows(std::span<const SampleWindow> windows,
                                              int num_sensors) {
  std::map<std::pair<int, std::int64_t>, WindowGroup> by_span;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (!w.label) throw std::invalid_argument("group_windows: unlabeled window");
    auto& g = by_span[{w.source, w.start_index}];
    if (g.window_idx.empty()) {
      g.source = w.source;
      g.start_index = w.start_index;
      g.label = *w.label;
      g.window_idx.assign(num_sensors, -1);
    }
    if (w.sensor_id < 0 || w.sensor_id >= num_sensors)
      throw std::invalid_argument("group_windows: sensor id outside schema");
    g.window_idx[w.sensor_id] = static_cast<int>(i);
  }
  std::vector<WindowGroup> out;
  out.reserve(by_span.size());
  for (auto& [key, g] : by_span) {
    for (int idx : g.window_idx)
      if (idx < 0) throw std::invalid_argument("group_windows: group missing a sensor window");
    out.push_back(std::move(g));
  }
  return out;
}

struct Split {
  std::vector<int> train, val, test;  // group indices
};

// Label-stratified split at group granularity: within each class, groups are
// shuffled by the seed and dealt out by largest-remainder so every class
// lands in every part when it has enough members.
inline Split split_groups(std::span<const WindowGroup> groups, const std::array<double, 3>& ratios,
                          std::uint64_t seed) {
  double total = ratios[0] + ratios[1] + ratios[2];
  if (!(total > 0.0) || ratios[0] < 0.0 || ratios[1] < 0.0 || ratios[2] < 0.0)
    throw std::invalid_argument("split_groups: ratios must be non-negative and sum positive");

  std::map<int, std::vector<int>> by_label;
  for (std::size_t i = 0; i < groups.size(); ++i)
    by_label[groups[i].label].push_back(static_cast<int>(i));

  Split split;
  Rng rng(seed);
  for (auto& [label, idxs] : by_label) {
    for (std::size_t i = idxs.size() - 1; i > 0; --i)
      std::swap(idxs[i], idxs[rng.next_index(i + 1)]);
    const int n = static_cast<int>(idxs.size());
    std::array<double, 3> want{};
    std::array<int, 3> take{};
    int assigned = 0;
    for (int p = 0; p < 3; ++p) {
      want[p] = ratios[p] / total * n;
      take[p] = static_cast<int>(want[p]);
      assigned += take[p];
    }
    while (assigned < n) {  // largest remainder first
      int best = 0;
      double best_rem = -1.0;
      for (int p = 0; p < 3; ++p) {
        const double rem = want[p] - take[p];
        if (rem > best_rem) {
          best_rem = rem;
          best = p;
        }
      }
      ++take[best];
      ++assigned;
    }
    int pos = 0;
    for (int p = 0; p < 3; ++p) {
      auto* dst = p == 0 ? &split.train : p == 1 ? &split.val : &split.test;
      for (int i = 0; i < take[p]; ++i) dst->push_back(idxs[pos++]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace seeker::ingest
