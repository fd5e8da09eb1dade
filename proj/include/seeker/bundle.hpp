#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seeker/binio.hpp"
#include "seeker/classify.hpp"
#include "seeker/coreset.hpp"
#include "seeker/ingest.hpp"
#include "seeker/memo.hpp"
#include "seeker/quant.hpp"

namespace seeker::bundle {

inline constexpr std::uint32_t kMagic = 0x424D4B53;  // "SKMB" little-endian
inline constexpr std::uint32_t kVersion = 1;

class BundleError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, BadVersion, DigestMismatch, Io };
  BundleError(Kind kind, const std::string& what) : std::runtime_error(what), kind(kind) {}
  Kind kind;
};

// Everything the host and the simulated nodes need at run time, produced once
// by training and persisted as a single self-checking file.
struct Bundle {
  int window_length = 60;
  int stride = 30;
  int channels = 3;
  int num_sensors = 0;
  int dp_points = coreset::kDefaultDpPoints;
  double memo_threshold = 0.95;
  std::vector<std::string> sensor_names;
  ingest::LabelMap label_map;
  QuantSpec quant;

  classify::Model float_model;              // window features -> class
  classify::FixedModel fixed16, fixed12;    // node-side quantized variants
  classify::Model dp_model;                 // pseudo-window features -> class
  std::vector<int> candidate_ks;
  std::vector<classify::Model> km_models;   // canonical coreset vector -> class, per candidate k
  coreset::ActivityLut lut;
  std::vector<memo::TemplateStore> templates;  // per sensor
  std::vector<double> ensemble_weights;        // per sensor

  int classes() const { return label_map.classes(); }

  const classify::Model* km_model_for(int k) const {
    for (std::size_t i = 0; i < candidate_ks.size(); ++i)
      if (candidate_ks[i] == k) return &km_models[i];
    return km_models.empty() ? nullptr : &km_models.back();
  }
};

namespace detail {

inline void write_window(std::vector<std::uint8_t>& out, const SampleWindow& w) {
  binio::put_u32(out, static_cast<std::uint32_t>(w.sensor_id));
  binio::put_u32(out, static_cast<std::uint32_t>(w.source));
  binio::put_u64(out, static_cast<std::uint64_t>(w.start_index));
  binio::put_u32(out, static_cast<std::uint32_t>(w.rows));
  binio::put_u32(out, static_cast<std::uint32_t>(w.cols));
  binio::put_u8(out, w.label ? 1 : 0);
  binio::put_i32(out, w.label ? *w.label : 0);
  for (float v : w.points) binio::put_f32(out, v);
}

inline SampleWindow read_window(binio::Reader& r) {
  SampleWindow w;
  w.sensor_id = static_cast<int>(r.u32());
  w.source = static_cast<int>(r.u32());
  w.start_index = static_cast<std::int64_t>(r.u64());
  w.rows = static_cast<int>(r.u32());
  w.cols = static_cast<int>(r.u32());
  const bool has_label = r.u8() != 0;
  const int label = r.i32();
  if (has_label) w.label = label;
  const auto n = static_cast<std::size_t>(w.rows) * w.cols;
  w.points.resize(n);
  for (auto& v : w.points) v = r.f32();
  return w;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const Bundle& b) {
  std::vector<std::uint8_t> out;
  binio::put_u32(out, kMagic);
  binio::put_u32(out, kVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(b.window_length));
  binio::put_u32(out, static_cast<std::uint32_t>(b.stride));
  binio::put_u32(out, static_cast<std::uint32_t>(b.channels));
  binio::put_u32(out, static_cast<std::uint32_t>(b.num_sensors));
  binio::put_u32(out, static_cast<std::uint32_t>(b.dp_points));
  binio::put_f64(out, b.memo_threshold);

  binio::put_u32(out, static_cast<std::uint32_t>(b.sensor_names.size()));
  for (const auto& n : b.sensor_names) binio::put_string(out, n);

  binio::put_u32(out, static_cast<std::uint32_t>(b.label_map.raw_labels.size()));
  for (int raw : b.label_map.raw_labels) binio::put_i32(out, raw);

  binio::put_u32(out, static_cast<std::uint32_t>(b.quant.dims()));
  for (int d = 0; d < b.quant.dims(); ++d) {
    binio::put_f64(out, b.quant.min_v[d]);
    binio::put_f64(out, b.quant.max_v[d]);
  }
  binio::put_f64(out, b.quant.radius_max);

  classify::write_model(out, b.float_model);
  classify::write_fixed_model(out, b.fixed16);
  classify::write_fixed_model(out, b.fixed12);
  classify::write_model(out, b.dp_model);

  binio::put_u32(out, static_cast<std::uint32_t>(b.candidate_ks.size()));
  for (int k : b.candidate_ks) binio::put_u32(out, static_cast<std::uint32_t>(k));
  for (const auto& m : b.km_models) classify::write_model(out, m);

  binio::put_u32(out, static_cast<std::uint32_t>(b.lut.candidate_ks.size()));
  for (int k : b.lut.candidate_ks) binio::put_u32(out, static_cast<std::uint32_t>(k));
  binio::put_u32(out, static_cast<std::uint32_t>(b.lut.k_by_class.size()));
  for (int k : b.lut.k_by_class) binio::put_u32(out, static_cast<std::uint32_t>(k));
  binio::put_f64(out, b.lut.tolerance);

  binio::put_u32(out, static_cast<std::uint32_t>(b.templates.size()));
  for (const auto& store : b.templates) {
    binio::put_u32(out, static_cast<std::uint32_t>(store.templates.size()));
    for (const auto& tpl : store.templates) {
      binio::put_u8(out, tpl ? 1 : 0);
      if (tpl) detail::write_window(out, *tpl);
    }
  }

  binio::put_u32(out, static_cast<std::uint32_t>(b.ensemble_weights.size()));
  for (double w : b.ensemble_weights) binio::put_f64(out, w);

  binio::put_u64(out, binio::fnv1a(out));
  return out;
}

inline Bundle deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16)
    throw BundleError(BundleError::Kind::BadMagic, "bundle: buffer too small");
  {
    binio::Reader head(bytes);
    if (head.u32() != kMagic)
      throw BundleError(BundleError::Kind::BadMagic, "bundle: magic mismatch");
    if (head.u32() != kVersion)
      throw BundleError(BundleError::Kind::BadVersion, "bundle: unsupported version");
  }
  {
    binio::Reader tail(bytes.subspan(bytes.size() - 8));
    const std::uint64_t want = tail.u64();
    const std::uint64_t got = binio::fnv1a(bytes.first(bytes.size() - 8));
    if (want != got)
      throw BundleError(BundleError::Kind::DigestMismatch, "bundle: digest mismatch");
  }

  binio::Reader r(bytes.first(bytes.size() - 8));
  (void)r.u32();  // magic
  (void)r.u32();  // version
  Bundle b;
  b.window_length = static_cast<int>(r.u32());
  b.stride = static_cast<int>(r.u32());
  b.channels = static_cast<int>(r.u32());
  b.num_sensors = static_cast<int>(r.u32());
  b.dp_points = static_cast<int>(r.u32());
  b.memo_threshold = r.f64();

  b.sensor_names.resize(r.u32());
  for (auto& n : b.sensor_names) n = r.string();

  b.label_map.raw_labels.resize(r.u32());
  for (auto& raw : b.label_map.raw_labels) raw = r.i32();

  const int dims = static_cast<int>(r.u32());
  b.quant.min_v.resize(dims);
  b.quant.max_v.resize(dims);
  for (int d = 0; d < dims; ++d) {
    b.quant.min_v[d] = r.f64();
    b.quant.max_v[d] = r.f64();
  }
  b.quant.radius_max = r.f64();

  b.float_model = classify::read_model(r);
  b.fixed16 = classify::read_fixed_model(r);
  b.fixed12 = classify::read_fixed_model(r);
  b.dp_model = classify::read_model(r);

  b.candidate_ks.resize(r.u32());
  for (auto& k : b.candidate_ks) k = static_cast<int>(r.u32());
  b.km_models.resize(b.candidate_ks.size());
  for (auto& m : b.km_models) m = classify::read_model(r);

  b.lut.candidate_ks.resize(r.u32());
  for (auto& k : b.lut.candidate_ks) k = static_cast<int>(r.u32());
  b.lut.k_by_class.resize(r.u32());
  for (auto& k : b.lut.k_by_class) k = static_cast<int>(r.u32());
  b.lut.tolerance = r.f64();

  b.templates.resize(r.u32());
  for (auto& store : b.templates) {
    store.templates.resize(r.u32());
    for (auto& tpl : store.templates)
      if (r.u8() != 0) tpl = detail::read_window(r);
  }

  b.ensemble_weights.resize(r.u32());
  for (auto& w : b.ensemble_weights) w = r.f64();
  return b;
}

inline void save(const Bundle& b, const std::string& path) {
  const auto bytes = serialize(b);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw BundleError(BundleError::Kind::Io, "bundle: cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw BundleError(BundleError::Kind::Io, "bundle: write failed for " + path);
}

inline Bundle load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BundleError(BundleError::Kind::Io, "bundle: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace seeker::bundle
