#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seeker/binio.hpp"
#include "seeker/coreset.hpp"

namespace seeker::codec {

enum class FrameType : std::uint8_t {
  Result = 0,      // class id + confidence
  Raw = 1,         // full window
  CoresetDp = 2,   // m 16-bit point codes
  CoresetKm = 3,   // k clusters of center(2) + radius(1)
  CoresetRec = 4,  // clusters followed by packed 4-bit counts
};

inline constexpr int kHeaderBytes = 4;  // type u8, sensor u8, sequence u16le
inline constexpr int kSeqCounterBits = 13;
inline constexpr std::uint16_t kSeqCounterMask = (1u << kSeqCounterBits) - 1;

// The 16-bit sequence field carries a 13-bit wrap-around counter plus the
// sending strategy in the top three bits.
inline std::uint16_t pack_sequence(std::uint16_t counter, std::uint8_t provenance) {
  return static_cast<std::uint16_t>((counter & kSeqCounterMask) |
                                    (static_cast<std::uint16_t>(provenance & 0x7) << kSeqCounterBits));
}
inline std::uint16_t sequence_counter(std::uint16_t seq) { return seq & kSeqCounterMask; }
inline std::uint8_t sequence_provenance(std::uint16_t seq) { return static_cast<std::uint8_t>(seq >> kSeqCounterBits); }

// How transmitted volume is accounted. The default books one 4-byte unit per
// window sample for raw frames; `raw_physical` books the full rows*cols float
// payload instead. Headers are excluded from volume metrics unless asked for.
struct WireConfig {
  int window_points = 60;  // rows per raw window
  int channels = 3;
  bool raw_physical = false;
  bool count_headers = false;
};

class DecodeError : public std::runtime_error {
 public:
  enum class Kind { UnknownFrameType, LengthMismatch, TruncatedFrame };
  DecodeError(Kind kind, const std::string& what) : std::runtime_error(what), kind(kind) {}
  Kind kind;
};

// Exact payload size in bytes. `param` is m for point coresets and k for
// clustered ones; it is ignored for Result and Raw frames.
inline int payload_size(FrameType type, int param, const WireConfig& cfg = {}) {
  switch (type) {
    case FrameType::Result:
      return 2;
    case FrameType::Raw:
      return cfg.raw_physical ? cfg.window_points * cfg.channels * 4 : cfg.window_points * 4;
    case FrameType::CoresetDp:
      if (param < 1) throw std::invalid_argument("payload_size: m must be positive");
      return 2 * param;
    case FrameType::CoresetKm:
      if (param < 1 || param > coreset::kMaxWireClusters)
        throw std::invalid_argument("payload_size: k out of range");
      return 3 * param;
    case FrameType::CoresetRec:
      if (param < 1 || param > coreset::kMaxWireClusters)
        throw std::invalid_argument("payload_size: k out of range");
      return 3 * param + (param + 1) / 2;
  }
  throw std::invalid_argument("payload_size: unknown frame type");
}

struct FrameHeader {
  FrameType type = FrameType::Result;
  std::uint8_t sensor_id = 0;
  std::uint16_t sequence = 0;
};

struct Frame {
  FrameHeader header;
  std::vector<std::uint8_t> payload;
};

namespace detail {

// Validates a payload length against its frame type; returns the structural
// parameter (k or m) or throws.
inline int check_payload(FrameType type, std::size_t len, const WireConfig& cfg) {
  const auto fail = [&](const char* why) {
    throw DecodeError(DecodeError::Kind::LengthMismatch,
                      std::string("frame payload length invalid: ") + why);
  };
  switch (type) {
    case FrameType::Result:
      if (len != 2) fail("result frames carry exactly 2 bytes");
      return 0;
    case FrameType::Raw: {
      const auto want = static_cast<std::size_t>(payload_size(FrameType::Raw, 0, cfg));
      if (len != want) fail("raw frame size does not match configured window");
      return cfg.window_points;
    }
    case FrameType::CoresetDp: {
      if (len < 2 || len % 2 != 0) fail("point coreset payloads are 2 bytes per point");
      return static_cast<int>(len / 2);
    }
    case FrameType::CoresetKm: {
      if (len < 3 || len % 3 != 0) fail("cluster coreset payloads are 3 bytes per cluster");
      const int k = static_cast<int>(len / 3);
      if (k > coreset::kMaxWireClusters) fail("cluster count exceeds wire cap");
      return k;
    }
    case FrameType::CoresetRec: {
      for (int k = 1; k <= coreset::kMaxWireClusters; ++k)
        if (len == static_cast<std::size_t>(3 * k + (k + 1) / 2)) return k;
      fail("no cluster count yields this recoverable payload size");
    }
  }
  throw DecodeError(DecodeError::Kind::UnknownFrameType, "frame type byte not recognized");
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_frame(FrameType type, std::uint8_t sensor_id,
                                              std::uint16_t sequence,
                                              std::span<const std::uint8_t> payload,
                                              const WireConfig& cfg = {}) {
  detail::check_payload(type, payload.size(), cfg);
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + payload.size());
  binio::put_u8(out, static_cast<std::uint8_t>(type));
  binio::put_u8(out, sensor_id);
  binio::put_u16(out, sequence);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

inline Frame decode_frame(std::span<const std::uint8_t> bytes, const WireConfig& cfg = {}) {
  if (bytes.size() < kHeaderBytes)
    throw DecodeError(DecodeError::Kind::TruncatedFrame, "buffer shorter than the 4-byte header");
  const std::uint8_t type_byte = bytes[0];
  if (type_byte > static_cast<std::uint8_t>(FrameType::CoresetRec))
    throw DecodeError(DecodeError::Kind::UnknownFrameType,
                      "frame type byte " + std::to_string(type_byte) + " not recognized");
  Frame f;
  f.header.type = static_cast<FrameType>(type_byte);
  f.header.sensor_id = bytes[1];
  f.header.sequence = static_cast<std::uint16_t>(bytes[2] | (bytes[3] << 8));
  f.payload.assign(bytes.begin() + kHeaderBytes, bytes.end());
  detail::check_payload(f.header.type, f.payload.size(), cfg);
  return f;
}

// --- typed payloads ----------------------------------------------------------

struct ResultPayload {
  std::uint8_t class_id = 0;
  std::uint8_t confidence = 0;  // 0..255 maps to [0,1]
};

inline std::vector<std::uint8_t> encode_result(const ResultPayload& r) { return {r.class_id, r.confidence}; }

inline ResultPayload parse_result(const Frame& f) {
  if (f.header.type != FrameType::Result)
    throw std::invalid_argument("parse_result: wrong frame type");
  return {f.payload[0], f.payload[1]};
}

inline std::vector<std::uint8_t> encode_km_payload(const coreset::ClusterCoreset& cs) {
  const int k = static_cast<int>(cs.clusters.size());
  if (k < 1 || k > coreset::kMaxWireClusters)
    throw std::invalid_argument("encode_km_payload: cluster count out of range");
  std::vector<std::uint8_t> out;
  out.reserve(3 * k);
  for (const auto& c : cs.clusters) {
    binio::put_u16(out, c.center_code);
    binio::put_u8(out, c.radius_code);
  }
  return out;
}

inline coreset::ClusterCoreset parse_km_payload(const Frame& f) {
  if (f.header.type != FrameType::CoresetKm)
    throw std::invalid_argument("parse_km_payload: wrong frame type");
  binio::Reader r(f.payload);
  coreset::ClusterCoreset cs;
  while (r.remaining() >= 3) {
    coreset::QuantCluster q;
    q.center_code = r.u16();
    q.radius_code = r.u8();
    cs.clusters.push_back(q);
  }
  return cs;
}

// Recoverable payload: k cluster records, then ceil(k/2) count bytes with two
// 4-bit fields per byte (count-1, low nibble first; odd k pads with zero).
inline std::vector<std::uint8_t> encode_rec_payload(const coreset::RecoverableCoreset& rec) {
  const int k = static_cast<int>(rec.clusters.size());
  if (k < 1 || k > coreset::kMaxWireClusters)
    throw std::invalid_argument("encode_rec_payload: cluster count out of range");
  if (rec.counts.size() != rec.clusters.size())
    throw std::invalid_argument("encode_rec_payload: clusters/counts size mismatch");
  std::vector<std::uint8_t> out;
  out.reserve(3 * k + (k + 1) / 2);
  for (const auto& c : rec.clusters) {
    binio::put_u16(out, c.center_code);
    binio::put_u8(out, c.radius_code);
  }
  for (int i = 0; i < k; i += 2) {
    const int lo = rec.counts[i];
    if (lo < 1 || lo > coreset::kMaxClusterPoints)
      throw std::invalid_argument("encode_rec_payload: count out of range");
    std::uint8_t b = static_cast<std::uint8_t>(lo - 1);
    if (i + 1 < k) {
      const int hi = rec.counts[i + 1];
      if (hi < 1 || hi > coreset::kMaxClusterPoints)
        throw std::invalid_argument("encode_rec_payload: count out of range");
      b |= static_cast<std::uint8_t>((hi - 1) << 4);
    }
    out.push_back(b);
  }
  return out;
}

inline coreset::RecoverableCoreset parse_rec_payload(const Frame& f) {
  if (f.header.type != FrameType::CoresetRec)
    throw std::invalid_argument("parse_rec_payload: wrong frame type");
  const int k = detail::check_payload(FrameType::CoresetRec, f.payload.size(), {});
  binio::Reader r(f.payload);
  coreset::RecoverableCoreset rec;
  for (int i = 0; i < k; ++i) {
    coreset::QuantCluster q;
    q.center_code = r.u16();
    q.radius_code = r.u8();
    rec.clusters.push_back(q);
  }
  for (int i = 0; i < k; i += 2) {
    const std::uint8_t b = r.u8();
    rec.counts.push_back((b & 0x0F) + 1);
    if (i + 1 < k)
      rec.counts.push_back((b >> 4) + 1);
    else if ((b >> 4) != 0)
      throw DecodeError(DecodeError::Kind::LengthMismatch,
                        "recoverable payload: nonzero padding nibble");
  }
  return rec;
}

inline std::vector<std::uint8_t> encode_dp_payload(const coreset::DpCoreset& dp) {
  if (dp.point_codes.empty()) throw std::invalid_argument("encode_dp_payload: empty coreset");
  std::vector<std::uint8_t> out;
  out.reserve(2 * dp.point_codes.size());
  for (std::uint16_t code : dp.point_codes) binio::put_u16(out, code);
  return out;
}

inline coreset::DpCoreset parse_dp_payload(const Frame& f) {
  if (f.header.type != FrameType::CoresetDp)
    throw std::invalid_argument("parse_dp_payload: wrong frame type");
  binio::Reader r(f.payload);
  coreset::DpCoreset dp;
  while (r.remaining() >= 2) dp.point_codes.push_back(r.u16());
  return dp;
}

// Raw frames carry the window's float32 cells (row-major) when physical
// accounting is on; under unit accounting the payload is a 4-byte-per-sample
// digest of each row (first channel as float32), keeping frames self-checking
// while matching the booked volume.
inline std::vector<std::uint8_t> encode_raw_payload(const SampleWindow& w, const WireConfig& cfg = {}) {
  w.validate();
  if (w.rows != cfg.window_points)
    throw std::invalid_argument("encode_raw_payload: window length does not match wire config");
  std::vector<std::uint8_t> out;
  if (cfg.raw_physical) {
    if (w.cols != cfg.channels)
      throw std::invalid_argument("encode_raw_payload: channel count does not match wire config");
    out.reserve(w.points.size() * 4);
    for (float v : w.points) binio::put_f32(out, v);
  } else {
    out.reserve(static_cast<std::size_t>(w.rows) * 4);
    for (int r = 0; r < w.rows; ++r) binio::put_f32(out, w.at(r, 0));
  }
  return out;
}

// Inverse of encode_raw_payload under physical accounting. Unit-accounting
// payloads are lossy by design (the simulator hands the host the original
// window alongside the frame), so only physical payloads decode.
inline SampleWindow parse_raw_window(const Frame& f, const WireConfig& cfg) {
  if (f.header.type != FrameType::Raw)
    throw std::invalid_argument("parse_raw_window: wrong frame type");
  if (!cfg.raw_physical)
    throw std::invalid_argument("parse_raw_window: unit-accounting raw payloads do not decode");
  binio::Reader r(f.payload);
  SampleWindow w;
  w.sensor_id = f.header.sensor_id;
  w.rows = cfg.window_points;
  w.cols = cfg.channels;
  w.points.reserve(static_cast<std::size_t>(w.rows) * w.cols);
  for (int i = 0; i < w.rows * w.cols; ++i) w.points.push_back(r.f32());
  return w;
}

// Bytes booked against the channel for one frame.
inline long frame_volume(std::size_t frame_bytes, const WireConfig& cfg) {
  return static_cast<long>(frame_bytes) - (cfg.count_headers ? 0 : kHeaderBytes);
}

}  // namespace seeker::codec
